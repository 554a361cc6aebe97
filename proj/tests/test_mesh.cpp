#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "plap/mesh.hpp"
#include "plap/random.hpp"

using namespace plap;

namespace {

ElemField random_field(const Mesh& mesh, int rows, std::uint64_t seed) {
  Rng rng(seed);
  ElemField f(mesh.element_count(), rows);
  for (int e = 0; e < mesh.element_count(); ++e) f.set(e, random_tensor(rng, rows, 2, -1, 1));
  return f;
}

}  // namespace

TEST(Mesh, AreasSumToRectangle) {
  for (int M : {2, 7, 32}) {
    const Mesh mesh(Rect{-0.3, 1.1, 2.0, 2.5}, M);
    double s = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) s += mesh.area(e);
    EXPECT_NEAR(s / (1.4 * 0.5), 1.0, 1e-12);
    EXPECT_EQ(mesh.element_count(), 2 * M * M);
    EXPECT_EQ(mesh.node_count(), (M + 1) * (M + 1));
    for (int e = 0; e < mesh.element_count(); ++e) {
      const auto& t = mesh.element(e);
      EXPECT_EQ(std::set<int>(t.begin(), t.end()).size(), 3u);
    }
  }
}

TEST(Mesh, BoundaryNodesAreExactlyEdgeNodes) {
  const Rect r{0.0, 2.0, -1.0, 1.0};
  const Mesh mesh(r, 9);
  int count = 0;
  for (int k = 0; k < mesh.node_count(); ++k) {
    const Point x = mesh.node(k);
    const bool edge = x.x == r.x0 || x.x == r.x1 || x.y == r.y0 || x.y == r.y1;
    EXPECT_EQ(edge, mesh.is_boundary(k));
    count += edge;
  }
  EXPECT_EQ(static_cast<int>(mesh.boundary_nodes().size()), count);
  EXPECT_EQ(count, 4 * 9);
}

TEST(Mesh, LocateFindsContainingElement) {
  const Mesh mesh(Rect{}, 8);
  for (int e = 0; e < mesh.element_count(); ++e) EXPECT_EQ(mesh.locate(mesh.barycenter(e)), e);
  EXPECT_THROW(mesh.locate({2.0, 0.5}), std::out_of_range);
}

TEST(Gradient, AffineIsExact) {
  const Mesh mesh(Rect{-1, 1, -1, 1}, 10);
  const NodalField u = interpolate(mesh, 2, [](Point x, int c) { return c == 0 ? 3 * x.x - 2 * x.y + 1 : -x.y + 5; });
  const ElemField g = gradient(mesh, u);
  for (int e = 0; e < mesh.element_count(); ++e) {
    EXPECT_NEAR(g(e, 0, 0), 3.0, 1e-12);
    EXPECT_NEAR(g(e, 0, 1), -2.0, 1e-12);
    EXPECT_NEAR(g(e, 1, 0), 0.0, 1e-12);
    EXPECT_NEAR(g(e, 1, 1), -1.0, 1e-12);
  }
  const NodalField c = interpolate(mesh, 1, [](Point, int) { return 4.2; });
  for (double v : gradient(mesh, c).values()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, ReferenceTriangleOfProduct) {
  // x1 x2 vanishes at (0,0), (h,0), (0,h)
  const double h = 0.25;
  const auto g = triangle_gradient({Point{0, 0}, Point{h, 0}, Point{0, h}}, {0.0, h * 0.0, 0.0 * h});
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(Gradient, Linear) {
  const Mesh mesh(Rect{}, 6);
  Rng rng(4);
  std::normal_distribution<double> n;
  NodalField a(mesh.node_count(), 1), b(mesh.node_count(), 1), s(mesh.node_count(), 1);
  for (int k = 0; k < mesh.node_count(); ++k) {
    a(k, 0) = n(rng);
    b(k, 0) = n(rng);
    s(k, 0) = 2.0 * a(k, 0) - 3.0 * b(k, 0);
  }
  const ElemField ga = gradient(mesh, a), gb = gradient(mesh, b), gs = gradient(mesh, s);
  for (std::size_t i = 0; i < gs.values().size(); ++i)
    EXPECT_NEAR(gs.values()[i], 2.0 * ga.values()[i] - 3.0 * gb.values()[i], 1e-11);
}

TEST(Integrate, ConstantsAndLinears) {
  const Mesh mesh(Rect{}, 13);
  EXPECT_NEAR(integrate(mesh, std::vector<double>(mesh.element_count(), 1.0)), 1.0, 1e-13);
  std::vector<double> f(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) f[e] = mesh.barycenter(e).x;
  EXPECT_NEAR(integrate(mesh, f), 0.5, 1e-13);
}

TEST(Integrate, SecondOrderQuadrature) {
  // int_0^1 int_0^1 sin(pi x) = 2 / pi
  std::vector<double> err;
  for (int M : {8, 16, 32, 64}) {
    const Mesh mesh(Rect{}, M);
    std::vector<double> f(mesh.element_count());
    for (int e = 0; e < mesh.element_count(); ++e) f[e] = std::sin(std::numbers::pi * mesh.barycenter(e).x);
    err.push_back(std::abs(integrate(mesh, f) - 2.0 / std::numbers::pi));
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_NEAR(std::log2(err[i - 1] / err[i]), 2.0, 0.1);
}

TEST(Balls, LargeBallCoversEverything) {
  const Mesh mesh(Rect{}, 5);
  EXPECT_EQ(static_cast<int>(ball_elements(mesh, {0.3, 0.3}, 3.0).size()), mesh.element_count());
}

TEST(Balls, TinyBallMatchesEnumeration) {
  const Mesh mesh(Rect{}, 6);
  const double r = mesh.h() / 4;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Point c = mesh.barycenter(e);
    std::vector<int> expect;
    for (int k = 0; k < mesh.element_count(); ++k)
      if (std::pow(distance(mesh.barycenter(k), c), 2) < r * r) expect.push_back(k);
    EXPECT_EQ(ball_elements(mesh, c, r), expect);
    EXPECT_EQ(expect, std::vector<int>{e});
  }
}

TEST(Balls, EnumerationOracleAtArbitraryCenters) {
  const Mesh mesh(Rect{0, 1, 0, 2}, 9);
  Rng rng(12);
  std::uniform_real_distribution<double> ux(-0.2, 1.2), uy(-0.2, 2.2), ur(0.01, 0.9);
  for (int t = 0; t < 200; ++t) {
    const Point c{ux(rng), uy(rng)};
    const double r = ur(rng);
    std::vector<int> expect;
    for (int k = 0; k < mesh.element_count(); ++k) {
      const double dx = mesh.barycenter(k).x - c.x, dy = mesh.barycenter(k).y - c.y;
      if (dx * dx + dy * dy < r * r) expect.push_back(k);
    }
    if (expect.empty()) {
      EXPECT_THROW(ball_elements(mesh, c, r), EmptyBallError);
    } else {
      EXPECT_EQ(ball_elements(mesh, c, r), expect);
    }
  }
}

TEST(Balls, MonotoneInRadius) {
  const Mesh mesh(Rect{}, 16);
  const Point c{0.41, 0.57};
  std::vector<int> prev;
  for (double r = 0.05; r < 1.0; r += 0.05) {
    const auto cur = ball_elements(mesh, c, r);
    EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
}

TEST(Balls, BelowResolutionIsAnError) {
  const Mesh mesh(Rect{}, 4);
  EXPECT_THROW(ball_elements(mesh, mesh.node(6), 1e-3), EmptyBallError);
  const ElemField f(mesh.element_count(), 1);
  EXPECT_THROW(ball_oscillation(mesh, f, mesh.node(6), 1e-3, 1.0), EmptyBallError);
}

TEST(Balls, AreaApproachesDisk) {
  for (int M : {64, 128}) {
    const Mesh mesh(Rect{}, M);
    const double r = 8 * mesh.h();
    const double a = ball_area(mesh, {0.5, 0.5}, r);
    EXPECT_NEAR(a / (std::numbers::pi * r * r), 1.0, 0.1);
  }
}

TEST(Oscillation, ConstantField) {
  const Mesh mesh(Rect{}, 8);
  const Tensor c(2, 2, {1.0, -2.0, 0.5, 3.0});
  ElemField f(mesh.element_count(), 2);
  for (int e = 0; e < mesh.element_count(); ++e) f.set(e, c);
  const auto s = ball_oscillation(mesh, f, {0.5, 0.5}, 0.3, 2.0);
  EXPECT_NEAR(s.osc, 0.0, 1e-14);
  EXPECT_NEAR((s.mean - c).norm(), 0.0, 1e-14);
}

TEST(Oscillation, TwoElementBall) {
  // cell (0,0) of a 4x4 mesh: its two triangles are the only barycenters within h/2 of the cell center
  const Mesh mesh(Rect{}, 4);
  ElemField f(mesh.element_count(), 1);
  f(1, 0, 0) = 2.0;
  const Point c{mesh.h() / 2, mesh.h() / 2};
  ASSERT_EQ(ball_elements(mesh, c, 0.5 * mesh.h()), (std::vector<int>{0, 1}));
  const auto s = ball_oscillation(mesh, f, c, 0.5 * mesh.h(), 1.0);
  EXPECT_DOUBLE_EQ(s.mean.norm(), 1.0);
  EXPECT_DOUBLE_EQ(s.osc, 1.0);
}

TEST(Oscillation, JensenTranslationHomogeneity) {
  const Mesh mesh(Rect{}, 16);
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.2, 0.8), ur(0.05, 0.2), lam(0.1, 10.0);
  for (int t = 0; t < 30; ++t) {
    const ElemField f = random_field(mesh, 2, 100 + t);
    const Point c{u(rng), u(rng)};
    const double r = ur(rng), l = lam(rng);
    const double o1 = ball_oscillation(mesh, f, c, r, 1.0).osc;
    const double o2 = ball_oscillation(mesh, f, c, r, 2.0).osc;
    const double o3 = ball_oscillation(mesh, f, c, r, 3.5).osc;
    EXPECT_LE(o1, o2 * (1 + 1e-12));
    EXPECT_LE(o2, o3 * (1 + 1e-12));
    const Tensor shift = random_tensor(rng, 2, 2, 0, 1);
    const ElemField g = f.map([&](const Tensor& x) { return x * l + shift; });
    EXPECT_NEAR(ball_oscillation(mesh, g, c, r, 2.0).osc, l * o2, 1e-10 * l * o2);
  }
}

TEST(FieldIo, RoundTripIsExact) {
  const Mesh mesh(Rect{}, 5);
  const ElemField f = random_field(mesh, 3, 7);
  std::stringstream ss;
  write_elem_field(ss, f);
  const ElemField g = read_elem_field(ss, mesh.element_count());
  EXPECT_EQ(f.values(), g.values());

  Rng rng(2);
  NodalField u(mesh.node_count(), 2);
  std::normal_distribution<double> n;
  for (double& v : u.values()) v = n(rng) * 1e-7;
  std::stringstream su;
  write_nodal_field(su, u);
  EXPECT_EQ(read_nodal_field(su, mesh.node_count()).values(), u.values());
}

TEST(FieldIo, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text, int count) {
    std::istringstream is(text);
    try {
      read_elem_field(is, count);
    } catch (const FieldFormatError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("elem,row,value\n", 1), 1);
  EXPECT_EQ(line_of("elem,row,col,value\n0,0,0,1\n0,0,1,x\n", 1), 3);
  EXPECT_EQ(line_of("elem,row,col,value\n0,0,0,1\n0,0,0,2\n", 1), 3);
  EXPECT_EQ(line_of("elem,row,col,value\n0,0,0,1\n5,0,1,2\n", 2), 3);
  EXPECT_GT(line_of("elem,row,col,value\n0,0,0,1\n0,0,1,1\n", 2), 0);
}
