#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "plap/random.hpp"
#include "plap/rearrange.hpp"

using namespace plap;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> random_values(const Mesh& mesh, std::uint64_t seed, bool quantized) {
  Rng rng(seed);
  std::normal_distribution<double> n;
  std::vector<double> v(mesh.element_count());
  for (double& x : v) x = quantized ? std::round(2.0 * n(rng)) : n(rng) * std::exp(n(rng));
  return v;
}

double direct_lq(const Mesh& mesh, const std::vector<double>& v, double q) {
  double s = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) s += mesh.area(e) * std::pow(std::abs(v[e]), q);
  return std::pow(s, 1.0 / q);
}

// int_0^inf f*(s) g*(s) ds by merging breakpoints.
double product_integral(const StepFunction& f, const StepFunction& g) {
  auto bf = f.breakpoints(), bg = g.breakpoints();
  std::vector<double> all(bf);
  all.insert(all.end(), bg.begin(), bg.end());
  std::sort(all.begin(), all.end());
  double acc = 0.0, a = 0.0;
  for (double b : all) {
    if (b > a) acc += (b - a) * f.value_at(0.5 * (a + b)) * g.value_at(0.5 * (a + b));
    a = b;
  }
  return acc;
}

}  // namespace

TEST(Rearrange, SortsAndMerges) {
  const auto sf = StepFunction::from_samples({3, 1, 2}, {1, 1, 1});
  ASSERT_EQ(sf.pieces().size(), 3u);
  EXPECT_EQ(sf.pieces()[0].value, 3.0);
  EXPECT_EQ(sf.pieces()[1].value, 2.0);
  EXPECT_EQ(sf.pieces()[2].value, 1.0);
  for (const auto& pc : sf.pieces()) EXPECT_EQ(pc.measure, 1.0);
  const auto merged = StepFunction::from_samples({-2, 2, 1}, {0.5, 0.25, 1});
  ASSERT_EQ(merged.pieces().size(), 2u);
  EXPECT_EQ(merged.pieces()[0].measure, 0.75);
}

TEST(Rearrange, IndicatorAndConstantFields) {
  const Mesh mesh(Rect{}, 8);
  std::vector<double> ind(mesh.element_count(), 0.0), c(mesh.element_count(), -2.5);
  for (int e = 0; e < 20; ++e) ind[e] = 1.0;
  const auto si = rearrange(mesh, ind);
  ASSERT_EQ(si.pieces().size(), 2u);
  EXPECT_DOUBLE_EQ(si.pieces()[0].measure, 20 * mesh.area(0));
  EXPECT_EQ(si.pieces()[0].value, 1.0);
  EXPECT_EQ(si.pieces()[1].value, 0.0);
  const auto sc = rearrange(mesh, c);
  ASSERT_EQ(sc.pieces().size(), 1u);
  EXPECT_DOUBLE_EQ(sc.pieces()[0].measure, 1.0);
  EXPECT_EQ(sc.pieces()[0].value, 2.5);
}

TEST(Rearrange, EquimeasurableExactly) {
  const Mesh mesh(Rect{}, 32);  // element areas are powers of two: sums are exact
  for (int s = 0; s < 50; ++s) {
    const auto v = random_values(mesh, s, s % 2 == 0);
    const auto sf = rearrange(mesh, v);
    std::vector<double> thresholds;
    for (const auto& pc : sf.pieces()) thresholds.push_back(pc.value);
    thresholds.push_back(-1.0);
    for (std::size_t i = 0; i + 1 < sf.pieces().size(); i += 7)
      thresholds.push_back(0.5 * (sf.pieces()[i].value + sf.pieces()[i + 1].value));
    for (double t : thresholds) {
      double m = 0.0;
      for (int e = 0; e < mesh.element_count(); ++e)
        if (std::abs(v[e]) > t) m += mesh.area(e);
      EXPECT_EQ(m, sf.distribution(t));
    }
  }
}

TEST(DoubleStar, ClosedFormAndDominance) {
  const StepFunction ind({{1.0, 1.0}});
  EXPECT_DOUBLE_EQ(double_star(ind, 2.0), 0.5);
  const StepFunction c({{3.0, 2.0}});
  EXPECT_DOUBLE_EQ(double_star(c, 1.7), 2.0);
  EXPECT_THROW(double_star(c, 0.0), std::domain_error);
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    const auto sf = random_step_function(rng, 30);
    for (int k = 0; k < 1000; ++k) {
      const double t = sf.total_measure() * 1.2 * (u(rng) + 1e-9);
      EXPECT_GE(double_star(sf, t), sf.value_at(t) * (1 - 1e-14));
    }
  }
}

TEST(Lorentz, DiagonalIsLebesgue) {
  const Mesh mesh(Rect{}, 16);
  for (int s = 0; s < 20; ++s) {
    const auto v = random_values(mesh, 100 + s, false);
    const auto sf = rearrange(mesh, v);
    for (double q : {1.0, 1.5, 2.0, 3.0, 7.5}) {
      EXPECT_LE(rel(lorentz_norm(sf, q, q), direct_lq(mesh, v, q)), 1e-12) << q;
      EXPECT_LE(rel(lebesgue_norm(sf, q), direct_lq(mesh, v, q)), 1e-12) << q;
    }
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    EXPECT_EQ(lorentz_norm(sf, kInf, kInf), mx);
  }
}

TEST(Lorentz, IndicatorClosedForm) {
  for (double t : {1e-3, 0.37, 1.0, 12.0})
    for (double q : {1.2, 2.0, 5.0})
      for (double r : {1.0, 1.5, 2.0, 4.0, kInf}) {
        const StepFunction ind({{t, 1.0}});
        const double expect = std::isinf(r) ? std::pow(t, 1.0 / q) : std::pow(q / r, 1.0 / r) * std::pow(t, 1.0 / q);
        EXPECT_LE(rel(lorentz_norm(ind, q, r), expect), 1e-12) << t << " " << q << " " << r;
      }
}

TEST(Lorentz, AdmissibilityAndHomogeneity) {
  const StepFunction f({{0.5, 3.0}, {1.0, 1.0}});
  EXPECT_THROW(lorentz_norm(f, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(lorentz_norm(f, kInf, 2.0), std::invalid_argument);
  EXPECT_THROW(lorentz_norm(f, 2.0, 0.5), std::invalid_argument);
  EXPECT_NO_THROW(lorentz_norm(f, 1.0, 1.0));
  for (double lam : {0.01, 3.0, 1e5})
    EXPECT_LE(rel(lorentz_norm(f.scaled(lam), 2.5, 1.5), lam * lorentz_norm(f, 2.5, 1.5)), 1e-13);
}

TEST(Norms, HardyLittlewoodInequality) {
  const Mesh mesh(Rect{}, 16);
  for (int s = 0; s < 20; ++s) {
    const auto f = random_values(mesh, 200 + s, false), g = random_values(mesh, 300 + s, false);
    double lhs = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e) lhs += mesh.area(e) * std::abs(f[e] * g[e]);
    EXPECT_LE(lhs, product_integral(rearrange(mesh, f), rearrange(mesh, g)) * (1 + 1e-12));
  }
}

TEST(Norms, RearrangementInvariantAndLattice) {
  const Mesh mesh(Rect{}, 16);
  Rng rng(8);
  const auto eta = [](double s) { return std::sqrt(s); };
  const auto phi = YoungFunction::exp_type(1.0, 2.0);
  for (int s = 0; s < 10; ++s) {
    auto f = random_values(mesh, 400 + s, s % 2 == 1);
    auto perm = f;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = rearrange(mesh, f), b = rearrange(mesh, perm);
    EXPECT_EQ(lorentz_norm(a, 3.0, 1.5), lorentz_norm(b, 3.0, 1.5));
    EXPECT_EQ(luxemburg_norm(a, phi), luxemburg_norm(b, phi));
    EXPECT_EQ(marcinkiewicz_norm(a, eta), marcinkiewicz_norm(b, eta));

    auto g = f;
    std::uniform_real_distribution<double> u(1.0, 2.0);
    for (double& x : g) x = std::abs(x) * u(rng);
    const auto c = rearrange(mesh, g);
    EXPECT_LE(lorentz_norm(a, 3.0, 1.5), lorentz_norm(c, 3.0, 1.5));
    EXPECT_LE(luxemburg_norm(a, phi), luxemburg_norm(c, phi) * (1 + 1e-9));
    EXPECT_LE(marcinkiewicz_norm(a, eta), marcinkiewicz_norm(c, eta));
    EXPECT_LE(lebesgue_norm(a, 2.0), lebesgue_norm(c, 2.0));
  }
}

TEST(Young, PowerConjugate) {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto phi = YoungFunction::power(p, 1.0 / p);
    const auto c = young_conjugate(phi);
    const double pp = p / (p - 1.0);
    EXPECT_EQ(c.kind(), YoungFunction::Kind::power);
    EXPECT_LE(rel(c.q(), pp), 1e-14);
    EXPECT_LE(rel(c.scale(), 1.0 / pp), 1e-13);
    const auto cc = young_conjugate(c);
    EXPECT_LE(rel(cc.q(), p), 1e-13);
    EXPECT_LE(rel(cc.scale(), 1.0 / p), 1e-12);
  }
}

TEST(Young, LinearConjugateIsIndicator) {
  const auto c = young_conjugate(YoungFunction::power(1.0));
  EXPECT_EQ(c(0.5), 0.0);
  EXPECT_EQ(c(1.0), 0.0);
  EXPECT_TRUE(std::isinf(c(1.0001)));
}

TEST(Young, NumericConjugateMatchesClosedForm) {
  // sampled t^3 through the numeric path
  const auto grid = YoungFunction::default_grid();
  std::vector<double> v;
  for (double t : grid) v.push_back(t * t * t);
  const auto c = young_conjugate(YoungFunction::sampled(grid, v));
  const auto exact = young_conjugate(YoungFunction::power(3.0));
  for (double t : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e6}) EXPECT_LE(rel(c(t), exact(t)), 1e-6) << t;
}

TEST(Young, BiconjugationRecoversConvexPhi) {
  for (const auto& phi : {YoungFunction::exp_type(1.0, 2.0), YoungFunction::exp_type(0.5, 1.5)}) {
    const auto cc = young_conjugate(young_conjugate(phi));
    for (double t = 1e-3; t < 5.0; t *= 1.5) EXPECT_LE(rel(cc(t), phi(t)), 0.01) << phi.describe() << " t=" << t;
  }
}

TEST(Young, ConvexityScan) {
  const auto grid = YoungFunction::default_grid();
  std::vector<double> good, bad;
  for (double t : grid) {
    good.push_back(t * t);
    bad.push_back(std::sqrt(t));
  }
  EXPECT_TRUE(YoungFunction::sampled(grid, good).passes_convexity_scan());
  EXPECT_FALSE(YoungFunction::sampled(grid, bad).passes_convexity_scan());
  EXPECT_TRUE(young_conjugate(YoungFunction::exp_type(1.0, 2.0)).passes_convexity_scan());
}

TEST(Luxemburg, PowerIsLebesgue) {
  const Mesh mesh(Rect{}, 16);
  for (int s = 0; s < 10; ++s) {
    const auto v = random_values(mesh, 500 + s, false);
    const auto sf = rearrange(mesh, v);
    for (double q : {1.0, 2.0, 3.5}) EXPECT_LE(rel(luxemburg_norm(sf, YoungFunction::power(q)), direct_lq(mesh, v, q)), 1e-9);
  }
  EXPECT_EQ(luxemburg_norm(StepFunction(), YoungFunction::power(2.0)), 0.0);
  for (double m : {0.01, 1.0, 30.0})
    for (double q : {1.5, 4.0}) EXPECT_LE(rel(luxemburg_norm(StepFunction({{m, 1.0}}), YoungFunction::power(q)), std::pow(m, 1.0 / q)), 1e-9);
}

TEST(Luxemburg, CappedIsMaxOfSupAndLq) {
  const StepFunction f({{0.01, 5.0}, {0.5, 0.2}});
  const double expect = std::max(5.0, lebesgue_norm(f, 2.0));
  EXPECT_LE(rel(luxemburg_norm(f, YoungFunction::linf_cap(2.0)), expect), 1e-9);
}

TEST(Luxemburg, NoFiniteNormReported) {
  EXPECT_THROW(luxemburg_norm(StepFunction({{kInf, 1.0}}), YoungFunction::power(2.0)), NoFiniteNorm);
}

TEST(Marcinkiewicz, Examples) {
  const StepFunction c({{2.0, 3.0}});
  EXPECT_DOUBLE_EQ(marcinkiewicz_norm(c, [](double s) { return s; }), 6.0);
  EXPECT_EQ(marcinkiewicz_norm(StepFunction(), [](double s) { return s; }), 0.0);
  const StepFunction f({{0.1, 4.0}, {1.0, 1.0}});
  EXPECT_EQ(marcinkiewicz_norm(f, [](double) { return 1.0; }), 4.0);
}

TEST(OrliczTarget, PowerGivesPowerOfProductExponent) {
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{1.5, 4.0}, std::pair{2.0, 3.0}}) {
    const auto target = orlicz_target(YoungFunction::power(q), Exponent(p));
    const auto& psi = target.psi;
    EXPECT_TRUE(psi.passes_convexity_scan());
    const double want = q * (p - 1.0);
    for (double t = 1e-4; t < 1e4; t *= 10.0) {
      const double slope = std::log(psi(10 * t) / psi(t)) / std::log(10.0);
      EXPECT_LE(rel(slope, want), 0.02) << "p=" << p << " q=" << q << " t=" << t;
    }
  }
}

TEST(OrliczTarget, ScalingIsConsistentWithNorm) {
  const Exponent p(3.0);
  const double q = 2.0, k = 5.0;
  const auto a = orlicz_target(YoungFunction::power(q), p).psi;
  const auto b = orlicz_target(YoungFunction::power(q, k), p).psi;
  const StepFunction f({{0.1, 3.0}, {0.4, 1.0}, {0.5, 0.1}});
  EXPECT_LE(rel(luxemburg_norm(f, b) / luxemburg_norm(f, a), std::pow(k, 1.0 / (q * (p.p() - 1.0)))), 1e-3);
}

TEST(OrliczTarget, HypothesisViolations) {
  const Exponent p(3.0);
  try {
    orlicz_target(YoungFunction::power(p.pprime()), p);
    FAIL();
  } catch (const HypothesisViolation& e) {
    EXPECT_EQ(e.condition, "index condition");
    EXPECT_DOUBLE_EQ(e.measured_value, p.pprime());
  }
  EXPECT_THROW(orlicz_target(YoungFunction::power(1.2), p), HypothesisViolation);
}

TEST(OrliczTarget, ExpAndCappedFamiliesAreYoungFunctions) {
  const Exponent p(2.0);
  for (const auto& phi : {YoungFunction::exp_type(1.0, 3.0), YoungFunction::linf_cap(3.0)}) {
    const auto psi = orlicz_target(phi, p).psi;
    EXPECT_TRUE(psi.passes_convexity_scan()) << phi.describe();
    EXPECT_EQ(psi(0.0), 0.0);
    EXPECT_GT(psi(1.0), 0.0);
  }
}

TEST(HardyAvg, IndicatorClosedForm) {
  const Exponent p(3.0);
  for (double q : {2.0, 3.0, 6.0}) {
    const double s0 = q / p.pprime();
    const auto r = hardy_check_avg(NormSpec::lebesgue(q), p, {StepFunction({{1.0, 1.0}})});
    EXPECT_LE(rel(r[0], std::pow(s0 / (s0 - 1.0), 1.0 / s0)), 1e-8) << q;
  }
}

TEST(HardyAvg, ConstantOnHorizonGivesOne) {
  const auto r = hardy_check_avg(NormSpec::lorentz(3.0, 2.0), Exponent(2.0), {StepFunction({{2.0, 5.0}})}, 2.0);
  EXPECT_LE(rel(r[0], 1.0), 1e-8);
}

TEST(HardyAvg, WitnessFamilyGrowsAtTheEndpoint) {
  const Exponent p(3.0);
  std::vector<StepFunction> fam;
  for (double k : {1.0, 10.0, 100.0, 1000.0}) fam.push_back(StepFunction({{1.0 / k, k}}));
  const auto unbounded = hardy_check_avg(NormSpec::lebesgue(p.pprime()), p, fam);
  for (double r : unbounded) EXPECT_TRUE(std::isinf(r));
  const auto local = hardy_check_avg(NormSpec::lebesgue(p.pprime()), p, fam, 1.0);
  double k = 1.0;
  for (std::size_t i = 0; i < local.size(); ++i, k *= 10.0) {
    EXPECT_LE(rel(local[i], 1.0 + std::log(k)), 1e-8);
    if (i) EXPECT_GT(local[i], local[i - 1]);
  }
}

TEST(HardyAvg, BoundedAboveTheEndpoint) {
  Rng rng(31);
  std::vector<StepFunction> fam;
  for (int i = 0; i < 50; ++i) fam.push_back(random_step_function(rng, 1 + i % 7));
  const Exponent p(2.0);
  for (const auto& X : {NormSpec::lebesgue(3.0), NormSpec::lorentz(4.0, 2.0), NormSpec::orlicz(YoungFunction::power(3.0))}) {
    const auto r = hardy_check_avg(X, p, fam);
    for (double v : r) {
      EXPECT_TRUE(std::isfinite(v)) << X.describe();
      EXPECT_GE(v, 1.0 - 1e-8);
      EXPECT_LT(v, 20.0) << X.describe();
    }
  }
}

TEST(HardyTail, ShiftedIndicator) {
  const std::vector<Piece> phi{{1.0, 0.0}, {1.0, 1.0}};
  for (double s : {0.3, 1.0, 1.5, 2.0, 3.0}) EXPECT_NEAR(tail_transform(phi, s), std::log(2.0 / std::max(s, 1.0)) * (s < 2.0), 1e-15);
  // int_0^2 log(2/max(s,1))^2 ds = log(2)^2 + (2 - 2 log 2 - log(2)^2)
  const double expect = std::sqrt(2.0 - 2.0 * std::log(2.0));
  const auto r = hardy_check_tail(NormSpec::lebesgue(1.0), NormSpec::lebesgue(2.0), std::vector<std::vector<Piece>>{phi});
  EXPECT_LE(rel(r[0], expect), 1e-8);
}

TEST(HardyTail, ZeroAndDivergent) {
  EXPECT_EQ(hardy_check_tail(NormSpec::lebesgue(2.0), NormSpec::lebesgue(2.0), std::vector<StepFunction>{StepFunction({{1.0, 0.0}})})[0], 0.0);
  EXPECT_THROW(hardy_check_tail(NormSpec::lebesgue(2.0), NormSpec::lebesgue(2.0), std::vector<StepFunction>{StepFunction({{kInf, 1.0}})}),
               std::invalid_argument);
}

TEST(HardyTail, LorentzRatiosBounded) {
  Rng rng(77);
  std::vector<StepFunction> fam;
  for (int i = 0; i < 50; ++i) fam.push_back(random_step_function(rng, 1 + i % 9));
  for (auto [q, r] : {std::pair{2.0, 2.0}, std::pair{3.0, 1.5}, std::pair{1.5, 4.0}}) {
    const auto X = NormSpec::lorentz(q, r);
    const auto ratios = hardy_check_tail(X, X, fam);
    for (double v : ratios) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_LT(v, 20.0) << q << "," << r;
    }
  }
}

TEST(ProfileNorm, AgreesWithStepFunctionNorms) {
  const StepFunction f({{0.3, 4.0}, {0.5, 2.0}, {1.2, 0.5}});
  DecreasingProfile g;
  g.breaks = f.breakpoints();
  g.value = [&f](double s) { return f.value_at(s); };
  for (const auto& X : {NormSpec::lebesgue(2.5), NormSpec::lorentz(3.0, 2.0), NormSpec::lorentz(1.5, 4.0),
                        NormSpec::orlicz(YoungFunction::exp_type(1.0, 2.0))})
    EXPECT_LE(rel(profile_norm(g, X), norm(f, X)), 1e-7) << X.describe();
}
