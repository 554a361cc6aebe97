#pragma once
//
// Uniform P1 triangulation of an axis-aligned rectangle, nodal and
// per-element fields, exact P1 gradients, ball queries and ball averages.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/nfunc.hpp"

namespace plap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double area() const noexcept { return width() * height(); }
  double diameter() const noexcept { return std::hypot(width(), height()); }
  Point center() const noexcept { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  double distance_to_boundary(Point p) const noexcept {
    return std::min({p.x - x0, x1 - p.x, p.y - y0, y1 - p.y});
  }
};

/// Raised when a ball query selects no element.
class EmptyBallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a ball family would leave the meshed rectangle.
class BoundaryMarginError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient of the affine interpolant of three vertex values on a triangle.
inline std::array<double, 2> triangle_gradient(const std::array<Point, 3>& v,
                                               const std::array<double, 3>& values) {
  const double ax = v[1].x - v[0].x, ay = v[1].y - v[0].y;
  const double bx = v[2].x - v[0].x, by = v[2].y - v[0].y;
  const double det = ax * by - ay * bx;
  if (det == 0.0) throw std::invalid_argument("triangle_gradient: degenerate triangle");
  const double du = values[1] - values[0];
  const double dv = values[2] - values[0];
  return {(du * by - dv * ay) / det, (dv * ax - du * bx) / det};
}

/// Uniform triangulation with M x M cells, each cell split along the
/// lower-left to upper-right diagonal. Immutable after construction.
class Mesh {
 public:
  static constexpr int kDim = 2;

  Mesh(Rect bounds, int cells_per_side) : bounds_(bounds), m_(cells_per_side) {
    if (m_ < 2) throw std::invalid_argument("Mesh: need at least 2 cells per side");
    if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0))
      throw std::invalid_argument("Mesh: empty rectangle");
    hx_ = bounds.width() / m_;
    hy_ = bounds.height() / m_;

    const int nn = (m_ + 1) * (m_ + 1);
    nodes_.resize(nn);
    boundary_.assign(nn, false);
    for (int j = 0; j <= m_; ++j)
      for (int i = 0; i <= m_; ++i) {
        const int k = node_index(i, j);
        nodes_[k] = {i == m_ ? bounds.x1 : bounds.x0 + i * hx_,
                     j == m_ ? bounds.y1 : bounds.y0 + j * hy_};
        boundary_[k] = (i == 0 || j == 0 || i == m_ || j == m_);
      }

    elements_.reserve(2 * m_ * m_);
    for (int j = 0; j < m_; ++j)
      for (int i = 0; i < m_; ++i) {
        const int a = node_index(i, j), b = node_index(i + 1, j);
        const int c = node_index(i + 1, j + 1), d = node_index(i, j + 1);
        elements_.push_back({a, b, c});
        elements_.push_back({a, c, d});
      }

    const std::size_t ne = elements_.size();
    areas_.resize(ne);
    barycenters_.resize(ne);
    hat_gradients_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto v = vertices(static_cast<int>(e));
      const double det = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[1].y - v[0].y) * (v[2].x - v[0].x);
      areas_[e] = 0.5 * std::abs(det);
      barycenters_[e] = {(v[0].x + v[1].x + v[2].x) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0};
      for (int k = 0; k < 3; ++k) {
        std::array<double, 3> unit{0.0, 0.0, 0.0};
        unit[k] = 1.0;
        hat_gradients_[e][k] = triangle_gradient(v, unit);
      }
    }
  }

  const Rect& bounds() const noexcept { return bounds_; }
  int cells_per_side() const noexcept { return m_; }
  /// Cell width along x; equals the y width for square domains.
  double h() const noexcept { return hx_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }

  int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
  int element_count() const noexcept { return static_cast<int>(elements_.size()); }
  int node_index(int i, int j) const noexcept { return j * (m_ + 1) + i; }

  Point node(int k) const { return nodes_[k]; }
  bool is_boundary(int k) const { return boundary_[k]; }
  std::vector<int> boundary_nodes() const {
    std::vector<int> out;
    for (int k = 0; k < node_count(); ++k)
      if (boundary_[k]) out.push_back(k);
    return out;
  }

  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  std::array<Point, 3> vertices(int e) const {
    const auto& t = elements_[e];
    return {nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]};
  }
  double area(int e) const { return areas_[e]; }
  Point barycenter(int e) const { return barycenters_[e]; }
  /// Gradient of the hat function of local vertex k on element e.
  const std::array<double, 2>& hat_gradient(int e, int k) const { return hat_gradients_[e][k]; }

  /// Element containing p (ties resolved towards lower cell indices).
  int locate(Point p) const {
    if (p.x < bounds_.x0 || p.x > bounds_.x1 || p.y < bounds_.y0 || p.y > bounds_.y1)
      throw std::out_of_range("Mesh::locate: point outside the rectangle");
    const int i = std::clamp(static_cast<int>((p.x - bounds_.x0) / hx_), 0, m_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - bounds_.y0) / hy_), 0, m_ - 1);
    const double lx = (p.x - bounds_.x0) / hx_ - i;
    const double ly = (p.y - bounds_.y0) / hy_ - j;
    const int cell = j * m_ + i;
    return 2 * cell + (ly > lx ? 1 : 0);
  }

  /// Visits every element whose barycenter lies in the open ball B_r(center).
  template <class Visitor>
  void for_each_in_ball(Point center, double r, Visitor&& visit) const {
    const int i0 = std::max(0, static_cast<int>(std::floor((center.x - r - bounds_.x0) / hx_)) - 1);
    const int i1 = std::min(m_ - 1, static_cast<int>(std::floor((center.x + r - bounds_.x0) / hx_)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((center.y - r - bounds_.y0) / hy_)) - 1);
    const int j1 = std::min(m_ - 1, static_cast<int>(std::floor((center.y + r - bounds_.y0) / hy_)) + 1);
    const double r2 = r * r;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        for (int t = 0; t < 2; ++t) {
          const int e = 2 * (j * m_ + i) + t;
          const Point b = barycenters_[e];
          const double dx = b.x - center.x, dy = b.y - center.y;
          if (dx * dx + dy * dy < r2) visit(e);
        }
  }

 private:
  Rect bounds_;
  int m_;
  double hx_, hy_;
  std::vector<Point> nodes_;
  std::vector<bool> boundary_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<double> areas_;
  std::vector<Point> barycenters_;
  std::vector<std::array<std::array<double, 2>, 3>> hat_gradients_;
};

/// N reals per mesh node.
class NodalField {
 public:
  NodalField() = default;
  NodalField(int node_count, int components)
      : nodes_(node_count), comps_(components), values_(static_cast<std::size_t>(node_count) * components) {
    if (components < 1) throw std::invalid_argument("NodalField: need at least one component");
  }

  int node_count() const noexcept { return nodes_; }
  int components() const noexcept { return comps_; }
  double& operator()(int node, int comp) { return values_[static_cast<std::size_t>(node) * comps_ + comp]; }
  double operator()(int node, int comp) const { return values_[static_cast<std::size_t>(node) * comps_ + comp]; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  int nodes_ = 0;
  int comps_ = 1;
  std::vector<double> values_;
};

/// One N x 2 tensor per element.
class ElemField {
 public:
  ElemField() = default;
  ElemField(int element_count, int rows, int cols = Mesh::kDim)
      : elems_(element_count), rows_(rows), cols_(cols),
        values_(static_cast<std::size_t>(element_count) * rows * cols) {
    if (rows < 1 || cols < 1 || rows * cols > Tensor::kMaxEntries)
      throw std::invalid_argument("ElemField: unsupported tensor shape");
  }

  int element_count() const noexcept { return elems_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  Tensor at(int e) const {
    Tensor t(rows_, cols_);
    const double* src = values_.data() + static_cast<std::size_t>(e) * rows_ * cols_;
    for (int k = 0; k < rows_ * cols_; ++k) t[k] = src[k];
    return t;
  }
  void set(int e, const Tensor& t) {
    if (t.rows() != rows_ || t.cols() != cols_) throw std::invalid_argument("ElemField::set: shape mismatch");
    double* dst = values_.data() + static_cast<std::size_t>(e) * rows_ * cols_;
    for (int k = 0; k < rows_ * cols_; ++k) dst[k] = t[k];
  }
  double& operator()(int e, int r, int c) {
    return values_[(static_cast<std::size_t>(e) * rows_ + r) * cols_ + c];
  }
  double operator()(int e, int r, int c) const {
    return values_[(static_cast<std::size_t>(e) * rows_ + r) * cols_ + c];
  }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Pointwise image under a tensor map.
  template <class Fn>
  ElemField map(Fn&& fn) const {
    ElemField out(elems_, rows_, cols_);
    for (int e = 0; e < elems_; ++e) out.set(e, fn(at(e)));
    return out;
  }

  /// Per-element Frobenius norms.
  std::vector<double> norms() const {
    std::vector<double> out(elems_);
    for (int e = 0; e < elems_; ++e) out[e] = at(e).norm();
    return out;
  }

 private:
  int elems_ = 0;
  int rows_ = 1;
  int cols_ = Mesh::kDim;
  std::vector<double> values_;
};

/// Nodal interpolant of a vector function given per component.
inline NodalField interpolate(const Mesh& mesh, int components,
                              const std::function<double(Point, int)>& fn) {
  NodalField u(mesh.node_count(), components);
  for (int k = 0; k < mesh.node_count(); ++k)
    for (int c = 0; c < components; ++c) u(k, c) = fn(mesh.node(k), c);
  return u;
}

/// Element field sampled at barycenters.
inline ElemField sample_at_barycenters(const Mesh& mesh, int rows,
                                       const std::function<Tensor(Point)>& fn) {
  ElemField f(mesh.element_count(), rows);
  for (int e = 0; e < mesh.element_count(); ++e) f.set(e, fn(mesh.barycenter(e)));
  return f;
}

/// Exact per-element gradient of the P1 function with nodal values u.
inline ElemField gradient(const Mesh& mesh, const NodalField& u) {
  if (u.node_count() != mesh.node_count())
    throw std::invalid_argument("gradient: nodal field does not match the mesh");
  ElemField g(mesh.element_count(), u.components());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& t = mesh.element(e);
    for (int c = 0; c < u.components(); ++c) {
      double gx = 0.0, gy = 0.0;
      for (int k = 0; k < 3; ++k) {
        const auto& hg = mesh.hat_gradient(e, k);
        gx += u(t[k], c) * hg[0];
        gy += u(t[k], c) * hg[1];
      }
      g(e, c, 0) = gx;
      g(e, c, 1) = gy;
    }
  }
  return g;
}

/// Sum of area * f over elements; exact for per-element constants.
inline double integrate(const Mesh& mesh, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != mesh.element_count())
    throw std::invalid_argument("integrate: one value per element required");
  double s = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) s += mesh.area(e) * f[e];
  return s;
}

/// Elements whose barycenter lies in the open ball, in construction order.
inline std::vector<int> ball_elements(const Mesh& mesh, Point center, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_elements: radius must be positive");
  std::vector<int> out;
  mesh.for_each_in_ball(center, r, [&](int e) { out.push_back(e); });
  std::sort(out.begin(), out.end());
  if (out.empty()) throw EmptyBallError("ball_elements: ball of radius " + std::to_string(r) +
                                        " is below mesh resolution");
  return out;
}

/// Area of the discrete ball (sum of member element areas).
inline double ball_area(const Mesh& mesh, Point center, double r) {
  double a = 0.0;
  mesh.for_each_in_ball(center, r, [&](int e) { a += mesh.area(e); });
  return a;
}

struct BallStats {
  Tensor mean;
  double osc = 0.0;  // (mean of |f - mean|^q)^{1/q}
  double area = 0.0;
};

/// Area-weighted mean and q-mean oscillation of f over the discrete ball.
inline BallStats ball_oscillation(const Mesh& mesh, const ElemField& f, Point center, double r,
                                  double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("ball_oscillation: q must be >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("ball_oscillation: radius must be positive");
  BallStats s;
  s.mean = Tensor(f.rows(), f.cols());
  mesh.for_each_in_ball(center, r, [&](int e) {
    const double a = mesh.area(e);
    s.area += a;
    s.mean += f.at(e) * a;
  });
  if (s.area == 0.0) throw EmptyBallError("ball_oscillation: empty ball");
  s.mean *= 1.0 / s.area;
  double acc = 0.0;
  mesh.for_each_in_ball(center, r, [&](int e) {
    const double d = (f.at(e) - s.mean).norm();
    acc += mesh.area(e) * (q == 1.0 ? d : (q == 2.0 ? d * d : std::pow(d, q)));
  });
  acc /= s.area;
  s.osc = q == 1.0 ? acc : (q == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / q));
  return s;
}

/// Area-weighted mean of g(f) over the discrete ball for a scalar functional g.
template <class Fn>
double ball_mean(const Mesh& mesh, const ElemField& f, Point center, double r, Fn&& g) {
  double area = 0.0, acc = 0.0;
  mesh.for_each_in_ball(center, r, [&](int e) {
    area += mesh.area(e);
    acc += mesh.area(e) * g(f.at(e));
  });
  if (area == 0.0) throw EmptyBallError("ball_mean: empty ball");
  return acc / area;
}

// ---------------------------------------------------------------------------
// Text I/O. Mesh geometry is never written; readers take the mesh (or the
// expected counts) to validate against.

class FieldFormatError : public std::runtime_error {
 public:
  FieldFormatError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline long parse_index(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FieldFormatError("expected an integer, got '" + s + "'", line);
  }
}

inline double parse_real(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    if (!std::isfinite(v)) throw FieldFormatError("non-finite value '" + s + "'", line);
    return v;
  } catch (const FieldFormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FieldFormatError("expected a real number, got '" + s + "'", line);
  }
}

}  // namespace detail

inline void write_elem_field(std::ostream& os, const ElemField& f) {
  os << "elem,row,col,value\n";
  for (int e = 0; e < f.element_count(); ++e)
    for (int r = 0; r < f.rows(); ++r)
      for (int c = 0; c < f.cols(); ++c)
        os << e << ',' << r << ',' << c << ',' << detail::format_real(f(e, r, c)) << '\n';
}

inline void write_nodal_field(std::ostream& os, const NodalField& u) {
  os << "node,comp,value\n";
  for (int k = 0; k < u.node_count(); ++k)
    for (int c = 0; c < u.components(); ++c)
      os << k << ',' << c << ',' << detail::format_real(u(k, c)) << '\n';
}

/// Reads an element field; every (elem,row,col) triple must appear exactly once.
inline ElemField read_elem_field(std::istream& is, int element_count) {
  std::string line;
  int ln = 0;
  if (!std::getline(is, line)) throw FieldFormatError("missing header", 1);
  ++ln;
  if (detail::trim(line) != "elem,row,col,value")
    throw FieldFormatError("expected header 'elem,row,col,value'", ln);
  struct Entry { long e, r, c; double v; int line; };
  std::vector<Entry> entries;
  long max_row = -1, max_col = -1;
  while (std::getline(is, line)) {
    ++ln;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv(detail::trim(line));
    if (cols.size() != 4) throw FieldFormatError("expected 4 columns", ln);
    Entry en{detail::parse_index(detail::trim(cols[0]), ln), detail::parse_index(detail::trim(cols[1]), ln),
             detail::parse_index(detail::trim(cols[2]), ln), detail::parse_real(detail::trim(cols[3]), ln), ln};
    if (en.e < 0 || en.e >= element_count)
      throw FieldFormatError("element index " + std::to_string(en.e) + " out of range", ln);
    if (en.r < 0 || en.c < 0) throw FieldFormatError("negative tensor index", ln);
    max_row = std::max(max_row, en.r);
    max_col = std::max(max_col, en.c);
    entries.push_back(en);
  }
  if (entries.empty()) throw FieldFormatError("no entries", ln);
  if ((max_row + 1) * (max_col + 1) > Tensor::kMaxEntries)
    throw FieldFormatError("tensor shape too large", ln);
  ElemField f(element_count, static_cast<int>(max_row + 1), static_cast<int>(max_col + 1));
  std::vector<char> seen(f.values().size(), 0);
  for (const auto& en : entries) {
    const std::size_t idx = (static_cast<std::size_t>(en.e) * f.rows() + en.r) * f.cols() + en.c;
    if (seen[idx]) throw FieldFormatError("duplicate entry", en.line);
    seen[idx] = 1;
    f.values()[idx] = en.v;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw FieldFormatError("missing entry for element " + std::to_string(k / (f.rows() * f.cols())), ln);
  return f;
}

inline NodalField read_nodal_field(std::istream& is, int node_count) {
  std::string line;
  int ln = 0;
  if (!std::getline(is, line)) throw FieldFormatError("missing header", 1);
  ++ln;
  if (detail::trim(line) != "node,comp,value") throw FieldFormatError("expected header 'node,comp,value'", ln);
  struct Entry { long k, c; double v; int line; };
  std::vector<Entry> entries;
  long max_comp = -1;
  while (std::getline(is, line)) {
    ++ln;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv(detail::trim(line));
    if (cols.size() != 3) throw FieldFormatError("expected 3 columns", ln);
    Entry en{detail::parse_index(detail::trim(cols[0]), ln), detail::parse_index(detail::trim(cols[1]), ln),
             detail::parse_real(detail::trim(cols[2]), ln), ln};
    if (en.k < 0 || en.k >= node_count) throw FieldFormatError("node index out of range", ln);
    if (en.c < 0) throw FieldFormatError("negative component index", ln);
    max_comp = std::max(max_comp, en.c);
    entries.push_back(en);
  }
  if (entries.empty()) throw FieldFormatError("no entries", ln);
  NodalField u(node_count, static_cast<int>(max_comp + 1));
  std::vector<char> seen(u.values().size(), 0);
  for (const auto& en : entries) {
    const std::size_t idx = static_cast<std::size_t>(en.k) * u.components() + en.c;
    if (seen[idx]) throw FieldFormatError("duplicate entry", en.line);
    seen[idx] = 1;
    u.values()[idx] = en.v;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k]) throw FieldFormatError("missing entry for node " + std::to_string(k / u.components()), ln);
  return u;
}

}  // namespace plap
