#pragma once

// Uniform rectangular grid on (0,l1)x(0,l2), grid functions on its interior
// nodes and the L2(omega) Hilbert-space structure.
//
// Storage is interior-only: node (i1, i2), 1 <= i_a <= N_a - 1, lives at
// flat index (i2 - 1) * (N1 - 1) + (i1 - 1), i.e. x1 varies fastest. Values
// outside the interior are identically zero.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opdiff/error.hpp"

namespace opdiff {

class GridSpec {
 public:
  GridSpec(double l1, double l2, int n1, int n2) : l1_(l1), l2_(l2), n1_(n1), n2_(n2) {
    if (n1 < 2 || n2 < 2) {
      throw InvalidGridError("grid needs at least 2 subdivisions per direction, got " +
                             std::to_string(n1) + "x" + std::to_string(n2));
    }
    if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
      throw InvalidGridError("grid side lengths must be finite and positive");
    }
    h1_ = l1 / n1;
    h2_ = l2 / n2;
  }

  static GridSpec unit_square(int n) { return {1.0, 1.0, n, n}; }

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }

  /// Interior node counts per direction.
  int m1() const { return n1_ - 1; }
  int m2() const { return n2_ - 1; }
  std::size_t size() const { return static_cast<std::size_t>(m1()) * static_cast<std::size_t>(m2()); }

  /// Cell area h1*h2, the quadrature weight of the grid inner product.
  double cell() const { return h1_ * h2_; }

  std::size_t index(int i1, int i2) const {
    return static_cast<std::size_t>(i2 - 1) * static_cast<std::size_t>(m1()) +
           static_cast<std::size_t>(i1 - 1);
  }
  double x1(int i1) const { return i1 * h1_; }
  double x2(int i2) const { return i2 * h2_; }

  bool operator==(const GridSpec& other) const = default;

  std::string describe() const {
    std::ostringstream os;
    os << n1_ << "x" << n2_ << " on [0," << l1_ << "]x[0," << l2_ << "]";
    return os.str();
  }

 private:
  double l1_;
  double l2_;
  int n1_;
  int n2_;
  double h1_ = 0.0;
  double h2_ = 0.0;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, std::string_view what) {
  if (!(a == b)) {
    throw SpecMismatchError(std::string(what) + ": grid " + a.describe() + " vs " + b.describe());
  }
}

/// A grid function on the interior nodes; zero outside.
class Field {
 public:
  explicit Field(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) {}

  Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw SpecMismatchError("field value count " + std::to_string(values_.size()) +
                              " does not match grid " + grid_.describe());
    }
  }

  /// Samples f(x1, x2) at every interior node.
  template <class F>
  static Field sample(const GridSpec& grid, F&& f) {
    Field out(grid);
    for (int i2 = 1; i2 <= grid.m2(); ++i2) {
      for (int i1 = 1; i1 <= grid.m1(); ++i1) {
        out.at(i1, i2) = f(grid.x1(i1), grid.x2(i2));
      }
    }
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(int i1, int i2) { return values_[grid_.index(i1, i2)]; }
  double at(int i1, int i2) const { return values_[grid_.index(i1, i2)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

  Field& operator+=(const Field& other) {
    require_same_grid(grid_, other.grid_, "field addition");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  Field& operator-=(const Field& other) {
    require_same_grid(grid_, other.grid_, "field subtraction");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }
  Field& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }

  /// this += a * x
  void axpy(double a, const Field& x) {
    require_same_grid(grid_, x.grid_, "axpy");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::abs(v));
    }
    return m;
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

/// (u, v) = sum_x u(x) v(x) h1 h2
inline double inner_product(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product");
  const auto a = u.values();
  const auto b = v.values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * u.grid().cell();
}

inline double norm(const Field& u) { return std::sqrt(inner_product(u, u)); }

/// CSV dump: header `i1,i2,x1,x2,value`, rows ordered x2-major, 17 significant digits.
inline void write_field_csv(std::ostream& os, const Field& u) {
  const GridSpec& g = u.grid();
  const auto old_precision = os.precision(17);
  os << "i1,i2,x1,x2,value\n";
  for (int i2 = 1; i2 <= g.m2(); ++i2) {
    for (int i1 = 1; i1 <= g.m1(); ++i1) {
      os << i1 << ',' << i2 << ',' << g.x1(i1) << ',' << g.x2(i2) << ',' << u.at(i1, i2) << '\n';
    }
  }
  os.precision(old_precision);
}

/// Reads a field written by write_field_csv. Every interior node must appear exactly once.
inline Field read_field_csv(std::istream& is, const GridSpec& grid) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("i1,i2,x1,x2,value", 0) != 0) {
    throw ConfigError("field CSV: missing header 'i1,i2,x1,x2,value'");
  }
  Field out(grid);
  std::vector<char> seen(grid.size(), 0);
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int i1 = 0;
    int i2 = 0;
    double x1 = 0.0;
    double x2 = 0.0;
    double value = 0.0;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(row >> i1 >> c1 >> i2 >> c2 >> x1 >> c3 >> x2 >> c4 >> value) || c1 != ',' || c2 != ',' ||
        c3 != ',' || c4 != ',') {
      throw ConfigError("field CSV: malformed row '" + line + "'");
    }
    if (i1 < 1 || i1 > grid.m1() || i2 < 1 || i2 > grid.m2()) {
      throw ConfigError("field CSV: node (" + std::to_string(i1) + "," + std::to_string(i2) +
                        ") outside grid " + grid.describe());
    }
    const std::size_t k = grid.index(i1, i2);
    if (seen[k]) throw ConfigError("field CSV: duplicate node in row '" + line + "'");
    seen[k] = 1;
    out[k] = value;
    ++count;
  }
  if (count != grid.size()) {
    throw ConfigError("field CSV: expected " + std::to_string(grid.size()) + " rows, got " +
                      std::to_string(count));
  }
  return out;
}

}  // namespace opdiff
