#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"

namespace opdiff {

/// Matrix-free linear operator on grid functions.
///
/// A map carries its own application and the application of its adjoint,
/// both with a printable descriptor ("A", "A*", "I + 0.1·A", ...). Maps are
/// immutable and cheap to copy; the callables are shared.
class LinearMap {
 public:
  /// out = L(in). `out` is pre-sized on the map's grid; its contents are overwritten.
  using Apply = std::function<void(const Field&, Field&)>;

  /// Self-adjoint map: the adjoint reuses `apply` and `name`.
  LinearMap(const GridSpec& grid, std::string name, Apply apply) : grid_(grid), name_(std::move(name)) {
    apply_ = std::make_shared<const Apply>(std::move(apply));
    adjoint_name_ = name_;
    adjoint_apply_ = apply_;
  }

  LinearMap(const GridSpec& grid, std::string name, Apply apply, std::string adjoint_name,
            Apply adjoint_apply)
      : grid_(grid),
        name_(std::move(name)),
        apply_(std::make_shared<const Apply>(std::move(apply))),
        adjoint_name_(std::move(adjoint_name)),
        adjoint_apply_(std::make_shared<const Apply>(std::move(adjoint_apply))) {}

  const GridSpec& grid() const { return grid_; }
  const std::string& descriptor() const { return name_; }

  void apply(const Field& in, Field& out) const {
    require_same_grid(grid_, in.grid(), descriptor());
    require_same_grid(grid_, out.grid(), descriptor());
    (*apply_)(in, out);
  }

  Field operator()(const Field& in) const {
    Field out(grid_);
    apply(in, out);
    return out;
  }

  LinearMap adjoint() const {
    return LinearMap(grid_, adjoint_name_, adjoint_apply_, name_, apply_, 0);
  }

  /// True when the map was built with a single callable serving as its own adjoint.
  bool declared_self_adjoint() const { return apply_ == adjoint_apply_; }

 private:
  LinearMap(const GridSpec& grid, std::string name, std::shared_ptr<const Apply> apply,
            std::string adjoint_name, std::shared_ptr<const Apply> adjoint_apply, int /*tag*/)
      : grid_(grid),
        name_(std::move(name)),
        apply_(std::move(apply)),
        adjoint_name_(std::move(adjoint_name)),
        adjoint_apply_(std::move(adjoint_apply)) {}

  GridSpec grid_;
  std::string name_;
  std::shared_ptr<const Apply> apply_;
  std::string adjoint_name_;
  std::shared_ptr<const Apply> adjoint_apply_;
};

namespace detail {

inline std::string format_coefficient(double c) {
  std::ostringstream os;
  os << std::setprecision(6) << c;
  return os.str();
}

/// Wraps compound descriptors in parentheses before they become factors.
inline std::string as_factor(const std::string& name) {
  if (name.find(' ') == std::string::npos) return name;
  if (name.front() == '(' && name.back() == ')') {
    int depth = 0;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (name[i] == '(') ++depth;
      if (name[i] == ')') --depth;
      if (depth == 0 && i + 1 < name.size()) return "(" + name + ")";
    }
    return name;
  }
  return "(" + name + ")";
}

}  // namespace detail

/// ||u||_S = (S u, u)^{1/2}. Fails if (S u, u) < -1e-12 ||u||^2.
inline double weighted_norm(const Field& u, const LinearMap& s) {
  const double q = inner_product(s(u), u);
  const double scale = inner_product(u, u);
  if (q < -1e-12 * scale) {
    throw NotNonnegativeError("quadratic form of " + s.descriptor() + " is negative: " +
                              detail::format_coefficient(q));
  }
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace opdiff
