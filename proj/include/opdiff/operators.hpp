#pragma once

// Grid operators of the plate problem and the regularized compositions used
// by the splitting schemes. Everything is matrix-free.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opdiff/error.hpp"
#include "opdiff/krylov.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"

namespace opdiff {

/// Inner-solve tolerance used when none is given.
inline constexpr double kDefaultSolverTol = 1e-10;

struct PlateCoefficients {
  double gamma1 = 1.0;   // foundation reaction modulus
  double gamma2 = 0.05;  // shear / membrane tension

  void validate() const {
    if (!std::isfinite(gamma1) || !std::isfinite(gamma2) || gamma1 < 0.0 || gamma2 < 0.0) {
      throw InvalidCoefficientError("plate coefficients must be finite and non-negative, got gamma1=" +
                                    detail::format_coefficient(gamma1) +
                                    " gamma2=" + detail::format_coefficient(gamma2));
    }
  }
};

namespace detail {

// out = w1 * (-d11 u) + w2 * (-d22 u) with zero extension outside the interior.
inline void five_point(const Field& u, Field& out, double w1, double w2) {
  const GridSpec& g = u.grid();
  const int m1 = g.m1();
  const int m2 = g.m2();
  const auto in = u.values();
  auto res = out.values();
  for (int i2 = 0; i2 < m2; ++i2) {
    const std::size_t row = static_cast<std::size_t>(i2) * m1;
    for (int i1 = 0; i1 < m1; ++i1) {
      const std::size_t k = row + i1;
      const double c = in[k];
      double acc = 0.0;
      if (w1 != 0.0) {
        const double west = i1 > 0 ? in[k - 1] : 0.0;
        const double east = i1 + 1 < m1 ? in[k + 1] : 0.0;
        acc += w1 * (2.0 * c - west - east);
      }
      if (w2 != 0.0) {
        const double south = i2 > 0 ? in[k - m1] : 0.0;
        const double north = i2 + 1 < m2 ? in[k + m1] : 0.0;
        acc += w2 * (2.0 * c - south - north);
      }
      res[k] = acc;
    }
  }
}

inline LinearMap stencil_map(const GridSpec& grid, std::string name, std::string adjoint_name,
                             double w1, double w2) {
  LinearMap::Apply f = [w1, w2](const Field& in, Field& out) { five_point(in, out, w1, w2); };
  // Symmetric stencil: the adjoint shares the callable, only the label differs.
  return LinearMap(grid, std::move(name), f, std::move(adjoint_name), f);
}

}  // namespace detail

inline LinearMap identity(const GridSpec& grid) {
  return LinearMap(grid, "I", [](const Field& in, Field& out) {
    std::copy(in.values().begin(), in.values().end(), out.values().begin());
  });
}

inline LinearMap zero_map(const GridSpec& grid) {
  return LinearMap(grid, "0", [](const Field&, Field& out) { out.fill(0.0); });
}

/// Five-point Dirichlet Laplacian A (positive definite, A = A*).
inline LinearMap laplacian(const GridSpec& grid) {
  return detail::stencil_map(grid, "A", "A*", 1.0 / (grid.h1() * grid.h1()),
                             1.0 / (grid.h2() * grid.h2()));
}

/// Second difference along one axis; laplacian = directional(1) + directional(2).
inline LinearMap laplacian_directional(const GridSpec& grid, int axis) {
  if (axis == 1) return detail::stencil_map(grid, "A1", "A1*", 1.0 / (grid.h1() * grid.h1()), 0.0);
  if (axis == 2) return detail::stencil_map(grid, "A2", "A2*", 0.0, 1.0 / (grid.h2() * grid.h2()));
  throw InvalidGridError("laplacian_directional: axis must be 1 or 2, got " + std::to_string(axis));
}

/// B = gamma1 I + gamma2 A.
inline LinearMap foundation_operator(const LinearMap& a, const PlateCoefficients& c) {
  c.validate();
  const double g1 = c.gamma1;
  const double g2 = c.gamma2;
  return LinearMap(a.grid(), "B", [a, g1, g2](const Field& in, Field& out) {
    a.apply(in, out);
    out *= g2;
    out.axpy(g1, in);
  });
}

/// Scalar multiple s L.
inline LinearMap scaled(double s, const LinearMap& l) {
  auto f = [l, s](const Field& in, Field& out) {
    l.apply(in, out);
    out *= s;
  };
  const LinearMap la = l.adjoint();
  auto fa = [la, s](const Field& in, Field& out) {
    la.apply(in, out);
    out *= s;
  };
  const std::string c = detail::format_coefficient(s) + "·";
  return LinearMap(l.grid(), c + detail::as_factor(l.descriptor()), f,
                   c + detail::as_factor(la.descriptor()), fa);
}

/// Sum of maps on one grid.
inline LinearMap sum(const std::vector<LinearMap>& terms) {
  if (terms.empty()) throw SpecMismatchError("sum: empty term list");
  for (const auto& t : terms) require_same_grid(terms.front().grid(), t.grid(), "sum");
  if (terms.size() == 1) return terms.front();
  std::vector<LinearMap> adj;
  std::string name;
  std::string adj_name;
  for (const auto& t : terms) {
    adj.push_back(t.adjoint());
    name += (name.empty() ? "" : " + ") + t.descriptor();
    adj_name += (adj_name.empty() ? "" : " + ") + adj.back().descriptor();
  }
  auto make = [](std::vector<LinearMap> ts) {
    return [ts = std::move(ts)](const Field& in, Field& out) {
      ts.front().apply(in, out);
      Field tmp(in.grid());
      for (std::size_t i = 1; i < ts.size(); ++i) {
        ts[i].apply(in, tmp);
        out += tmp;
      }
    };
  };
  return LinearMap(terms.front().grid(), name, make(terms), adj_name, make(std::move(adj)));
}

/// Composition; the last factor is applied first.
inline LinearMap compose(const std::vector<LinearMap>& factors) {
  if (factors.empty()) throw SpecMismatchError("compose: empty factor list");
  for (const auto& f : factors) require_same_grid(factors.front().grid(), f.grid(), "compose");
  if (factors.size() == 1) return factors.front();
  std::vector<LinearMap> adj;
  std::string name;
  for (const auto& f : factors) name += (name.empty() ? "" : "·") + detail::as_factor(f.descriptor());
  // (F1 F2 ... Fk)* = Fk* ... F1*
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) adj.push_back(it->adjoint());
  std::string adj_name;
  for (const auto& f : adj) adj_name += (adj_name.empty() ? "" : "·") + detail::as_factor(f.descriptor());
  auto make = [](std::vector<LinearMap> fs) {
    return [fs = std::move(fs)](const Field& in, Field& out) {
      Field cur = in;
      for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        it->apply(cur, out);
        if (std::next(it) != fs.rend()) std::swap(cur, out);
      }
    };
  };
  return LinearMap(factors.front().grid(), name, make(factors), adj_name, make(std::move(adj)));
}

/// I + mu L, the system matrix of a shifted solve.
inline LinearMap shifted(const LinearMap& l, double mu) {
  const std::string prefix = "I + " + detail::format_coefficient(mu) + "·";
  const LinearMap la = l.adjoint();
  auto make = [mu](LinearMap m) {
    return [m = std::move(m), mu](const Field& in, Field& out) {
      m.apply(in, out);
      out *= mu;
      out += in;
    };
  };
  if (l.declared_self_adjoint()) return LinearMap(l.grid(), prefix + detail::as_factor(l.descriptor()), make(l));
  return LinearMap(l.grid(), prefix + detail::as_factor(l.descriptor()), make(l),
                   prefix + detail::as_factor(la.descriptor()), make(la));
}

/// (I + mu L)^{-1}, applied by CG on I + mu L. mu = 0 gives the identity.
inline LinearMap shifted_inverse(const LinearMap& l, double mu, double tol = kDefaultSolverTol,
                                 std::optional<int> max_iter = std::nullopt) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw InvalidCoefficientError("shifted_inverse: mu must be finite and >= 0");
  }
  if (mu == 0.0) return identity(l.grid());
  auto make = [tol, max_iter](LinearMap system) {
    return [system = std::move(system), tol, max_iter](const Field& in, Field& out) {
      out = cg_solve(system, in, tol, max_iter).solution;
    };
  };
  const LinearMap sys = shifted(l, mu);
  const LinearMap sys_adj = sys.adjoint();
  const std::string name = detail::as_factor(sys.descriptor()) + "^-1";
  if (sys.declared_self_adjoint()) return LinearMap(l.grid(), name, make(sys));
  return LinearMap(l.grid(), name, make(sys), detail::as_factor(sys_adj.descriptor()) + "^-1",
                   make(sys_adj));
}

/// (I + mu L)^{-1} L: multiply first, then one shifted solve.
inline LinearMap regularized(const LinearMap& l, double mu, double tol = kDefaultSolverTol) {
  return compose({shifted_inverse(l, mu, tol), l});
}

/// (I + sigma_A tau A*)^{-1} A* A (I + sigma_A tau A)^{-1}
///
/// One solve with I + c A, two multiplications, one solve with I + c A*;
/// the product A*A is never inverted.
inline LinearMap regularized_product(const LinearMap& a, double sigma_a, double tau,
                                     double tol = kDefaultSolverTol) {
  if (!(sigma_a >= 0.0) || !(tau >= 0.0)) {
    throw InvalidCoefficientError("regularized_product: sigma_A and tau must be >= 0");
  }
  const double c = sigma_a * tau;
  const LinearMap as = a.adjoint();
  return compose({shifted_inverse(as, c, tol), as, a, shifted_inverse(a, c, tol)});
}

/// (sum_a Ã_a)* (sum_a Ã_a) with Ã_a = (I + sigma_A tau A_a)^{-1} A_a, for A = sum_a A_a.
inline LinearMap regularized_sum_product(const std::vector<LinearMap>& parts, double sigma_a,
                                         double tau, double tol = kDefaultSolverTol) {
  if (parts.empty()) throw SpecMismatchError("regularized_sum_product: no parts");
  const double c = sigma_a * tau;
  std::vector<LinearMap> right;
  std::vector<LinearMap> left;
  for (const auto& part : parts) {
    const LinearMap ps = part.adjoint();
    right.push_back(compose({part, shifted_inverse(part, c, tol)}));
    left.push_back(compose({ps, shifted_inverse(ps, c, tol)}));
  }
  return compose({sum(left), sum(right)});
}

/// sum_a (I + sigma_A tau A_a*)^{-1} A_a* A_a (I + sigma_A tau A_a)^{-1}, for A*A = sum_a A_a* A_a.
inline LinearMap regularized_split_product(const std::vector<LinearMap>& parts, double sigma_a,
                                           double tau, double tol = kDefaultSolverTol) {
  if (parts.empty()) throw SpecMismatchError("regularized_split_product: no parts");
  std::vector<LinearMap> terms;
  for (const auto& part : parts) terms.push_back(regularized_product(part, sigma_a, tau, tol));
  return sum(terms);
}

}  // namespace opdiff
