#pragma once

// Closed-form solution of the semi-discrete plate problem in the Laplacian's
// sine eigenbasis:
//   w(x, t) = sum_k (w0, psi_k) cos(sqrt(r_k) t) psi_k(x),
//   r_k = gamma1 + gamma2 lambda_k + lambda_k^2.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/operators.hpp"
#include "opdiff/plate.hpp"

namespace opdiff {

/// Largest grid (per direction) expanded by direct double summation; larger
/// grids use the separable factorization.
inline constexpr int kDirectExpansionLimit = 64;

/// (4 / h^2) sin^2(k pi / (2N)), the eigenvalue of the 1D second difference.
inline double directional_eigenvalue(double h, int n, int k) {
  const double s = std::sin(k * std::numbers::pi / (2.0 * n));
  return 4.0 / (h * h) * s * s;
}

struct Eigenpair {
  Field psi;
  double lambda;
  double lambda1;  // axis-1 part
  double lambda2;  // axis-2 part
};

inline void require_mode(const GridSpec& g, int k1, int k2) {
  if (k1 < 1 || k1 > g.m1() || k2 < 1 || k2 > g.m2()) {
    throw ModeRangeError("mode (" + std::to_string(k1) + "," + std::to_string(k2) + ") outside 1.." +
                         std::to_string(g.m1()) + " x 1.." + std::to_string(g.m2()));
  }
}

/// psi_k(x) = prod_b sqrt(2/l_b) sin(k_b pi x_b / l_b), normalized in L2(omega).
inline Eigenpair eigenpair(const GridSpec& g, int k1, int k2) {
  require_mode(g, k1, k2);
  const double pi = std::numbers::pi;
  const double a1 = std::sqrt(2.0 / g.l1());
  const double a2 = std::sqrt(2.0 / g.l2());
  Field psi(g);
  for (int i2 = 1; i2 <= g.m2(); ++i2) {
    const double s2 = a2 * std::sin(k2 * pi * i2 / g.n2());
    for (int i1 = 1; i1 <= g.m1(); ++i1) {
      psi.at(i1, i2) = a1 * std::sin(k1 * pi * i1 / g.n1()) * s2;
    }
  }
  const double l1 = directional_eigenvalue(g.h1(), g.n1(), k1);
  const double l2 = directional_eigenvalue(g.h2(), g.n2(), k2);
  return {std::move(psi), l1 + l2, l1, l2};
}

/// r_k of the problem form: biharmonic lambda^2, directional lambda1^2 + lambda2^2.
inline double mode_frequency_squared(const PlateCoefficients& c, ProblemForm form, double lambda1,
                                     double lambda2) {
  const double lambda = lambda1 + lambda2;
  const double fourth = form == ProblemForm::biharmonic ? lambda * lambda
                                                         : lambda1 * lambda1 + lambda2 * lambda2;
  return c.gamma1 + c.gamma2 * lambda + fourth;
}

struct SpectralExpansion {
  GridSpec grid;
  // Indexed like a Field: (k2 - 1) * (N1 - 1) + (k1 - 1).
  std::vector<double> coefficients;
  std::vector<double> frequencies;  // r_k

  double coefficient(int k1, int k2) const { return coefficients[grid.index(k1, k2)]; }
  double frequency(int k1, int k2) const { return frequencies[grid.index(k1, k2)]; }
};

namespace detail {

// basis(k-1, i-1) = sqrt(2/l) sin(k pi i / N)
inline Eigen::MatrixXd sine_basis(double l, int n) {
  const int m = n - 1;
  Eigen::MatrixXd s(m, m);
  const double a = std::sqrt(2.0 / l);
  for (int k = 1; k <= m; ++k) {
    for (int i = 1; i <= m; ++i) s(k - 1, i - 1) = a * std::sin(k * std::numbers::pi * i / n);
  }
  return s;
}

// Field values as an m1 x m2 matrix (x1 index = row).
inline Eigen::Map<const Eigen::MatrixXd> as_matrix(const Field& u) {
  return {u.values().data(), u.grid().m1(), u.grid().m2()};
}

inline std::vector<double> coefficients_separable(const Field& w0) {
  const GridSpec& g = w0.grid();
  const Eigen::MatrixXd s1 = sine_basis(g.l1(), g.n1());
  const Eigen::MatrixXd s2 = sine_basis(g.l2(), g.n2());
  const Eigen::MatrixXd c = g.cell() * (s1 * as_matrix(w0) * s2.transpose());
  return {c.data(), c.data() + c.size()};
}

inline std::vector<double> coefficients_direct(const Field& w0) {
  const GridSpec& g = w0.grid();
  std::vector<double> c(g.size(), 0.0);
  for (int k2 = 1; k2 <= g.m2(); ++k2) {
    for (int k1 = 1; k1 <= g.m1(); ++k1) {
      c[g.index(k1, k2)] = inner_product(w0, eigenpair(g, k1, k2).psi);
    }
  }
  return c;
}

}  // namespace detail

/// c_k = (w0, psi_k) for every mode, plus r_k.
inline SpectralExpansion expand(const Field& w0, const PlateCoefficients& coeffs,
                                ProblemForm form = ProblemForm::biharmonic) {
  const GridSpec& g = w0.grid();
  SpectralExpansion e{g, {}, std::vector<double>(g.size(), 0.0)};
  e.coefficients = g.n1() <= kDirectExpansionLimit && g.n2() <= kDirectExpansionLimit
                       ? detail::coefficients_direct(w0)
                       : detail::coefficients_separable(w0);
  for (int k2 = 1; k2 <= g.m2(); ++k2) {
    const double l2 = directional_eigenvalue(g.h2(), g.n2(), k2);
    for (int k1 = 1; k1 <= g.m1(); ++k1) {
      const double l1 = directional_eigenvalue(g.h1(), g.n1(), k1);
      e.frequencies[g.index(k1, k2)] = mode_frequency_squared(coeffs, form, l1, l2);
    }
  }
  return e;
}

/// sum_k weight_k c_k psi_k, evaluated separably.
inline Field synthesize(const GridSpec& g, const std::vector<double>& weighted_coefficients) {
  const Eigen::MatrixXd s1 = detail::sine_basis(g.l1(), g.n1());
  const Eigen::MatrixXd s2 = detail::sine_basis(g.l2(), g.n2());
  const Eigen::Map<const Eigen::MatrixXd> c(weighted_coefficients.data(), g.m1(), g.m2());
  const Eigen::MatrixXd w = s1.transpose() * c * s2;
  return Field(g, std::vector<double>(w.data(), w.data() + w.size()));
}

/// w(t) = sum_k c_k cos(sqrt(r_k) t) psi_k
inline Field exact_solution(const SpectralExpansion& e, double t) {
  if (!(t >= 0.0)) throw ConfigError("exact_solution: t must be >= 0");
  std::vector<double> ct(e.coefficients.size());
  for (std::size_t k = 0; k < ct.size(); ++k) ct[k] = e.coefficients[k] * std::cos(std::sqrt(e.frequencies[k]) * t);
  return synthesize(e.grid, ct);
}

/// dw/dt(t) = -sum_k c_k sqrt(r_k) sin(sqrt(r_k) t) psi_k
inline Field exact_velocity(const SpectralExpansion& e, double t) {
  std::vector<double> ct(e.coefficients.size());
  for (std::size_t k = 0; k < ct.size(); ++k) {
    const double w = std::sqrt(e.frequencies[k]);
    ct[k] = -e.coefficients[k] * w * std::sin(w * t);
  }
  return synthesize(e.grid, ct);
}

struct ErrorNorms {
  double max_abs = 0.0;  // C(omega)
  double l2 = 0.0;       // L2(omega)
};

inline ErrorNorms error_norms(const Field& u, const Field& w_exact) {
  require_same_grid(u.grid(), w_exact.grid(), "error_norms");
  Field diff = u;
  diff -= w_exact;
  return {diff.max_abs(), norm(diff)};
}

}  // namespace opdiff
