#pragma once

// Stability thresholds and the dense check of the three-level stability
// condition G = C - tau^2/4 D >= 0.

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"
#include "opdiff/operators.hpp"

namespace opdiff {

/// Dense checks refuse grids with more unknowns than this.
inline constexpr std::size_t kDenseDimCap = 1024;

/// Largest eigenvalue of a self-adjoint non-negative map by power iteration,
/// stopped when successive Rayleigh quotients agree to `tol` relative.
inline double operator_norm(const LinearMap& l, double tol = 1e-10, int max_iter = 200000) {
  const GridSpec& g = l.grid();
  Field v(g);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dist(rng);
  v *= 1.0 / norm(v);

  Field w(g);
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    l.apply(v, w);
    const double rq = inner_product(v, w);
    const double wn = norm(w);
    if (!std::isfinite(wn)) throw NumericalBreakdownError("operator_norm(" + l.descriptor() + "): overflow");
    if (wn == 0.0) return 0.0;
    if (it > 0 && std::abs(rq - estimate) <= tol * std::abs(rq)) return rq;
    estimate = rq;
    w *= 1.0 / wn;
    std::swap(v, w);
  }
  throw SolverError("operator_norm(" + l.descriptor() + "): power iteration did not converge");
}

/// tau_0 = 2 / ||Q||^{1/2}, the explicit scheme's largest stable step.
inline double explicit_threshold(const LinearMap& q, double tol = 1e-10) {
  const double qn = operator_norm(q, tol);
  if (!(qn > 0.0)) throw NotNonnegativeError("explicit_threshold: operator norm is not positive");
  return 2.0 / std::sqrt(qn);
}

/// Dense matrix of a map with respect to the nodal basis.
inline Eigen::MatrixXd assemble_dense(const LinearMap& l, std::size_t dim_cap = kDenseDimCap) {
  const GridSpec& g = l.grid();
  const std::size_t n = g.size();
  if (n > dim_cap) {
    throw TooLargeError("dense assembly of " + l.descriptor() + ": dimension " + std::to_string(n) +
                        " exceeds cap " + std::to_string(dim_cap));
  }
  Eigen::MatrixXd m(n, n);
  Field e(g);
  Field col(g);
  for (std::size_t j = 0; j < n; ++j) {
    e.fill(0.0);
    e[j] = 1.0;
    l.apply(e, col);
    for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return m;
}

struct StabilityVerdict {
  double g_min_eigenvalue = 0.0;
  bool condition_holds = false;  // G = C - tau^2/4 D >= 0 (with the tolerance below)
  std::optional<double> tau_0;
  // Preconditions C = C* > 0, D = D* > 0 checked on the assembled matrices.
  bool c_symmetric = false;
  bool d_symmetric = false;
  bool c_positive = false;
  bool d_positive = false;
  double c_norm = 0.0;
};

namespace detail {

inline bool dense_symmetric(const Eigen::MatrixXd& m, double rel) {
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel * std::max(scale, 1e-300);
}

}  // namespace detail

/// Assembles C and D densely, forms G = C - tau^2/4 D and reports its smallest
/// eigenvalue. The condition holds when g_min >= -1e-10 ||C||.
inline StabilityVerdict check_lemma1(const LinearMap& c, const LinearMap& d, double tau,
                                     std::size_t dim_cap = kDenseDimCap) {
  require_same_grid(c.grid(), d.grid(), "check_lemma1");
  const Eigen::MatrixXd cm = assemble_dense(c, dim_cap);
  const Eigen::MatrixXd dm = assemble_dense(d, dim_cap);

  StabilityVerdict v;
  v.c_symmetric = detail::dense_symmetric(cm, 1e-10);
  v.d_symmetric = detail::dense_symmetric(dm, 1e-10);

  const Eigen::MatrixXd cs = 0.5 * (cm + cm.transpose());
  const Eigen::MatrixXd ds = 0.5 * (dm + dm.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ce(cs, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> de(ds, Eigen::EigenvaluesOnly);
  v.c_norm = ce.eigenvalues().cwiseAbs().maxCoeff();
  const double d_norm = de.eigenvalues().cwiseAbs().maxCoeff();
  v.c_positive = ce.eigenvalues().minCoeff() > 1e-10 * v.c_norm;
  v.d_positive = de.eigenvalues().minCoeff() > 1e-10 * d_norm;

  const Eigen::MatrixXd gm = cs - (0.25 * tau * tau) * ds;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ge(gm, Eigen::EigenvaluesOnly);
  v.g_min_eigenvalue = ge.eigenvalues().minCoeff();
  v.condition_holds = v.c_symmetric && v.d_symmetric && v.c_positive && v.d_positive &&
                          v.g_min_eigenvalue >= -1e-10 * v.c_norm;
  return v;
}

}  // namespace opdiff
