#pragma once

// Three-level time steppers. Every scheme is realized as
//   u^{n+1} = 2 u^n - u^{n-1} - tau^2 D~ u^n
// where D~ hides all inner solves; schemes differ only in D~.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opdiff/error.hpp"
#include "opdiff/krylov.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"
#include "opdiff/operators.hpp"
#include "opdiff/plate.hpp"

namespace opdiff {

enum class Scheme {
  explicit_scheme,
  weighted,
  regularized_q,
  additive_averaged,
  split_product,
  split_product_bsplit,
  split_product_aasplit,
  split_factor_sum,
};

inline constexpr Scheme kAllSchemes[] = {
    Scheme::explicit_scheme,      Scheme::weighted,
    Scheme::regularized_q,        Scheme::additive_averaged,
    Scheme::split_product,        Scheme::split_product_bsplit,
    Scheme::split_product_aasplit, Scheme::split_factor_sum,
};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::explicit_scheme: return "explicit";
    case Scheme::weighted: return "weighted";
    case Scheme::regularized_q: return "regularized_q";
    case Scheme::additive_averaged: return "additive_averaged";
    case Scheme::split_product: return "split_product";
    case Scheme::split_product_bsplit: return "split_product_bsplit";
    case Scheme::split_product_aasplit: return "split_product_aasplit";
    case Scheme::split_factor_sum: return "split_factor_sum";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

inline bool is_split_scheme(Scheme s) {
  return s == Scheme::split_product || s == Scheme::split_product_bsplit ||
         s == Scheme::split_product_aasplit || s == Scheme::split_factor_sum;
}

/// Uses sigma (as opposed to sigma_A / sigma_B).
inline bool is_sigma_scheme(Scheme s) {
  return s == Scheme::weighted || s == Scheme::regularized_q || s == Scheme::additive_averaged;
}

/// Sufficient-condition thresholds: sigma >= 1/4 (p/4 additive),
/// sigma_A^2 >= 1/2 | p/2 | p^2/2, sigma_B >= 1/2 | p/2.
struct WeightThreshold {
  double sigma = 0.0;
  double sigma_a_squared = 0.0;
  double sigma_b = 0.0;
};

inline WeightThreshold stability_threshold(Scheme s, int p) {
  const double pp = static_cast<double>(p);
  switch (s) {
    case Scheme::explicit_scheme: return {};
    case Scheme::weighted:
    case Scheme::regularized_q: return {0.25, 0.0, 0.0};
    case Scheme::additive_averaged: return {pp / 4.0, 0.0, 0.0};
    case Scheme::split_product: return {0.0, 0.5, 0.5};
    case Scheme::split_product_bsplit: return {0.0, 0.5, pp / 2.0};
    case Scheme::split_product_aasplit: return {0.0, pp / 2.0, 0.5};
    case Scheme::split_factor_sum: return {0.0, pp * pp / 2.0, 0.5};
  }
  return {};
}

struct SchemeConfig {
  Scheme scheme = Scheme::weighted;
  double tau = 0.005;
  double final_time = 1.0;
  // Unset weights default to the scheme's stability threshold.
  std::optional<double> sigma;
  std::optional<double> sigma_a;
  std::optional<double> sigma_b;
  int p = 2;
  double solver_tol = kDefaultSolverTol;
  std::optional<int> max_iter;

  /// N = T / tau; requires N tau = T to 1e-12 relative.
  int steps() const {
    validate();
    const double n = std::round(final_time / tau);
    if (n < 1.0 || std::abs(n * tau - final_time) > 1e-12 * final_time) {
      throw ConfigError("final_time " + detail::format_coefficient(final_time) +
                        " is not an integer multiple of tau " + detail::format_coefficient(tau));
    }
    return static_cast<int>(n);
  }

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive and finite");
    if (!(final_time >= tau) || !std::isfinite(final_time)) throw ConfigError("final_time must be >= tau");
    for (const auto& w : {sigma, sigma_a, sigma_b}) {
      if (w && (!std::isfinite(*w) || *w < 0.0)) throw ConfigError("weights must be finite and >= 0");
    }
    if (p < 1 || p > 2) throw ConfigError("splitting count p must be 1 or 2");
    if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be positive");
  }

  /// sigma, defaulting to 1/4 (p/4 + 1e-12 for the additive scheme).
  double resolved_sigma() const {
    if (sigma) return *sigma;
    if (scheme == Scheme::additive_averaged) return p / 4.0 + 1e-12;
    return 0.25;
  }
  /// sigma_A for the given effective splitting count.
  double resolved_sigma_a(int parts) const {
    return sigma_a ? *sigma_a : std::sqrt(stability_threshold(scheme, parts).sigma_a_squared);
  }
  double resolved_sigma_b(int parts) const {
    return sigma_b ? *sigma_b : stability_threshold(scheme, parts).sigma_b;
  }
};

/// (u^{n-1}, u^n) at level n.
struct ThreeLevelState {
  Field u_prev;
  Field u_curr;
  int n = 1;
};

namespace detail {

inline void require_scheme(const SchemeConfig& cfg, std::initializer_list<Scheme> allowed,
                           std::string_view op) {
  if (std::find(allowed.begin(), allowed.end(), cfg.scheme) == allowed.end()) {
    throw ConfigError(std::string(op) + " called with scheme " + std::string(to_string(cfg.scheme)));
  }
}

}  // namespace detail

/// u^{n+1} = 2 u^n - u^{n-1} - tau^2 D~ u^n
inline ThreeLevelState advance(const ThreeLevelState& s, const LinearMap& effective, double tau) {
  require_same_grid(s.u_prev.grid(), s.u_curr.grid(), "three-level state");
  Field next = effective(s.u_curr);
  next *= -tau * tau;
  next.axpy(2.0, s.u_curr);
  next -= s.u_prev;
  return {s.u_curr, std::move(next), s.n + 1};
}

/// u^0 = w0 and (I + tau^2/2 Q) u^1 = w0 + tau w0_dot.
inline ThreeLevelState initialize(const Field& w0, const Field& w0_dot, const LinearMap& q,
                                  const SchemeConfig& cfg) {
  cfg.validate();
  require_same_grid(w0.grid(), w0_dot.grid(), "initialize");
  Field rhs = w0;
  rhs.axpy(cfg.tau, w0_dot);
  Field u1 = cg_solve(shifted(q, 0.5 * cfg.tau * cfg.tau), rhs, cfg.solver_tol, cfg.max_iter).solution;
  return {w0, std::move(u1), 1};
}

inline ThreeLevelState explicit_step(const ThreeLevelState& s, const LinearMap& q, const SchemeConfig& cfg) {
  detail::require_scheme(cfg, {Scheme::explicit_scheme}, "explicit_step");
  return advance(s, q, cfg.tau);
}

/// Weighted scheme in its regularized-equivalent form D~ = (I + sigma tau^2 Q)^{-1} Q.
inline ThreeLevelState weighted_step(const ThreeLevelState& s, const LinearMap& q, const SchemeConfig& cfg) {
  detail::require_scheme(cfg, {Scheme::weighted}, "weighted_step");
  const double mu = cfg.resolved_sigma() * cfg.tau * cfg.tau;
  return advance(s, regularized(q, mu, cfg.solver_tol), cfg.tau);
}

/// Weighted scheme solved as written:
/// (I + s tau^2 Q) u^{n+1} = (2I - (1 - 2s) tau^2 Q) u^n - (I + s tau^2 Q) u^{n-1}.
inline ThreeLevelState weighted_step_direct(const ThreeLevelState& s, const LinearMap& q,
                                            const SchemeConfig& cfg) {
  detail::require_scheme(cfg, {Scheme::weighted}, "weighted_step_direct");
  const double sigma = cfg.resolved_sigma();
  const double t2 = cfg.tau * cfg.tau;
  const LinearMap lhs = shifted(q, sigma * t2);
  Field rhs = q(s.u_curr);
  rhs *= -(1.0 - 2.0 * sigma) * t2;
  rhs.axpy(2.0, s.u_curr);
  rhs -= lhs(s.u_prev);
  Field next = cg_solve(lhs, rhs, cfg.solver_tol, cfg.max_iter).solution;
  return {s.u_curr, std::move(next), s.n + 1};
}

/// D~ = (I + mu Q)^{-1} Q with mu = sigma tau^2.
inline ThreeLevelState regularized_q_step(const ThreeLevelState& s, const LinearMap& q,
                                          const SchemeConfig& cfg) {
  detail::require_scheme(cfg, {Scheme::regularized_q}, "regularized_q_step");
  const double mu = cfg.resolved_sigma() * cfg.tau * cfg.tau;
  return advance(s, regularized(q, mu, cfg.solver_tol), cfg.tau);
}

/// Regularized parts Q~_a = (I + sigma tau^2 Q_a)^{-1} Q_a of an additive split.
inline std::vector<LinearMap> additive_parts(const std::vector<LinearMap>& parts, const SchemeConfig& cfg) {
  const double mu = cfg.resolved_sigma() * cfg.tau * cfg.tau;
  std::vector<LinearMap> out;
  for (const auto& part : parts) out.push_back(regularized(part, mu, cfg.solver_tol));
  return out;
}

namespace detail {

// Each independent sub-problem carries p Q~_a so that the average of the
// sub-solutions reproduces 2u^n - u^{n-1} - tau^2 sum_a Q~_a u^n.
inline ThreeLevelState averaged_step(const ThreeLevelState& s, const std::vector<LinearMap>& reg_parts,
                                     double tau) {
  const double p = static_cast<double>(reg_parts.size());
  Field next(s.u_curr.grid());
  for (const auto& part : reg_parts) {
    Field sub = part(s.u_curr);
    sub *= -tau * tau * p;
    sub.axpy(2.0, s.u_curr);
    sub -= s.u_prev;
    next += sub;
  }
  next *= 1.0 / p;
  return {s.u_curr, std::move(next), s.n + 1};
}

}  // namespace detail

/// Additive-averaged realization: p independent sub-steps, averaged in fixed order.
inline ThreeLevelState additive_averaged_step(const ThreeLevelState& s, const std::vector<LinearMap>& parts,
                                              const SchemeConfig& cfg) {
  detail::require_scheme(cfg, {Scheme::additive_averaged}, "additive_averaged_step");
  if (parts.empty()) throw ConfigError("additive_averaged_step: no parts");
  return detail::averaged_step(s, additive_parts(parts, cfg), cfg.tau);
}

/// Direct evaluation of the additive scheme with D~ = sum_a Q~_a.
inline ThreeLevelState additive_sum_step(const ThreeLevelState& s, const std::vector<LinearMap>& parts,
                                         const SchemeConfig& cfg) {
  detail::require_scheme(cfg, {Scheme::additive_averaged}, "additive_sum_step");
  if (parts.empty()) throw ConfigError("additive_sum_step: no parts");
  return advance(s, sum(additive_parts(parts, cfg)), cfg.tau);
}

/// D~ = (A*A)~ + B~, both regularized maps supplied by the caller.
inline ThreeLevelState split_product_step(const ThreeLevelState& s, const LinearMap& ata_reg,
                                          const LinearMap& b_reg, const SchemeConfig& cfg) {
  detail::require_scheme(cfg,
                         {Scheme::split_product, Scheme::split_product_bsplit,
                          Scheme::split_product_aasplit, Scheme::split_factor_sum},
                         "split_product_step");
  return advance(s, sum({ata_reg, b_reg}), cfg.tau);
}

/// B~ = sum_a (I + sigma_B tau^2 B_a)^{-1} B_a
inline LinearMap regularized_foundation(const std::vector<LinearMap>& b_parts, double sigma_b, double tau,
                                        double tol = kDefaultSolverTol) {
  std::vector<LinearMap> terms;
  for (const auto& part : b_parts) terms.push_back(regularized(part, sigma_b * tau * tau, tol));
  return sum(terms);
}

/// Problem form a scheme integrates; the A*_a A_a split targets the directional operator.
inline ProblemForm required_form(const SchemeConfig& cfg) {
  return cfg.scheme == Scheme::split_product_aasplit && cfg.p == 2 ? ProblemForm::directional
                                                                   : ProblemForm::biharmonic;
}

/// Weights after defaults, with the splitting count actually used.
struct ResolvedWeights {
  double sigma = 0.0;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  int p = 1;
};

/// Operators of the canonical form C (u^{n+1} - 2u^n + u^{n-1}) / tau^2 + D u^n = 0.
struct CanonicalOperators {
  LinearMap c;
  LinearMap d;
};

/// Energy operators G = C - tau^2/4 D and D of the conserved discrete energy.
struct EnergyOperators {
  LinearMap g;
  LinearMap d;
};

/// A scheme bound to the plate operators, with its D~ built once.
class Stepper {
 public:
  Stepper(const PlateOperators& ops, const SchemeConfig& cfg)
      : cfg_(cfg), q_(ops.q), effective_(ops.q) {
    cfg_.validate();
    if (ops.form != required_form(cfg_)) {
      throw ConfigError("scheme " + std::string(to_string(cfg_.scheme)) + " needs the " +
                        std::string(to_string(required_form(cfg_))) + " problem form");
    }
    const double tau = cfg_.tau;
    const double tol = cfg_.solver_tol;
    switch (cfg_.scheme) {
      case Scheme::explicit_scheme:
        weights_.p = 1;
        break;
      case Scheme::weighted:
      case Scheme::regularized_q:
        weights_.sigma = cfg_.resolved_sigma();
        weights_.p = 1;
        effective_ = regularized(q_, weights_.sigma * tau * tau, tol);
        break;
      case Scheme::additive_averaged: {
        std::vector<LinearMap> parts = cfg_.p == 1 ? std::vector<LinearMap>{ops.q}
                                                   : std::vector<LinearMap>{ops.fourth, ops.b};
        weights_.p = static_cast<int>(parts.size());
        weights_.sigma = cfg_.resolved_sigma();
        reg_parts_ = additive_parts(parts, cfg_);
        effective_ = sum(reg_parts_);
        break;
      }
      case Scheme::split_product:
      case Scheme::split_product_bsplit:
      case Scheme::split_product_aasplit:
      case Scheme::split_factor_sum: {
        const bool split_b = cfg_.scheme == Scheme::split_product_bsplit && cfg_.p == 2;
        const bool split_a = cfg_.scheme != Scheme::split_product && cfg_.scheme != Scheme::split_product_bsplit &&
                             cfg_.p == 2;
        const std::vector<LinearMap> b_parts = split_b ? ops.b_parts : std::vector<LinearMap>{ops.b};
        weights_.p = split_b ? static_cast<int>(b_parts.size()) : (split_a ? 2 : 1);
        weights_.sigma_a = cfg_.resolved_sigma_a(weights_.p);
        weights_.sigma_b = cfg_.resolved_sigma_b(weights_.p);
        LinearMap ata = regularized_product(ops.a, weights_.sigma_a, tau, tol);
        if (split_a && cfg_.scheme == Scheme::split_product_aasplit) {
          ata = regularized_split_product(ops.a_parts, weights_.sigma_a, tau, tol);
        } else if (split_a) {
          ata = regularized_sum_product(ops.a_parts, weights_.sigma_a, tau, tol);
        }
        ata_reg_ = ata;
        b_reg_ = regularized_foundation(b_parts, weights_.sigma_b, tau, tol);
        effective_ = sum({*ata_reg_, *b_reg_});
        break;
      }
    }
  }

  const SchemeConfig& config() const { return cfg_; }
  Scheme scheme() const { return cfg_.scheme; }
  const ResolvedWeights& weights() const { return weights_; }
  double tau() const { return cfg_.tau; }

  /// Q = A*A + B (problem operator, used by the start-up solve).
  const LinearMap& problem_operator() const { return q_; }
  /// D~ in u^{n+1} = 2u^n - u^{n-1} - tau^2 D~ u^n.
  const LinearMap& effective_operator() const { return effective_; }

  ThreeLevelState initialize(const Field& w0, const Field& w0_dot) const {
    return opdiff::initialize(w0, w0_dot, q_, cfg_);
  }
  ThreeLevelState initialize(const Field& w0) const { return initialize(w0, Field(w0.grid())); }

  ThreeLevelState step(const ThreeLevelState& s) const {
    if (cfg_.scheme == Scheme::additive_averaged) return detail::averaged_step(s, reg_parts_, cfg_.tau);
    return advance(s, effective_, cfg_.tau);
  }

  /// C and D of the canonical three-level form.
  CanonicalOperators canonical() const {
    const GridSpec& g = q_.grid();
    if (cfg_.scheme == Scheme::explicit_scheme) return {identity(g), q_};
    if (cfg_.scheme == Scheme::weighted) {
      return {shifted(q_, weights_.sigma * cfg_.tau * cfg_.tau), q_};
    }
    return {identity(g), effective_};
  }

  /// G and D of the conserved energy. For the weighted scheme G = I + (sigma - 1/4) tau^2 Q, D = Q.
  EnergyOperators energy_operators() const {
    const GridSpec& g = q_.grid();
    const double t2 = cfg_.tau * cfg_.tau;
    if (cfg_.scheme == Scheme::weighted) {
      const double c = (weights_.sigma - 0.25) * t2;
      return {c == 0.0 ? identity(g) : shifted(q_, c), q_};
    }
    return {shifted(effective_, -0.25 * t2), effective_};
  }

  /// Weights meet the scheme's sufficient stability condition (never for the explicit scheme).
  bool weights_meet_threshold() const {
    const WeightThreshold t = stability_threshold(cfg_.scheme, weights_.p);
    constexpr double eps = 1e-12;
    switch (cfg_.scheme) {
      case Scheme::explicit_scheme: return false;
      case Scheme::weighted:
      case Scheme::regularized_q:
      case Scheme::additive_averaged: return weights_.sigma >= t.sigma - eps;
      default:
        return weights_.sigma_a * weights_.sigma_a >= t.sigma_a_squared - eps &&
               weights_.sigma_b >= t.sigma_b - eps;
    }
  }

  /// Regularized (A*A)~ and B~ of the split schemes.
  const std::optional<LinearMap>& regularized_fourth() const { return ata_reg_; }
  const std::optional<LinearMap>& regularized_b() const { return b_reg_; }

 private:
  SchemeConfig cfg_;
  ResolvedWeights weights_;
  LinearMap q_;
  LinearMap effective_;
  std::vector<LinearMap> reg_parts_;
  std::optional<LinearMap> ata_reg_;
  std::optional<LinearMap> b_reg_;
};

}  // namespace opdiff
