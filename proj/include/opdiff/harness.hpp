#pragma once

// Experiment orchestration for the plate benchmark: build operators, start
// up, step to T, compare against the spectral solution, track the discrete
// energy, and write CSV output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "opdiff/config.hpp"
#include "opdiff/diagnostics.hpp"
#include "opdiff/error.hpp"
#include "opdiff/krylov.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/oracle.hpp"
#include "opdiff/plate.hpp"
#include "opdiff/stability.hpp"
#include "opdiff/steppers.hpp"

namespace opdiff {

/// Runs whose max-abs passes this are flagged unstable and stopped.
inline constexpr double kBlowUpThreshold = 1e12;

/// Instability during a run whose configuration meets its stability condition.
class UnexpectedInstabilityError : public Error {
 public:
  using Error::Error;
};

/// Initial deflection named by the config.
inline Field initial_field(const ExperimentConfig& cfg) {
  const GridSpec g = cfg.grid();
  switch (cfg.initial.kind) {
    case InitialKind::poly: return plate_initial_deflection(g);
    case InitialKind::eigenmode: return eigenpair(g, cfg.initial.k1, cfg.initial.k2).psi;
    case InitialKind::file: {
      std::ifstream in(cfg.initial.file);
      if (!in) throw ConfigError("cannot open initial_file '" + cfg.initial.file + "'");
      return read_field_csv(in, g);
    }
  }
  throw ConfigError("unresolvable initial condition");
}

struct ProbeNode {
  ProbePoint requested;
  int i1 = 0;
  int i2 = 0;
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Nearest interior node; no interpolation.
inline ProbeNode snap_probe(const GridSpec& g, const ProbePoint& p) {
  ProbeNode node{p};
  node.i1 = std::clamp(static_cast<int>(std::lround(p.x1 / g.h1())), 1, g.m1());
  node.i2 = std::clamp(static_cast<int>(std::lround(p.x2 / g.h2())), 1, g.m2());
  node.x1 = g.x1(node.i1);
  node.x2 = g.x2(node.i2);
  return node;
}

struct RunRow {
  int n = 0;
  double t = 0.0;
  double eps_inf = 0.0;
  double eps_2 = 0.0;
  std::optional<double> energy_total;  // energy of the pair (u^{n-1}, u^n)
  double max_abs = 0.0;
};

struct RunReport {
  SchemeConfig scheme;
  ResolvedWeights weights;
  std::vector<RunRow> rows;  // levels 0..N (fewer if the run was stopped)
  std::vector<EnergyRecord> energy;
  // ||(u^{n+1} - u^n)/tau||^2 + ||(u^{n+1} + u^n)/2||_Q^2 with the unperturbed Q, next to `energy`.
  // An observable only: no scheme conserves it exactly.
  std::vector<double> physical_energy;
  std::vector<ProbeNode> probe_nodes;
  std::vector<std::vector<double>> probe_numeric;  // per row, per probe
  std::vector<std::vector<double>> probe_exact;
  long cg_iterations = 0;
  std::size_t solves = 0;
  std::size_t step_solves = 0;  // solves issued by steps (start-up and energy excluded)
  std::vector<std::string> step_systems;  // distinct operators inverted during steps
  double wall_seconds = 0.0;
  double initial_max_abs = 0.0;
  double max_abs_envelope = 0.0;
  bool expected_stable = false;
  std::optional<double> tau_0;  // explicit scheme only
  bool unstable = false;
  std::optional<int> unstable_level;
  bool energy_indefinite = false;  // a G- or D-form went negative

  double max_eps_2() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.eps_2);
    return m;
  }
  double max_eps_inf() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.eps_inf);
    return m;
  }
};

namespace detail {

inline void record_level(RunReport& rep, const Field& u, const SpectralExpansion& exp, int n, double tau) {
  const double t = n * tau;
  const Field w = exact_solution(exp, t);
  const ErrorNorms e = error_norms(u, w);
  RunRow row{n, t, e.max_abs, e.l2, std::nullopt, u.max_abs()};
  rep.max_abs_envelope = std::max(rep.max_abs_envelope, row.max_abs);
  rep.rows.push_back(row);
  if (!rep.probe_nodes.empty()) {
    std::vector<double> num;
    std::vector<double> ex;
    for (const auto& p : rep.probe_nodes) {
      num.push_back(u.at(p.i1, p.i2));
      ex.push_back(w.at(p.i1, p.i2));
    }
    rep.probe_numeric.push_back(std::move(num));
    rep.probe_exact.push_back(std::move(ex));
  }
}

inline void track_energy(RunReport& rep, const ThreeLevelState& s, const EnergyOperators& eo, const LinearMap& q,
                         double tau, int stride) {
  const int n = s.n - 1;  // pair (u^{n}, u^{n+1})
  if (stride <= 0 || rep.energy_indefinite || n % stride != 0) return;
  try {
    EnergyRecord rec = energy(s.u_prev, s.u_curr, eo.g, eo.d, tau, n);
    rep.energy.push_back(rec);
    rep.rows.back().energy_total = rec.total;
    rep.physical_energy.push_back(energy(s.u_prev, s.u_curr, identity(q.grid()), q, tau, n).total);
  } catch (const StabilityViolationError&) {
    rep.energy_indefinite = true;
  }
}

inline void write_errors_csv(std::ostream& os, const RunReport& rep) {
  const auto old = os.precision(17);
  os << "n,t,eps_inf,eps_2\n";
  for (const auto& r : rep.rows) os << r.n << ',' << r.t << ',' << r.eps_inf << ',' << r.eps_2 << '\n';
  os.precision(old);
}

inline void write_probe_csv(std::ostream& os, const RunReport& rep) {
  const auto old = os.precision(17);
  for (std::size_t p = 0; p < rep.probe_nodes.size(); ++p) {
    const auto& node = rep.probe_nodes[p];
    os << "# probe " << p << ": requested (" << node.requested.x1 << ", " << node.requested.x2
       << ") snapped to node (" << node.i1 << ", " << node.i2 << ") at (" << node.x1 << ", " << node.x2
       << ")\n";
  }
  os << "n,t";
  for (std::size_t p = 0; p < rep.probe_nodes.size(); ++p) os << ",p" << p << "_numeric,p" << p << "_exact";
  os << '\n';
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    os << rep.rows[r].n << ',' << rep.rows[r].t;
    for (std::size_t p = 0; p < rep.probe_nodes.size(); ++p) {
      os << ',' << rep.probe_numeric[r][p] << ',' << rep.probe_exact[r][p];
    }
    os << '\n';
  }
  os.precision(old);
}

inline std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

inline void write_run_outputs(const ExperimentConfig& cfg, const RunReport& rep) {
  if (cfg.output_dir.empty()) return;
  {
    auto out = detail::open_output(cfg.output_dir, "config.ini");
    write_config(out, cfg);
  }
  {
    auto out = detail::open_output(cfg.output_dir, "errors.csv");
    detail::write_errors_csv(out, rep);
  }
  if (cfg.energy_stride > 0) {
    auto out = detail::open_output(cfg.output_dir, "energy.csv");
    write_energy_csv(out, rep.energy, cfg.scheme.tau);
  }
  if (!rep.probe_nodes.empty()) {
    auto out = detail::open_output(cfg.output_dir, "probe.csv");
    detail::write_probe_csv(out, rep);
  }
}

/// Full experiment: start-up, N steps, per-level oracle errors and energy, CSV output.
///
/// Runs are deterministic given the config. A run whose max-abs passes
/// kBlowUpThreshold (or turns non-finite) is stopped and flagged; rows only
/// ever hold finite states.
inline RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const GridSpec g = cfg.grid();
  const SchemeConfig& sc = cfg.scheme;
  const PlateOperators ops = make_plate_operators(g, cfg.coeffs, required_form(sc));
  const Stepper stepper(ops, sc);
  const int steps = sc.steps();
  const double tau = sc.tau;

  RunReport rep;
  rep.scheme = sc;
  rep.weights = stepper.weights();
  for (const auto& p : cfg.probes) rep.probe_nodes.push_back(snap_probe(g, p));
  if (sc.scheme == Scheme::explicit_scheme) {
    rep.tau_0 = explicit_threshold(ops.q);
    rep.expected_stable = tau <= *rep.tau_0;
  } else {
    rep.expected_stable = stepper.weights_meet_threshold();
  }

  const Field w0 = initial_field(cfg);
  const SpectralExpansion exp = expand(w0, cfg.coeffs, ops.form);
  const EnergyOperators eo = stepper.energy_operators();

  SolveLog log;
  rep.initial_max_abs = w0.max_abs();
  detail::record_level(rep, w0, exp, 0, tau);
  ThreeLevelState s = [&] {
    try {
      return stepper.initialize(w0);
    } catch (const SolverError& e) {
      throw SolverError(std::string("start-up level 1: ") + e.what());
    }
  }();
  detail::record_level(rep, s.u_curr, exp, 1, tau);
  detail::track_energy(rep, s, eo, ops.q, tau, cfg.energy_stride);

  std::vector<std::string> systems;
  while (s.n < steps) {
    const std::size_t before = log.size();
    try {
      s = stepper.step(s);
    } catch (const SolverError& e) {
      throw SolverError("step to level " + std::to_string(s.n + 1) + ": " + e.what());
    }
    rep.step_solves += log.size() - before;
    for (std::size_t i = before; i < log.size(); ++i) {
      const std::string& sys = log.records()[i].system;
      if (std::find(systems.begin(), systems.end(), sys) == systems.end()) systems.push_back(sys);
    }
    const double m = s.u_curr.max_abs();
    if (!std::isfinite(m) || m > kBlowUpThreshold) {
      rep.unstable = true;
      rep.unstable_level = s.n;
      break;
    }
    detail::record_level(rep, s.u_curr, exp, s.n, tau);
    detail::track_energy(rep, s, eo, ops.q, tau, cfg.energy_stride);
  }
  rep.step_systems = std::move(systems);
  rep.cg_iterations = log.total_iterations();
  rep.solves = log.size();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_outputs(cfg, rep);
  return rep;
}

struct SweepRow {
  double tau = 0.0;
  double max_eps_2 = 0.0;
  double max_eps_inf = 0.0;
  std::optional<double> observed_order;  // against the previous (larger) tau
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

/// One run per tau (run concurrently; reported in the given order).
inline SweepReport run_convergence_sweep(const ExperimentConfig& base, const std::vector<double>& taus) {
  if (taus.size() < 3) throw ConfigError("convergence sweep needs at least 3 tau values");
  std::vector<std::future<RunReport>> jobs;
  for (double tau : taus) {
    ExperimentConfig cfg = base;
    cfg.scheme.tau = tau;
    cfg.output_dir.clear();
    cfg.energy_stride = 0;
    cfg.probes.clear();
    cfg.validate();
    jobs.push_back(std::async(std::launch::async, [cfg] { return run_experiment(cfg); }));
  }
  SweepReport out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const RunReport rep = jobs[i].get();
    SweepRow row{taus[i], rep.max_eps_2(), rep.max_eps_inf(), std::nullopt};
    if (i > 0) {
      row.observed_order =
          std::log(out.rows.back().max_eps_2 / row.max_eps_2) / std::log(out.rows.back().tau / row.tau);
    }
    out.rows.push_back(row);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
  const auto old = os.precision(17);
  os << "tau,max_eps_2,max_eps_inf,observed_order\n";
  for (const auto& r : rep.rows) {
    os << r.tau << ',' << r.max_eps_2 << ',' << r.max_eps_inf << ',';
    if (r.observed_order) os << *r.observed_order;
    os << '\n';
  }
  os.precision(old);
}

struct StabilityCase {
  Scheme scheme = Scheme::weighted;
  std::optional<double> sigma;
  std::optional<double> sigma_a;
  std::optional<double> sigma_b;
  double tau = 0.0;
  int p = 2;
};

struct VerdictRow {
  StabilityCase c;
  ResolvedWeights weights;
  std::optional<bool> lemma1;  // absent when the grid exceeds the dense cap
  double g_min = 0.0;
  bool bounded = false;
  double growth = 0.0;  // max-abs envelope / initial max-abs
};

/// Dense solver tolerance for assembling regularized maps.
inline constexpr double kDenseCheckTol = 1e-13;

/// Stability-condition verdict (dense, when the grid allows) and trajectory boundedness
/// (max-abs <= 2x initial over `steps` steps) for each case.
inline std::vector<VerdictRow> run_stability_matrix(const ExperimentConfig& base,
                                                    const std::vector<StabilityCase>& cases, int steps,
                                                    std::size_t dim_cap = kDenseDimCap) {
  if (steps < 2) throw ConfigError("stability matrix needs at least 2 steps");
  auto evaluate = [&base, steps, dim_cap](const StabilityCase& c) {
    ExperimentConfig cfg = base;
    cfg.scheme.scheme = c.scheme;
    cfg.scheme.sigma = c.sigma;
    cfg.scheme.sigma_a = c.sigma_a;
    cfg.scheme.sigma_b = c.sigma_b;
    cfg.scheme.p = c.p;
    cfg.scheme.tau = c.tau;
    cfg.scheme.final_time = c.tau * steps;
    cfg.output_dir.clear();
    cfg.energy_stride = 0;
    cfg.probes.clear();

    VerdictRow row{c, {}, std::nullopt, 0.0, false, 0.0};
    const GridSpec g = cfg.grid();
    if (g.size() <= dim_cap) {
      SchemeConfig dense_cfg = cfg.scheme;
      dense_cfg.solver_tol = std::min(dense_cfg.solver_tol, kDenseCheckTol);
      const PlateOperators ops = make_plate_operators(g, cfg.coeffs, required_form(dense_cfg));
      const Stepper st(ops, dense_cfg);
      const CanonicalOperators cd = st.canonical();
      const StabilityVerdict v = check_lemma1(cd.c, cd.d, c.tau, dim_cap);
      row.lemma1 = v.condition_holds;
      row.g_min = v.g_min_eigenvalue;
    }
    const RunReport rep = run_experiment(cfg);
    row.weights = rep.weights;
    row.growth = rep.max_abs_envelope / rep.initial_max_abs;
    row.bounded = !rep.unstable && row.growth <= 2.0;
    return row;
  };
  std::vector<std::future<VerdictRow>> jobs;
  for (const auto& c : cases) jobs.push_back(std::async(std::launch::async, evaluate, c));
  std::vector<VerdictRow> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

/// `scheme,sigma_a,sigma_b,tau,lemma1,bounded`. For sigma-weighted schemes the
/// sigma_a column carries sigma and sigma_b is empty; explicit rows leave both empty.
inline void write_verdicts_csv(std::ostream& os, const std::vector<VerdictRow>& rows) {
  const auto old = os.precision(17);
  os << "scheme,sigma_a,sigma_b,tau,lemma1,bounded\n";
  for (const auto& r : rows) {
    os << to_string(r.c.scheme) << ',';
    if (is_sigma_scheme(r.c.scheme)) {
      os << r.weights.sigma << ',';
    } else if (is_split_scheme(r.c.scheme)) {
      os << r.weights.sigma_a << ',' << r.weights.sigma_b;
    } else {
      os << ',';
    }
    os << ',' << r.c.tau << ',' << (r.lemma1 ? (*r.lemma1 ? "pass" : "fail") : "skipped") << ','
       << (r.bounded ? "yes" : "no") << '\n';
  }
  os.precision(old);
}

/// Spectral solution snapshots at the given times, one field CSV each.
inline std::vector<std::string> write_oracle_snapshots(const ExperimentConfig& cfg, const std::vector<double>& times) {
  const Field w0 = initial_field(cfg);
  const SpectralExpansion exp = expand(w0, cfg.coeffs, required_form(cfg.scheme));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::string name = "exact_" + std::to_string(i) + ".csv";
    auto out = detail::open_output(cfg.output_dir, name);
    out << "# t = " << std::setprecision(17) << times[i] << '\n';
    write_field_csv(out, exact_solution(exp, times[i]));
    names.push_back(name);
  }
  return names;
}

}  // namespace opdiff
