// opdiff: run, sweep, stability, oracle and probe experiments for the plate benchmark.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "opdiff/opdiff.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitUnstable = 4;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<double> tau;
  std::optional<std::string> scheme;
  std::optional<double> sigma;
  std::optional<double> sigma_a;
  std::optional<double> sigma_b;
  std::optional<double> final_time;
  std::optional<int> grid;
  std::optional<int> p;
  std::optional<int> max_iter;
  bool full_scale = false;
  std::optional<std::string> initial;
  std::optional<int> k1;
  std::optional<int> k2;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "config file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--tau", o.tau, "time step");
  app.add_option("--scheme", o.scheme, "scheme name");
  app.add_option("--sigma", o.sigma, "weight sigma");
  app.add_option("--sigma-a", o.sigma_a, "weight sigma_A");
  app.add_option("--sigma-b", o.sigma_b, "weight sigma_B");
  app.add_option("--final-time", o.final_time, "final time T");
  app.add_option("--grid", o.grid, "N for an N x N grid")->check(CLI::PositiveNumber);
  app.add_option("--p", o.p, "splitting count (1 or 2)");
  app.add_option("--max-iter", o.max_iter, "CG iteration limit per solve")->check(CLI::PositiveNumber);
  app.add_flag("--full-scale", o.full_scale, "use the 256 x 256 grid");
  app.add_option("--initial", o.initial, "poly | eigenmode | file");
  app.add_option("--k1", o.k1, "eigenmode index k1");
  app.add_option("--k2", o.k2, "eigenmode index k2");
}

opdiff::ExperimentConfig resolve(const Overrides& o) {
  opdiff::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = opdiff::load_config(o.config);
  if (o.full_scale) cfg.n1 = cfg.n2 = 256;
  if (o.grid) cfg.n1 = cfg.n2 = *o.grid;
  if (o.scheme) cfg.scheme.scheme = opdiff::parse_scheme(*o.scheme);
  if (o.tau) cfg.scheme.tau = *o.tau;
  if (o.final_time) cfg.scheme.final_time = *o.final_time;
  if (o.sigma) cfg.scheme.sigma = *o.sigma;
  if (o.sigma_a) cfg.scheme.sigma_a = *o.sigma_a;
  if (o.sigma_b) cfg.scheme.sigma_b = *o.sigma_b;
  if (o.p) cfg.scheme.p = *o.p;
  if (o.max_iter) cfg.scheme.max_iter = *o.max_iter;
  if (o.initial) opdiff::apply_config_key(cfg, "experiment", "initial_condition", *o.initial);
  if (o.k1) cfg.initial.k1 = *o.k1;
  if (o.k2) cfg.initial.k2 = *o.k2;
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) out.push_back(opdiff::detail::parse_double(opdiff::detail::trim(item), "list"));
  if (out.empty()) throw opdiff::ConfigError("empty list '" + text + "'");
  return out;
}

void print_run(const opdiff::RunReport& rep) {
  std::cout << "scheme " << opdiff::to_string(rep.scheme.scheme) << ", tau " << rep.scheme.tau << ", levels "
            << rep.rows.size() << '\n'
            << "max eps_2 " << rep.max_eps_2() << ", max eps_inf " << rep.max_eps_inf() << '\n';
  if (rep.energy.size() > 1) {
    std::cout << "energy drift " << opdiff::max_relative_drift(rep.energy) << '\n';
  }
  if (rep.tau_0) std::cout << "tau_0 " << *rep.tau_0 << '\n';
  std::cout << "cg iterations " << rep.cg_iterations << " in " << rep.solves << " solves, " << rep.wall_seconds
            << " s\n";
  if (rep.unstable) std::cout << "unstable at level " << *rep.unstable_level << '\n';
}

int run_status(const opdiff::RunReport& rep) {
  if (rep.unstable && rep.expected_stable) {
    std::cerr << "error: instability in a run expected to be stable\n";
    return kExitUnstable;
  }
  return kExitOk;
}

std::ofstream open_in(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name);
  if (!out) throw opdiff::ConfigError("cannot write " + name + " in '" + dir + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-level operator-difference schemes for the plate-on-foundation problem"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, stab_o, oracle_o, probe_o;

  auto* run = app.add_subcommand("run", "one experiment; writes errors.csv and energy.csv");
  add_common(*run, run_o);

  auto* sweep = app.add_subcommand("sweep", "convergence sweep over tau; writes sweep.csv");
  add_common(*sweep, sweep_o);
  std::string taus = "0.01,0.005,0.0025";
  sweep->add_option("--taus", taus, "comma-separated tau values")->capture_default_str();

  auto* stab = app.add_subcommand("stability", "stability-condition and boundedness verdicts; writes verdicts.csv");
  add_common(*stab, stab_o);
  std::string factors = "1,10";
  std::string schemes;
  int stab_steps = 1000;
  stab->add_option("--tau-factors", factors, "tau values as multiples of the explicit tau_0")
      ->capture_default_str();
  stab->add_option("--schemes", schemes, "comma-separated schemes (default: all)");
  stab->add_option("--steps", stab_steps, "steps per trajectory")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "exact solution snapshots; writes exact_<i>.csv");
  add_common(*oracle, oracle_o);
  std::string times = "0,0.25,0.5,0.75,1";
  oracle->add_option("--times", times, "comma-separated output times")->capture_default_str();

  auto* probe = app.add_subcommand("probe", "deflection histories at points; writes probe.csv");
  add_common(*probe, probe_o);
  std::vector<std::string> points;
  probe->add_option("--point", points, "probe point \"x1 x2\" (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      const auto rep = opdiff::run_experiment(resolve(run_o));
      print_run(rep);
      return run_status(rep);
    }
    if (*sweep) {
      const auto cfg = resolve(sweep_o);
      const auto rep = opdiff::run_convergence_sweep(cfg, parse_list(taus));
      opdiff::write_sweep_csv(std::cout, rep);
      if (!cfg.output_dir.empty()) {
        auto out = open_in(cfg.output_dir, "sweep.csv");
        opdiff::write_sweep_csv(out, rep);
      }
      return kExitOk;
    }
    if (*stab) {
      const auto cfg = resolve(stab_o);
      const auto ops = opdiff::make_plate_operators(cfg.grid(), cfg.coeffs);
      const double tau0 = opdiff::explicit_threshold(ops.q);
      std::vector<opdiff::Scheme> list;
      if (schemes.empty()) {
        list.assign(std::begin(opdiff::kAllSchemes), std::end(opdiff::kAllSchemes));
      } else {
        std::istringstream is(schemes);
        std::string name;
        while (std::getline(is, name, ',')) list.push_back(opdiff::parse_scheme(opdiff::detail::trim(name)));
      }
      std::vector<opdiff::StabilityCase> cases;
      for (double f : parse_list(factors)) {
        for (auto s : list) {
          opdiff::StabilityCase c;
          c.scheme = s;
          c.sigma = cfg.scheme.sigma;
          c.sigma_a = cfg.scheme.sigma_a;
          c.sigma_b = cfg.scheme.sigma_b;
          c.p = cfg.scheme.p;
          c.tau = f * tau0;
          cases.push_back(c);
        }
      }
      const auto rows = opdiff::run_stability_matrix(cfg, cases, stab_steps);
      std::cout << "tau_0 " << tau0 << '\n';
      opdiff::write_verdicts_csv(std::cout, rows);
      if (!cfg.output_dir.empty()) {
        auto out = open_in(cfg.output_dir, "verdicts.csv");
        opdiff::write_verdicts_csv(out, rows);
      }
      return kExitOk;
    }
    if (*oracle) {
      auto cfg = resolve(oracle_o);
      if (cfg.output_dir.empty()) throw opdiff::ConfigError("oracle needs --out or output_dir");
      cfg.validate();
      for (const auto& name : opdiff::write_oracle_snapshots(cfg, parse_list(times))) {
        std::cout << (std::filesystem::path(cfg.output_dir) / name).string() << '\n';
      }
      return kExitOk;
    }
    if (*probe) {
      auto cfg = resolve(probe_o);
      if (!points.empty()) {
        std::string joined;
        for (const auto& p : points) joined += (joined.empty() ? "" : ";") + p;
        cfg.probes = opdiff::detail::parse_probes(joined);
      }
      if (cfg.probes.empty()) cfg.probes.push_back({0.5 * cfg.l1, 0.5 * cfg.l2});
      if (cfg.output_dir.empty()) throw opdiff::ConfigError("probe needs --out or output_dir");
      const auto rep = opdiff::run_experiment(cfg);
      for (std::size_t i = 0; i < rep.probe_nodes.size(); ++i) {
        const auto& n = rep.probe_nodes[i];
        std::cout << "probe " << i << " -> node (" << n.i1 << ", " << n.i2 << ")\n";
      }
      print_run(rep);
      return run_status(rep);
    }
  } catch (const opdiff::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const opdiff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
