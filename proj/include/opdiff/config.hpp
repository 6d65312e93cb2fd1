#pragma once

// Experiment configuration and its key-value file format:
//
//   [grid_spec]           l1, l2, n1, n2
//   [plate_coefficients]  gamma1, gamma2
//   [scheme_config]       scheme, tau, final_time, sigma, sigma_a, sigma_b, p,
//                         solver_tol, max_iter
//   [experiment]          initial_condition (poly | eigenmode | file),
//                         mode_k1, mode_k2, initial_file,
//                         probe_points ("x1 x2; x1 x2; ..."), output_dir,
//                         energy_stride
//
// Lines starting with '#' or ';' are comments. Unknown sections or keys are errors.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/operators.hpp"
#include "opdiff/steppers.hpp"

namespace opdiff {

enum class InitialKind { poly, eigenmode, file };

inline std::string_view to_string(InitialKind k) {
  switch (k) {
    case InitialKind::poly: return "poly";
    case InitialKind::eigenmode: return "eigenmode";
    case InitialKind::file: return "file";
  }
  return "?";
}

struct InitialCondition {
  InitialKind kind = InitialKind::poly;
  int k1 = 1;
  int k2 = 1;
  std::string file;
};

struct ProbePoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct ExperimentConfig {
  double l1 = 1.0;
  double l2 = 1.0;
  int n1 = 32;
  int n2 = 32;
  PlateCoefficients coeffs;
  SchemeConfig scheme;
  InitialCondition initial;
  std::vector<ProbePoint> probes;
  std::string output_dir;  // empty: no files written
  int energy_stride = 1;   // 0 disables energy tracking

  GridSpec grid() const { return {l1, l2, n1, n2}; }

  void validate() const {
    const GridSpec g = grid();
    coeffs.validate();
    scheme.validate();
    (void)scheme.steps();
    if (energy_stride < 0) throw ConfigError("energy_stride must be >= 0");
    for (const auto& p : probes) {
      if (!(p.x1 > 0.0 && p.x1 < g.l1() && p.x2 > 0.0 && p.x2 < g.l2())) {
        throw ConfigError("probe point lies outside the open rectangle");
      }
    }
    if (initial.kind == InitialKind::eigenmode &&
        (initial.k1 < 1 || initial.k1 > g.m1() || initial.k2 < 1 || initial.k2 > g.m2())) {
      throw ConfigError("eigenmode initial condition: mode index out of range");
    }
    if (initial.kind == InitialKind::file && initial.file.empty()) {
      throw ConfigError("initial_condition = file needs initial_file");
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_double(const std::string& v, const std::string& key) {
  std::istringstream is(v);
  double d = 0.0;
  is >> d;
  if (!is || !(is >> std::ws).eof()) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return d;
}

inline int parse_int(const std::string& v, const std::string& key) {
  int i = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, i);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return i;
}

inline std::vector<ProbePoint> parse_probes(const std::string& v) {
  std::vector<ProbePoint> out;
  std::istringstream all(v);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (trim(item).empty()) continue;
    std::istringstream is(item);
    ProbePoint p;
    if (!(is >> p.x1 >> p.x2) || !(is >> std::ws).eof()) {
      throw ConfigError("probe_points: expected 'x1 x2' pairs separated by ';', got '" + item + "'");
    }
    out.push_back(p);
  }
  return out;
}

inline InitialKind parse_initial_kind(const std::string& v) {
  for (InitialKind k : {InitialKind::poly, InitialKind::eigenmode, InitialKind::file}) {
    if (to_string(k) == v) return k;
  }
  throw ConfigError("initial_condition must be poly, eigenmode or file, got '" + v + "'");
}

}  // namespace detail

/// Applies one `section.key = value` assignment. Throws ConfigError on unknown keys.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                             const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  const std::string where = section + "." + key;
  if (section == "grid_spec") {
    if (key == "l1") return void(cfg.l1 = parse_double(value, where));
    if (key == "l2") return void(cfg.l2 = parse_double(value, where));
    if (key == "n1") return void(cfg.n1 = parse_int(value, where));
    if (key == "n2") return void(cfg.n2 = parse_int(value, where));
  } else if (section == "plate_coefficients") {
    if (key == "gamma1") return void(cfg.coeffs.gamma1 = parse_double(value, where));
    if (key == "gamma2") return void(cfg.coeffs.gamma2 = parse_double(value, where));
  } else if (section == "scheme_config") {
    SchemeConfig& s = cfg.scheme;
    if (key == "scheme") return void(s.scheme = parse_scheme(value));
    if (key == "tau") return void(s.tau = parse_double(value, where));
    if (key == "final_time") return void(s.final_time = parse_double(value, where));
    if (key == "sigma") return void(s.sigma = parse_double(value, where));
    if (key == "sigma_a") return void(s.sigma_a = parse_double(value, where));
    if (key == "sigma_b") return void(s.sigma_b = parse_double(value, where));
    if (key == "p") return void(s.p = parse_int(value, where));
    if (key == "solver_tol") return void(s.solver_tol = parse_double(value, where));
    if (key == "max_iter") return void(s.max_iter = parse_int(value, where));
  } else if (section == "experiment") {
    if (key == "initial_condition") return void(cfg.initial.kind = detail::parse_initial_kind(value));
    if (key == "mode_k1") return void(cfg.initial.k1 = parse_int(value, where));
    if (key == "mode_k2") return void(cfg.initial.k2 = parse_int(value, where));
    if (key == "initial_file") return void(cfg.initial.file = value);
    if (key == "probe_points") return void(cfg.probes = detail::parse_probes(value));
    if (key == "output_dir") return void(cfg.output_dir = value);
    if (key == "energy_stride") return void(cfg.energy_stride = parse_int(value, where));
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
  throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

/// Parses a config stream on top of `base` (defaults when omitted).
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {}) {
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    try {
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError("malformed section header '" + t + "'");
        section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
        if (section != "grid_spec" && section != "plate_coefficients" && section != "scheme_config" &&
            section != "experiment") {
          throw ConfigError("unknown section [" + section + "]");
        }
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + t + "'");
      if (section.empty()) throw ConfigError("key outside of any section");
      apply_config_key(base, section, detail::trim(std::string_view(t).substr(0, eq)),
                       detail::trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

/// Writes `cfg` in the format parse_config reads back.
inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  const auto old = os.precision(17);
  os << "[grid_spec]\nl1 = " << cfg.l1 << "\nl2 = " << cfg.l2 << "\nn1 = " << cfg.n1 << "\nn2 = " << cfg.n2
     << "\n\n[plate_coefficients]\ngamma1 = " << cfg.coeffs.gamma1 << "\ngamma2 = " << cfg.coeffs.gamma2
     << "\n\n[scheme_config]\nscheme = " << to_string(cfg.scheme.scheme) << "\ntau = " << cfg.scheme.tau
     << "\nfinal_time = " << cfg.scheme.final_time << '\n';
  if (cfg.scheme.sigma) os << "sigma = " << *cfg.scheme.sigma << '\n';
  if (cfg.scheme.sigma_a) os << "sigma_a = " << *cfg.scheme.sigma_a << '\n';
  if (cfg.scheme.sigma_b) os << "sigma_b = " << *cfg.scheme.sigma_b << '\n';
  os << "p = " << cfg.scheme.p << "\nsolver_tol = " << cfg.scheme.solver_tol << '\n';
  if (cfg.scheme.max_iter) os << "max_iter = " << *cfg.scheme.max_iter << '\n';
  os << "\n[experiment]\ninitial_condition = " << to_string(cfg.initial.kind) << '\n';
  if (cfg.initial.kind == InitialKind::eigenmode) {
    os << "mode_k1 = " << cfg.initial.k1 << "\nmode_k2 = " << cfg.initial.k2 << '\n';
  }
  if (cfg.initial.kind == InitialKind::file) os << "initial_file = " << cfg.initial.file << '\n';
  if (!cfg.probes.empty()) {
    os << "probe_points = ";
    for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
      os << (i ? "; " : "") << cfg.probes[i].x1 << ' ' << cfg.probes[i].x2;
    }
    os << '\n';
  }
  if (!cfg.output_dir.empty()) os << "output_dir = " << cfg.output_dir << '\n';
  os << "energy_stride = " << cfg.energy_stride << '\n';
  os.precision(old);
}

}  // namespace opdiff
