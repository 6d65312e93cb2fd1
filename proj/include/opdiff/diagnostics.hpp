#pragma once

// Discrete energy of a three-level scheme in canonical form:
//   E^n = ||(u^{n+1} - u^n) / tau||_G^2 + ||(u^{n+1} + u^n) / 2||_D^2,
// which the scheme conserves exactly whenever G = C - tau^2/4 D >= 0.

#include <cmath>
#include <ostream>
#include <span>
#include <string>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"

namespace opdiff {

struct EnergyRecord {
  int n = 0;
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

class StabilityViolationError : public NotNonnegativeError {
 public:
  using NotNonnegativeError::NotNonnegativeError;
};

namespace detail {

inline double checked_form(const LinearMap& s, const Field& z, const char* what) {
  const Field sz = s(z);
  const double q = inner_product(sz, z);
  const double scale = norm(sz) * norm(z);
  if (q < -1e-10 * scale) {
    throw StabilityViolationError(std::string(what) + " form of " + s.descriptor() +
                                  " is negative: " + format_coefficient(q));
  }
  return q;
}

}  // namespace detail

/// Energy of the pair (u^n, u^{n+1}) with respect to G and D.
inline EnergyRecord energy(const Field& u_n, const Field& u_next, const LinearMap& g, const LinearMap& d,
                           double tau, int n = 0) {
  require_same_grid(u_n.grid(), u_next.grid(), "energy");
  Field rate = u_next;
  rate -= u_n;
  rate *= 1.0 / tau;
  Field mean = u_next;
  mean += u_n;
  mean *= 0.5;
  EnergyRecord rec;
  rec.n = n;
  rec.kinetic = detail::checked_form(g, rate, "kinetic");
  rec.potential = detail::checked_form(d, mean, "potential");
  rec.total = rec.kinetic + rec.potential;
  return rec;
}

/// `n,t,kinetic,potential,total` with t = n tau, 17 significant digits.
inline void write_energy_csv(std::ostream& os, std::span<const EnergyRecord> records, double tau) {
  const auto old = os.precision(17);
  os << "n,t,kinetic,potential,total\n";
  for (const auto& r : records) {
    os << r.n << ',' << r.n * tau << ',' << r.kinetic << ',' << r.potential << ',' << r.total << '\n';
  }
  os.precision(old);
}

/// Largest |E^n - E^0| / |E^0| over the records.
inline double max_relative_drift(std::span<const EnergyRecord> records) {
  if (records.empty()) return 0.0;
  const double ref = records.front().total;
  double worst = 0.0;
  for (const auto& r : records) {
    worst = std::max(worst, std::abs(r.total - ref) / std::max(std::abs(ref), 1e-300));
  }
  return worst;
}

}  // namespace opdiff
