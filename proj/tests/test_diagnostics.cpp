#include <gtest/gtest.h>

#include <sstream>

#include "opdiff/diagnostics.hpp"
#include "opdiff/plate.hpp"
#include "opdiff/stability.hpp"
#include "opdiff/steppers.hpp"
#include "support/reference.hpp"

using namespace opdiff;

TEST(Energy, ZeroPair) {
  const GridSpec g = GridSpec::unit_square(4);
  const PlateOperators ops = make_plate_operators(g, {});
  const EnergyRecord r = energy(Field(g), Field(g), identity(g), ops.q, 0.1);
  EXPECT_EQ(r.total, 0.0);
}

TEST(Energy, SingleNodeWeighted) {
  const GridSpec g = GridSpec::unit_square(2);
  const PlateOperators ops = make_plate_operators(g, {});
  Field u0(g);
  u0.fill(1.0);
  SchemeConfig c;
  c.tau = 0.1;
  const Stepper st(ops, c);
  const ThreeLevelState s = st.initialize(u0);
  const EnergyOperators eo = st.energy_operators();
  const EnergyRecord r = energy(s.u_prev, s.u_curr, eo.g, eo.d, 0.1);
  // Scalar values times the quadrature weight h1 h2 = 1/4 of the grid inner product.
  EXPECT_NEAR(r.kinetic, 0.25 * 31.71131483202379, 1e-7);
  EXPECT_NEAR(r.potential, 0.25 * 133.06354310823448, 1e-7);
  EXPECT_NEAR(r.total, 0.25 * 164.77485794025827, 1e-7);
}

TEST(Energy, ConservedByEveryStableScheme) {
  const GridSpec g(1.0, 1.2, 7, 6);
  const Field w0 = ref::random_field(g, 21);
  for (Scheme sc : kAllSchemes) {
    SchemeConfig c;
    c.scheme = sc;
    c.solver_tol = 1e-13;
    const PlateOperators ops = make_plate_operators(g, {}, required_form(c));
    c.tau = sc == Scheme::explicit_scheme ? 0.9 * explicit_threshold(ops.q) : 0.01;
    c.final_time = 50 * c.tau;
    const Stepper st(ops, c);
    const EnergyOperators eo = st.energy_operators();
    ThreeLevelState s = st.initialize(w0);
    std::vector<EnergyRecord> recs{energy(s.u_prev, s.u_curr, eo.g, eo.d, c.tau, 0)};
    for (int n = 1; n < 50; ++n) {
      s = st.step(s);
      recs.push_back(energy(s.u_prev, s.u_curr, eo.g, eo.d, c.tau, n));
    }
    EXPECT_LT(max_relative_drift(recs), 1e-8) << to_string(sc);
  }
}

TEST(Energy, EigenmodeRecordsMatchAcrossLevels) {
  const GridSpec g = GridSpec::unit_square(8);
  SchemeConfig c;
  c.tau = 0.01;
  const PlateOperators ops = make_plate_operators(g, {});
  const Stepper st(ops, c);
  const EnergyOperators eo = st.energy_operators();
  ThreeLevelState s = st.initialize(ref::mode(g, 2, 3));
  const EnergyRecord a = energy(s.u_prev, s.u_curr, eo.g, eo.d, c.tau, 0);
  s = st.step(s);
  const EnergyRecord b = energy(s.u_prev, s.u_curr, eo.g, eo.d, c.tau, 1);
  EXPECT_NEAR(a.total, b.total, 1e-8 * a.total);
}

TEST(Energy, IndefiniteFormSignalsViolation) {
  const GridSpec g = GridSpec::unit_square(6);
  const PlateOperators ops = make_plate_operators(g, {});
  const double tau = 1.5 * explicit_threshold(ops.q);
  const LinearMap gmap = shifted(ops.q, -0.25 * tau * tau);
  const Field hi = ref::mode(g, 5, 5);
  EXPECT_THROW(energy(Field(g), hi, gmap, ops.q, tau), StabilityViolationError);
  EXPECT_THROW(weighted_norm(hi, gmap), NotNonnegativeError);
}

TEST(EnergyCsv, HeaderAndRows) {
  std::vector<EnergyRecord> recs{{0, 1.0, 2.0, 3.0}, {1, 1.5, 1.5, 3.0}};
  std::ostringstream os;
  write_energy_csv(os, recs, 0.5);
  EXPECT_EQ(os.str(), "n,t,kinetic,potential,total\n0,0,1,2,3\n1,0.5,1.5,1.5,3\n");
  EXPECT_EQ(max_relative_drift(recs), 0.0);
  recs.push_back({2, 0, 0, 3.3});
  EXPECT_NEAR(max_relative_drift(recs), 0.1, 1e-15);
}

TEST(WeightedNorm, TrivialMaps) {
  const GridSpec g = GridSpec::unit_square(5);
  const Field u = ref::random_field(g);
  EXPECT_NEAR(weighted_norm(u, identity(g)), norm(u), 1e-15);
  EXPECT_EQ(weighted_norm(u, zero_map(g)), 0.0);
  const GridSpec g4 = GridSpec::unit_square(4);
  EXPECT_NEAR(weighted_norm(ref::mode(g4, 1, 1), laplacian(g4)), std::sqrt(18.745166004060934), 1e-10);
}
