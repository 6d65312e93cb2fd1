#include <gtest/gtest.h>

#include <cmath>

#include "opdiff/oracle.hpp"
#include "opdiff/plate.hpp"
#include "support/reference.hpp"

using namespace opdiff;

TEST(Eigenpair, SmallGrids) {
  EXPECT_NEAR(eigenpair(GridSpec::unit_square(4), 1, 1).lambda, 18.745166004060934, 1e-12);
  EXPECT_NEAR(eigenpair(GridSpec::unit_square(2), 1, 1).lambda, 16.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ref::dense_a(GridSpec::unit_square(4)));
  EXPECT_NEAR(eigenpair(GridSpec::unit_square(4), 1, 1).lambda, es.eigenvalues().minCoeff(), 1e-12);
}

TEST(Eigenpair, IsEigenvectorOfDenseLaplacian) {
  const GridSpec g(2.0, 0.7, 7, 5);
  const Eigen::MatrixXd a = ref::dense_a(g);
  for (int k1 = 1; k1 <= g.m1(); ++k1)
    for (int k2 = 1; k2 <= g.m2(); ++k2) {
      const Eigenpair e = eigenpair(g, k1, k2);
      const Eigen::VectorXd v = ref::to_vector(e.psi);
      EXPECT_LT((a * v - e.lambda * v).cwiseAbs().maxCoeff(), 1e-9 * e.lambda);
      EXPECT_NEAR(norm(e.psi), 1.0, 1e-12);
      EXPECT_LT((e.psi - ref::mode(g, k1, k2)).max_abs(), 1e-13);
    }
}

TEST(Eigenpair, ModeRange) {
  const GridSpec g = GridSpec::unit_square(4);
  EXPECT_THROW(eigenpair(g, 0, 1), ModeRangeError);
  EXPECT_THROW(eigenpair(g, 1, 4), ModeRangeError);
}

TEST(Expand, SingleModeAndZero) {
  const GridSpec g = GridSpec::unit_square(8);
  const SpectralExpansion e = expand(eigenpair(g, 1, 1).psi, {});
  for (int k1 = 1; k1 <= g.m1(); ++k1)
    for (int k2 = 1; k2 <= g.m2(); ++k2)
      EXPECT_NEAR(e.coefficient(k1, k2), (k1 == 1 && k2 == 1) ? 1.0 : 0.0, 1e-12);
  for (double c : expand(Field(g), {}).coefficients) EXPECT_EQ(c, 0.0);
}

TEST(Expand, ParsevalOnPlateData) {
  const GridSpec g = GridSpec::unit_square(16);
  const Field w0 = plate_initial_deflection(g);
  const SpectralExpansion e = expand(w0, {});
  double s = 0.0;
  for (double c : e.coefficients) s += c * c;
  EXPECT_NEAR(s, inner_product(w0, w0), 1e-10 * inner_product(w0, w0));
}

TEST(Expand, SeparableMatchesDirect) {
  const GridSpec g(1.0, 1.7, 9, 12);
  const Field w = ref::random_field(g);
  const auto a = detail::coefficients_direct(w);
  const auto b = detail::coefficients_separable(w);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Expand, FrequenciesPerForm) {
  const GridSpec g = GridSpec::unit_square(6);
  const auto md = ref::mode_data(g, 2, 5);
  EXPECT_NEAR(expand(Field(g), {}).frequency(2, 5), ref::problem_r(md, 1, 0.05, false), 1e-9);
  EXPECT_NEAR(expand(Field(g), {}, ProblemForm::directional).frequency(2, 5), ref::problem_r(md, 1, 0.05, true),
              1e-9);
}

TEST(ExactSolution, InitialTimeReproducesData) {
  for (const GridSpec& g : {GridSpec::unit_square(16), GridSpec(1.0, 2.0, 80, 70)}) {
    const Field w0 = plate_initial_deflection(g);
    const Field w = exact_solution(expand(w0, {}), 0.0);
    EXPECT_LT((w - w0).max_abs(), 1e-10 * w0.max_abs());
  }
}

TEST(ExactSolution, SingleModeIsCosine) {
  const GridSpec g = GridSpec::unit_square(8);
  const Eigenpair p = eigenpair(g, 1, 1);
  const SpectralExpansion e = expand(p.psi, {});
  const double r = 1.0 + 0.05 * p.lambda + p.lambda * p.lambda;
  for (double t : {0.0, 0.013, 0.5, 1.0}) {
    EXPECT_LT((exact_solution(e, t) - std::cos(std::sqrt(r) * t) * p.psi).max_abs(), 1e-12);
  }
  EXPECT_LT(exact_velocity(e, 0.0).max_abs(), 1e-15);
  EXPECT_THROW(exact_solution(e, -1.0), ConfigError);
}

TEST(ExactSolution, SpectralEnergyIsConstant) {
  const GridSpec g = GridSpec::unit_square(12);
  const PlateOperators ops = make_plate_operators(g, {});
  const SpectralExpansion e = expand(plate_initial_deflection(g), {});
  auto energy = [&](double t) {
    const Field w = exact_solution(e, t);
    const Field v = exact_velocity(e, t);
    return inner_product(v, v) + inner_product(ops.q(w), w);
  };
  const double e0 = energy(0.0);
  for (double t : {0.1, 0.37, 1.0}) EXPECT_NEAR(energy(t), e0, 1e-10 * e0);
}

TEST(ErrorNorms, KnownPerturbations) {
  const GridSpec g(2.0, 1.0, 5, 4);
  const Field w = ref::random_field(g);
  const ErrorNorms zero = error_norms(w, w);
  EXPECT_EQ(zero.max_abs, 0.0);
  EXPECT_EQ(zero.l2, 0.0);
  Field shift(g);
  shift.fill(0.3);
  const ErrorNorms c = error_norms(w + shift, w);
  EXPECT_NEAR(c.max_abs, 0.3, 1e-15);
  EXPECT_NEAR(c.l2, 0.3 * std::sqrt(2.0 * 1.0 * 4 * 3 / (5.0 * 4.0)), 1e-14);
  Field one = w;
  one.at(2, 3) += 1e-3;
  const ErrorNorms n = error_norms(one, w);
  EXPECT_NEAR(n.max_abs, 1e-3, 1e-15);
  EXPECT_NEAR(n.l2, 1e-3 * std::sqrt(g.cell()), 1e-15);
}

TEST(InitialData, MagnitudesOnFineGrid) {
  const Field w0 = plate_initial_deflection(GridSpec::unit_square(256));
  EXPECT_NEAR(w0.max_abs(), 0.021947370801544963, 1e-15);
  EXPECT_NEAR(norm(w0), 0.009523809516048587, 1e-15);
}
