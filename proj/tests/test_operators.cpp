#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "opdiff/operators.hpp"
#include "opdiff/plate.hpp"
#include "support/reference.hpp"

using namespace opdiff;

namespace {

double max_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }

constexpr double kLambda11 = 18.745166004060934;  // 2*64*sin^2(pi/8)

}  // namespace

TEST(Laplacian, ZeroMapsToZero) {
  const GridSpec g = GridSpec::unit_square(4);
  EXPECT_EQ(laplacian(g)(Field(g)).max_abs(), 0.0);
  EXPECT_EQ(laplacian_directional(g, 1)(Field(g)).max_abs(), 0.0);
}

TEST(Laplacian, LowestModeEigenvalue) {
  const GridSpec g = GridSpec::unit_square(4);
  const Field psi = ref::mode(g, 1, 1);
  EXPECT_NEAR(2 * 64 * std::pow(std::sin(std::numbers::pi / 8), 2), kLambda11, 1e-12);
  EXPECT_LT(max_diff(laplacian(g)(psi), kLambda11 * psi), 1e-12);
}

TEST(Laplacian, EveryModeMatchesClosedForm) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  for (int k1 = 1; k1 <= 3; ++k1)
    for (int k2 = 1; k2 <= 3; ++k2) {
      const Field psi = ref::mode(g, k1, k2);
      const double lam = ref::mode_data(g, k1, k2).lambda();
      EXPECT_LT(max_diff(a(psi), lam * psi), 1e-10) << k1 << "," << k2;
    }
}

TEST(Laplacian, MatchesDenseAssemblyOnRectangle) {
  const GridSpec g(1.5, 0.75, 6, 5);
  const Eigen::MatrixXd dense = ref::dense_a(g);
  const Field u = ref::random_field(g);
  const Field expect = ref::to_field(g, dense * ref::to_vector(u));
  EXPECT_LT(max_diff(laplacian(g)(u), expect), 1e-10 * expect.max_abs());
}

TEST(Laplacian, SelfAdjointAndPositive) {
  const GridSpec g(1.0, 2.0, 7, 6);
  const LinearMap a = laplacian(g);
  const Field u = ref::random_field(g, 3);
  const Field v = ref::random_field(g, 4);
  EXPECT_NEAR(inner_product(a(u), v), inner_product(u, a(v)), 1e-10 * std::abs(inner_product(a(u), v)));
  EXPECT_GT(inner_product(a(u), u), 0.0);
  EXPECT_EQ(a.adjoint().descriptor(), "A*");
}

TEST(Laplacian, SmallestEigenvalueBound) {
  for (const GridSpec& g : {GridSpec::unit_square(4), GridSpec(2.0, 1.0, 8, 5), GridSpec(0.5, 3.0, 3, 9)}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ref::dense_a(g));
    EXPECT_GE(es.eigenvalues().minCoeff(), 8.0 * (1 / (g.l1() * g.l1()) + 1 / (g.l2() * g.l2())));
  }
}

TEST(Laplacian, DirectionalPartsAddUp) {
  const GridSpec g(1.0, 1.3, 6, 7);
  const Field u = ref::random_field(g);
  const Field sum12 = laplacian_directional(g, 1)(u) + laplacian_directional(g, 2)(u);
  EXPECT_LT(max_diff(sum12, laplacian(g)(u)), 1e-14 * laplacian(g)(u).max_abs() + 1e-14);
  const GridSpec sq = GridSpec::unit_square(4);
  const Field p = ref::mode(sq, 1, 1);
  EXPECT_LT(max_diff(laplacian_directional(sq, 1)(p), 64 * std::pow(std::sin(std::numbers::pi / 8), 2) * p),
            1e-12);
  EXPECT_THROW(laplacian_directional(sq, 3), Error);
}

TEST(Foundation, Coefficients) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  const Field u = ref::random_field(g);
  EXPECT_LT(max_diff(foundation_operator(a, {1.0, 0.0})(u), u), 1e-15);
  EXPECT_LT(max_diff(foundation_operator(a, {0.0, 1.0})(u), a(u)), 1e-15);
  const Field psi = ref::mode(g, 1, 1);
  EXPECT_LT(max_diff(foundation_operator(a, {1.0, 0.05})(psi), (1 + 0.05 * kLambda11) * psi), 1e-12);
  EXPECT_THROW(foundation_operator(a, {-1.0, 0.05}), InvalidCoefficientError);
  EXPECT_THROW(foundation_operator(a, {1.0, -0.05}), InvalidCoefficientError);
}

TEST(Compose, ProductsOnModes) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  for (int k = 1; k <= 3; ++k) {
    const Field psi = ref::mode(g, k, 4 - k);
    const double lam = ref::mode_data(g, k, 4 - k).lambda();
    EXPECT_LT(max_diff(compose({a, a})(psi), lam * lam * psi), 1e-9);
    EXPECT_LT(max_diff(compose({a, shifted_inverse(a, 0.1)})(psi), lam / (1 + 0.1 * lam) * psi), 1e-9);
  }
  const Field u = ref::random_field(g);
  EXPECT_LT(max_diff(compose({identity(g)})(u), u), 1e-15);
}

TEST(Compose, DescriptorsAndAdjoint) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  const LinearMap ata = compose({a.adjoint(), a});
  EXPECT_EQ(ata.descriptor(), "A*·A");
  EXPECT_EQ(ata.adjoint().descriptor(), "A*·A");
  EXPECT_EQ(sum({ata, foundation_operator(a, {})}).descriptor(), "A*·A + B");
  EXPECT_EQ(shifted(a, 0.5).descriptor(), "I + 0.5·A");
  EXPECT_EQ(shifted_inverse(a, 0.5).descriptor(), "(I + 0.5·A)^-1");
}

TEST(ShiftedInverse, ZeroShiftIsIdentity) {
  const GridSpec g = GridSpec::unit_square(5);
  const Field u = ref::random_field(g);
  EXPECT_LT(max_diff(shifted_inverse(laplacian(g), 0.0)(u), u), 1e-15);
  EXPECT_THROW(shifted_inverse(laplacian(g), -1.0), InvalidCoefficientError);
}

TEST(ShiftedInverse, ModeAndResidual) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  const Field psi = ref::mode(g, 1, 1);
  EXPECT_LT(max_diff(shifted_inverse(a, 0.1)(psi), 1 / (1 + 0.1 * kLambda11) * psi), 1e-10);
  const Field u = ref::random_field(GridSpec::unit_square(9));
  const LinearMap a9 = laplacian(u.grid());
  const Field y = shifted_inverse(a9, 1.0)(u);
  EXPECT_LE(norm(shifted(a9, 1.0)(y) - u) / norm(u), kDefaultSolverTol);
}

TEST(RegularizedProduct, ModeFormula) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  const double sa = std::sqrt(0.5);
  const double tau = 0.1;
  const LinearMap rp = regularized_product(a, sa, tau);
  for (int k1 = 1; k1 <= 3; ++k1)
    for (int k2 = 1; k2 <= 3; ++k2) {
      const double lam = ref::mode_data(g, k1, k2).lambda();
      const Field psi = ref::mode(g, k1, k2);
      const double expect = lam * lam / std::pow(1 + sa * tau * lam, 2);
      EXPECT_LT(max_diff(rp(psi), expect * psi), 10 * kDefaultSolverTol * std::max(1.0, expect));
    }
}

TEST(RegularizedProduct, VanishingStepRecoversProduct) {
  const GridSpec g = GridSpec::unit_square(4);
  const LinearMap a = laplacian(g);
  const Field psi = ref::mode(g, 2, 1);
  const double lam = ref::mode_data(g, 2, 1).lambda();
  EXPECT_LT(max_diff(regularized_product(a, std::sqrt(0.5), 0.0)(psi), lam * lam * psi), 1e-9);
  EXPECT_LT(max_diff(regularized_product(a, std::sqrt(0.5), 1e-9)(psi), lam * lam * psi), 1e-3);
}

TEST(RegularizedProduct, SelfAdjointOnRandomFields) {
  const GridSpec g(1.0, 1.4, 6, 7);
  const LinearMap rp = regularized_product(laplacian(g), 0.8, 0.05, 1e-13);
  const Field u = ref::random_field(g, 5);
  const Field v = ref::random_field(g, 6);
  const double lhs = inner_product(rp(u), v);
  EXPECT_NEAR(lhs, inner_product(u, rp(v)), 1e-9 * std::abs(lhs));
  EXPECT_GT(inner_product(rp(u), u), 0.0);
}

TEST(RegularizedSumProduct, SinglePartMatchesProduct) {
  const GridSpec g = GridSpec::unit_square(6);
  const LinearMap a = laplacian(g);
  const Field u = ref::random_field(g);
  const Field one = regularized_sum_product({a}, 0.9, 0.02)(u);
  const Field ref_v = regularized_product(a, 0.9, 0.02)(u);
  EXPECT_LT(max_diff(one, ref_v), 10 * kDefaultSolverTol * ref_v.max_abs());
}

TEST(RegularizedSumProduct, DirectionalModeFormula) {
  const GridSpec g = GridSpec::unit_square(4);
  const std::vector<LinearMap> parts{laplacian_directional(g, 1), laplacian_directional(g, 2)};
  const double c = std::sqrt(2.0) * 0.1;
  const LinearMap m = regularized_sum_product(parts, std::sqrt(2.0), 0.1);
  for (int k1 = 1; k1 <= 3; ++k1)
    for (int k2 = 1; k2 <= 3; ++k2) {
      const auto md = ref::mode_data(g, k1, k2);
      const double f = md.lambda1 / (1 + c * md.lambda1) + md.lambda2 / (1 + c * md.lambda2);
      const Field psi = ref::mode(g, k1, k2);
      EXPECT_LT(max_diff(m(psi), f * f * psi), 1e-8 * f * f);
    }
  EXPECT_EQ(m(Field(g)).max_abs(), 0.0);
}

TEST(RegularizedSplitProduct, DirectionalModeFormula) {
  const GridSpec g = GridSpec::unit_square(4);
  const std::vector<LinearMap> parts{laplacian_directional(g, 1), laplacian_directional(g, 2)};
  const double c = 0.1;
  const LinearMap m = regularized_split_product(parts, 1.0, 0.1);
  const auto md = ref::mode_data(g, 1, 3);
  const double expect =
      std::pow(md.lambda1 / (1 + c * md.lambda1), 2) + std::pow(md.lambda2 / (1 + c * md.lambda2), 2);
  const Field psi = ref::mode(g, 1, 3);
  EXPECT_LT(max_diff(m(psi), expect * psi), 1e-8 * expect);
}

TEST(PlateOperators, BPartsAndForms) {
  const GridSpec g = GridSpec::unit_square(5);
  const PlateOperators ops = make_plate_operators(g, {});
  EXPECT_EQ(ops.b_parts.size(), 2u);
  EXPECT_EQ(make_plate_operators(g, {1.0, 0.0}).b_parts.size(), 1u);
  EXPECT_EQ(make_plate_operators(g, {0.0, 0.0}).b_parts.front().descriptor(), "0");
  EXPECT_EQ(ops.q.descriptor(), "A*·A + B");
  const PlateOperators dir = make_plate_operators(g, {}, ProblemForm::directional);
  const auto md = ref::mode_data(g, 2, 3);
  const Field psi = ref::mode(g, 2, 3);
  const double r = ref::problem_r(md, 1.0, 0.05, true);
  EXPECT_LT(max_diff(dir.q(psi), r * psi), 1e-9 * r);
}

TEST(PlateOperators, InitialDeflection) {
  const GridSpec g(2.0, 1.0, 8, 4);
  const Field w0 = plate_initial_deflection(g);
  const double s1 = 3.0 / 8.0;
  const double s2 = 0.5;
  EXPECT_DOUBLE_EQ(w0.at(3, 2), s1 * s1 * (1 - s1) * s2 * s2 * (1 - s2));
}
