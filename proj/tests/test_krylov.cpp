#include <gtest/gtest.h>

#include <thread>

#include "opdiff/krylov.hpp"
#include "opdiff/operators.hpp"
#include "support/reference.hpp"

using namespace opdiff;

TEST(Cg, IdentityInOneIteration) {
  const GridSpec g = GridSpec::unit_square(6);
  const Field u = ref::random_field(g);
  const CgResult r = cg_solve(identity(g), u, 1e-12);
  EXPECT_LE(r.report.iterations, 1);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT((r.solution - u).max_abs(), 1e-14);
}

TEST(Cg, ZeroRhs) {
  const GridSpec g = GridSpec::unit_square(6);
  const CgResult r = cg_solve(shifted(laplacian(g), 0.1), Field(g), 1e-10);
  EXPECT_EQ(r.report.iterations, 0);
  EXPECT_EQ(r.solution.max_abs(), 0.0);
}

TEST(Cg, ShiftedLaplacianOnMode) {
  const GridSpec g = GridSpec::unit_square(4);
  const Field psi = ref::mode(g, 1, 1);
  const CgResult r = cg_solve(shifted(laplacian(g), 0.1), psi, 1e-10);
  EXPECT_LT((r.solution - (1.0 / (1.0 + 0.1 * 18.745166004060934)) * psi).max_abs(), 1e-10);
}

TEST(Cg, TrueResidualMeetsTolerance) {
  const GridSpec g(1.0, 2.0, 17, 13);
  const LinearMap sys = shifted(compose({laplacian(g), laplacian(g)}), 1e-5);
  const Field b = ref::random_field(g, 9);
  const CgResult r = cg_solve(sys, b, 1e-10, 5000);
  EXPECT_LE(norm(sys(r.solution) - b) / norm(b), 1e-10);
  EXPECT_LE(r.report.final_relative_residual, 1e-10);
}

TEST(Cg, IterationLimitCarriesReport) {
  const GridSpec g = GridSpec::unit_square(16);
  const Field b = ref::random_field(g);
  try {
    cg_solve(shifted(laplacian(g), 10.0), b, 1e-14, 3);
    FAIL() << "expected IterationLimitError";
  } catch (const IterationLimitError& e) {
    EXPECT_EQ(e.report().iterations, 3);
    EXPECT_FALSE(e.report().converged);
    EXPECT_GT(e.report().final_relative_residual, 1e-14);
  }
}

TEST(Cg, BreakdownOnNanAndIndefinite) {
  const GridSpec g = GridSpec::unit_square(4);
  Field b = ref::random_field(g);
  b[0] = std::nan("");
  EXPECT_THROW(cg_solve(identity(g), b, 1e-10), NumericalBreakdownError);
  EXPECT_THROW(cg_solve(scaled(-1.0, identity(g)), ref::random_field(g), 1e-10), NumericalBreakdownError);
}

TEST(Cg, DefaultIterationCap) {
  EXPECT_EQ(default_max_iterations(100), 200);
  EXPECT_EQ(default_max_iterations(961), 410);
}

TEST(SolveLog, RecordsDescriptorsAndNests) {
  const GridSpec g = GridSpec::unit_square(5);
  const Field b = ref::random_field(g);
  SolveLog outer;
  cg_solve(shifted(laplacian(g), 0.1), b, 1e-10);
  {
    SolveLog inner;
    cg_solve(identity(g), b, 1e-10);
    ASSERT_EQ(inner.size(), 1u);
    EXPECT_EQ(inner.records()[0].system, "I");
  }
  ASSERT_EQ(outer.size(), 2u);
  EXPECT_EQ(outer.records()[0].system, "I + 0.1·A");
  EXPECT_GT(outer.total_iterations(), 1);
}

TEST(SolveLog, IsPerThread) {
  const GridSpec g = GridSpec::unit_square(5);
  SolveLog log;
  std::thread t([&] { cg_solve(identity(g), ref::random_field(g), 1e-10); });
  t.join();
  EXPECT_EQ(log.size(), 0u);
}
