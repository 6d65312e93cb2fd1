#pragma once

// Unpreconditioned conjugate gradients for the SPD systems (I + mu L) used by
// every implicit and regularized scheme.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opdiff/error.hpp"
#include "opdiff/lattice.hpp"
#include "opdiff/linear_map.hpp"

namespace opdiff {

struct SolveReport {
  int iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
};

class IterationLimitError : public SolverError {
 public:
  IterationLimitError(const std::string& what, SolveReport report)
      : SolverError(what), report_(report) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

class NumericalBreakdownError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct SolveRecord {
  std::string system;  // descriptor of the operator that was inverted
  SolveReport report;
};

/// Collects a record of every cg_solve issued on the constructing thread
/// while it is alive. Logs nest: an outer log also sees the solves recorded
/// by inner ones.
class SolveLog {
 public:
  SolveLog() : parent_(current()) { current() = this; }
  ~SolveLog() { current() = parent_; }
  SolveLog(const SolveLog&) = delete;
  SolveLog& operator=(const SolveLog&) = delete;

  const std::vector<SolveRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  void clear() { records_.clear(); }

  long total_iterations() const {
    long n = 0;
    for (const auto& r : records_) n += r.report.iterations;
    return n;
  }

  static void record(const SolveRecord& rec) {
    for (SolveLog* log = current(); log != nullptr; log = log->parent_) log->records_.push_back(rec);
  }

 private:
  static SolveLog*& current() {
    thread_local SolveLog* head = nullptr;
    return head;
  }

  SolveLog* parent_;
  std::vector<SolveRecord> records_;
};

/// 10 sqrt(n) + 100
inline int default_max_iterations(std::size_t n) {
  return static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 100;
}

struct CgResult {
  Field solution;
  SolveReport report;
};

/// Solves L y = rhs from a zero initial guess until ||L y - rhs|| <= tol ||rhs||.
///
/// Convergence is confirmed on the true residual; if the recursive residual
/// has drifted, iteration restarts from the current iterate. Throws
/// IterationLimitError past max_iter and NumericalBreakdownError on
/// non-finite values or loss of positive curvature.
inline CgResult cg_solve(const LinearMap& system, const Field& rhs, double tol,
                         std::optional<int> max_iter = std::nullopt) {
  require_same_grid(system.grid(), rhs.grid(), "cg_solve");
  if (!(tol > 0.0)) throw SolverError("cg_solve: tolerance must be positive");
  const int limit = max_iter.value_or(default_max_iterations(rhs.size()));

  Field x(rhs.grid());
  SolveReport report;
  const double bnorm = norm(rhs);
  if (!std::isfinite(bnorm)) {
    throw NumericalBreakdownError("cg_solve(" + system.descriptor() + "): non-finite right-hand side");
  }
  if (bnorm == 0.0) {
    report.converged = true;
    SolveLog::record({system.descriptor(), report});
    return {std::move(x), report};
  }

  Field r = rhs;
  Field p = r;
  Field ap(rhs.grid());
  double rr = inner_product(r, r);

  while (report.iterations < limit) {
    system.apply(p, ap);
    const double pap = inner_product(p, ap);
    if (!std::isfinite(pap) || !(pap > 0.0)) {
      throw NumericalBreakdownError("cg_solve(" + system.descriptor() +
                                    "): non-positive or non-finite curvature at iteration " +
                                    std::to_string(report.iterations));
    }
    const double alpha = rr / pap;
    x.axpy(alpha, p);
    r.axpy(-alpha, ap);
    ++report.iterations;
    double rr_next = inner_product(r, r);
    if (!std::isfinite(rr_next)) {
      throw NumericalBreakdownError("cg_solve(" + system.descriptor() + "): non-finite residual");
    }
    report.final_relative_residual = std::sqrt(rr_next) / bnorm;
    if (report.final_relative_residual <= tol) {
      Field true_r = rhs;
      true_r -= system(x);
      const double rel = norm(true_r) / bnorm;
      report.final_relative_residual = rel;
      if (rel <= tol) {
        report.converged = true;
        SolveLog::record({system.descriptor(), report});
        return {std::move(x), report};
      }
      r = std::move(true_r);
      p = r;
      rr = inner_product(r, r);
      continue;
    }
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
  }
  SolveLog::record({system.descriptor(), report});
  throw IterationLimitError("cg_solve(" + system.descriptor() + "): no convergence in " +
                                std::to_string(limit) + " iterations, relative residual " +
                                detail::format_coefficient(report.final_relative_residual),
                            report);
}

}  // namespace opdiff
