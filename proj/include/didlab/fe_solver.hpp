#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "didlab/errors.hpp"

namespace didlab {

// Grouping of observation rows by one categorical factor, CSR layout so the
// demeaning kernel can parallelize over groups with deterministic sums.
struct FactorIndex {
  int n_groups = 0;
  std::vector<std::int32_t> group;    // per row
  std::vector<std::int32_t> offsets;  // n_groups + 1
  std::vector<std::int32_t> rows;     // row ids grouped
};

FactorIndex make_factor(const std::vector<std::int32_t>& ids);

struct AbsorbOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  bool parallel = true;
};

// Alternating projections: subtract weighted group means per factor until the
// largest applied mean is below tol. cols holds y and the regressors; w may be
// empty (unit weights). Returns the number of sweeps.
int demean_within(const std::vector<FactorIndex>& factors, Eigen::MatrixXd& cols,
                  const Eigen::VectorXd& w, const AbsorbOptions& opts = {});

// Serial reference for the kernel above; kept for testing and benchmarks.
int demean_within_serial(const std::vector<FactorIndex>& factors, Eigen::MatrixXd& cols,
                         const Eigen::VectorXd& w, const AbsorbOptions& opts = {});

struct RegressionProblem {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::vector<std::int32_t>> absorbed;  // factor ids per observation
  Eigen::VectorXd w;                                // optional weights
};

// Frisch-Waugh-Lovell: demean y and X by the absorbed factors, then OLS.
// Throws CollinearDesign when the demeaned design is rank deficient.
Eigen::VectorXd absorb_and_solve(const RegressionProblem& problem,
                                 const AbsorbOptions& opts = {});

// Plain weighted least squares with a rank check (shared by small cell-level
// regressions).
Eigen::VectorXd wls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w);

}  // namespace didlab
