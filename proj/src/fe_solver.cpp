// Within-transformation solver. The demeaning kernel is data parallel over
// groups; each group's accumulation is sequential, so results are identical
// for any thread count.

#include "didlab/fe_solver.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace didlab {

FactorIndex make_factor(const std::vector<std::int32_t>& ids) {
  FactorIndex f;
  f.group = ids;
  f.n_groups = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  f.offsets.assign(f.n_groups + 1, 0);
  for (auto id : ids) {
    if (id < 0) fail(errc::bad_input, "negative factor id");
    ++f.offsets[id + 1];
  }
  for (int g = 0; g < f.n_groups; ++g) f.offsets[g + 1] += f.offsets[g];
  f.rows.resize(ids.size());
  std::vector<std::int32_t> cursor(f.offsets.begin(), f.offsets.end() - 1);
  for (std::int32_t r = 0; r < static_cast<std::int32_t>(ids.size()); ++r)
    f.rows[cursor[ids[r]]++] = r;
  return f;
}

namespace {

// One projection step for one factor: subtract weighted group means from every
// column. Returns the largest |mean| applied.
template <bool Parallel>
double project_factor(const FactorIndex& f, Eigen::MatrixXd& cols, const Eigen::VectorXd& w) {
  const int ncol = static_cast<int>(cols.cols());
  double worst = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : worst) schedule(static) if (Parallel)
#endif
  for (int g = 0; g < f.n_groups; ++g) {
    const std::int32_t lo = f.offsets[g], hi = f.offsets[g + 1];
    if (lo == hi) continue;
    double wsum = 0.0;
    if (w.size() > 0) {
      for (std::int32_t k = lo; k < hi; ++k) wsum += w[f.rows[k]];
    } else {
      wsum = static_cast<double>(hi - lo);
    }
    for (int c = 0; c < ncol; ++c) {
      double s = 0.0;
      if (w.size() > 0) {
        for (std::int32_t k = lo; k < hi; ++k) s += w[f.rows[k]] * cols(f.rows[k], c);
      } else {
        for (std::int32_t k = lo; k < hi; ++k) s += cols(f.rows[k], c);
      }
      const double mean = s / wsum;
      for (std::int32_t k = lo; k < hi; ++k) cols(f.rows[k], c) -= mean;
      worst = std::max(worst, std::abs(mean));
    }
  }
  return worst;
}

int demean_impl(const std::vector<FactorIndex>& factors, Eigen::MatrixXd& cols,
                const Eigen::VectorXd& w, const AbsorbOptions& opts, bool parallel) {
  if (factors.empty()) return 0;
  for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
    double worst = 0.0;
    for (const auto& f : factors) {
      const double m = parallel ? project_factor<true>(f, cols, w)
                                : project_factor<false>(f, cols, w);
      worst = std::max(worst, m);
    }
    if (worst < opts.tol) return sweep;
  }
  fail(errc::no_convergence,
       "demeaning did not reach tol " + std::to_string(opts.tol) + " in " +
           std::to_string(opts.max_iter) + " sweeps");
}

}  // namespace

int demean_within(const std::vector<FactorIndex>& factors, Eigen::MatrixXd& cols,
                  const Eigen::VectorXd& w, const AbsorbOptions& opts) {
  return demean_impl(factors, cols, w, opts, opts.parallel);
}

int demean_within_serial(const std::vector<FactorIndex>& factors, Eigen::MatrixXd& cols,
                         const Eigen::VectorXd& w, const AbsorbOptions& opts) {
  return demean_impl(factors, cols, w, opts, false);
}

Eigen::VectorXd wls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w) {
  Eigen::MatrixXd Xw = X;
  Eigen::VectorXd yw = y;
  if (w.size() > 0) {
    const Eigen::VectorXd sw = w.array().sqrt();
    Xw.array().colwise() *= sw.array();
    yw.array() *= sw.array();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  qr.setThreshold(1e-9);
  if (qr.rank() < X.cols())
    fail(errc::collinear_design, "rank " + std::to_string(qr.rank()) + " < " +
                                     std::to_string(X.cols()) + " regressors");
  return qr.solve(yw);
}

Eigen::VectorXd absorb_and_solve(const RegressionProblem& problem, const AbsorbOptions& opts) {
  const auto n = problem.y.size();
  if (problem.X.rows() != n) fail(errc::bad_input, "X rows != y length");
  if (!problem.y.allFinite() || !problem.X.allFinite())
    fail(errc::non_finite_input, "regression inputs must be finite");

  std::vector<FactorIndex> factors;
  factors.reserve(problem.absorbed.size());
  for (const auto& ids : problem.absorbed) {
    if (static_cast<Eigen::Index>(ids.size()) != n)
      fail(errc::bad_input, "factor length != y length");
    factors.push_back(make_factor(ids));
  }

  Eigen::MatrixXd cols(n, problem.X.cols() + 1);
  cols.col(0) = problem.y;
  cols.rightCols(problem.X.cols()) = problem.X;
  demean_within(factors, cols, problem.w, opts);

  return wls_solve(cols.rightCols(problem.X.cols()), cols.col(0), problem.w);
}

}  // namespace didlab
