// Soft-impute with unpenalized two-way fixed effects: alternate (a) masked
// row/column mean updates and (b) singular-value soft-thresholding of the
// filled residual matrix. Matches the nuclear-norm objective cell for cell.

#include "didlab/softimpute.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace didlab {

namespace {

struct CellList {
  std::vector<std::int32_t> i, t;  // observed cells
  long long size() const { return static_cast<long long>(i.size()); }
};

CellList observed_cells(const ObsMask& obs) {
  CellList c;
  for (Eigen::Index ii = 0; ii < obs.rows(); ++ii)
    for (Eigen::Index tt = 0; tt < obs.cols(); ++tt)
      if (obs(ii, tt)) {
        c.i.push_back(static_cast<std::int32_t>(ii));
        c.t.push_back(static_cast<std::int32_t>(tt));
      }
  return c;
}

void update_fixed_effects(const Eigen::MatrixXd& y, const ObsMask& obs, const Eigen::MatrixXd& L,
                          Eigen::VectorXd& u, Eigen::VectorXd& v) {
  const Eigen::Index N = y.rows(), T = y.cols();
  for (Eigen::Index i = 0; i < N; ++i) {
    double s = 0.0;
    int n = 0;
    for (Eigen::Index t = 0; t < T; ++t)
      if (obs(i, t)) {
        s += y(i, t) - L(i, t) - v[t];
        ++n;
      }
    u[i] = n > 0 ? s / n : 0.0;
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    double s = 0.0;
    int n = 0;
    for (Eigen::Index i = 0; i < N; ++i)
      if (obs(i, t)) {
        s += y(i, t) - L(i, t) - u[i];
        ++n;
      }
    v[t] = n > 0 ? s / n : 0.0;
  }
}

double masked_sse(const Eigen::MatrixXd& y, const CellList& cells, const Eigen::MatrixXd& L,
                  const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double sse = 0.0;
  for (std::size_t k = 0; k < cells.i.size(); ++k) {
    const auto i = cells.i[k], t = cells.t[k];
    const double r = y(i, t) - L(i, t) - u[i] - v[t];
    sse += r * r;
  }
  return sse;
}

}  // namespace

SoftImputeFit soft_impute(const Eigen::MatrixXd& y, const ObsMask& obs, double lambda,
                          const McConfig& cfg, const SoftImputeFit* warm) {
  if (!y.allFinite()) fail(errc::non_finite_input, "matrix has non-finite entries");
  if (obs.rows() != y.rows() || obs.cols() != y.cols())
    fail(errc::bad_input, "mask shape mismatch");
  const CellList cells = observed_cells(obs);
  if (cells.size() == 0) fail(errc::bad_input, "empty observation mask");
  const double nobs = static_cast<double>(cells.size());
  const double threshold = lambda * nobs / 2.0;

  SoftImputeFit fit;
  if (warm) {
    fit.L = warm->L;
    fit.u = warm->u;
    fit.v = warm->v;
  } else {
    fit.L.setZero(y.rows(), y.cols());
    fit.u.setZero(y.rows());
    fit.v.setZero(y.cols());
  }
  if (!cfg.fixed_effects) {
    fit.u.setZero();
    fit.v.setZero();
  }

  double nuclear = 0.0;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(fit.L);
    nuclear = svd.singularValues().sum();
  }
  double obj = masked_sse(y, cells, fit.L, fit.u, fit.v) / nobs + lambda * nuclear;
  fit.objective.push_back(obj);

  Eigen::MatrixXd z(y.rows(), y.cols());
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (cfg.fixed_effects) update_fixed_effects(y, obs, fit.L, fit.u, fit.v);

    // fill: observed cells take the current residual, the rest keep L
    z = fit.L;
    for (std::size_t k = 0; k < cells.i.size(); ++k) {
      const auto i = cells.i[k], t = cells.t[k];
      z(i, t) = y(i, t) - fit.u[i] - fit.v[t];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = std::max(s[k] - threshold, 0.0);
    fit.L.noalias() = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

    const double newobj = masked_sse(y, cells, fit.L, fit.u, fit.v) / nobs + lambda * s.sum();
    fit.objective.push_back(newobj);
    fit.iterations = it;
    const double drop = obj - newobj;
    if (drop < -1e-9 * std::max(1.0, std::abs(obj)))
      fail(errc::no_convergence, "objective increased; numerical failure");
    if (drop >= 0.0 && drop < cfg.tol * std::max(1.0, std::abs(obj))) return fit;
    obj = newobj;
  }
  fail(errc::no_convergence,
       "soft impute did not converge in " + std::to_string(cfg.max_iter) + " iterations");
}

double lambda_max(const Eigen::MatrixXd& y, const ObsMask& obs, bool fixed_effects) {
  const CellList cells = observed_cells(obs);
  if (cells.size() == 0) fail(errc::bad_input, "empty observation mask");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(y.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(y.cols());
  const Eigen::MatrixXd zeroL = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  if (fixed_effects) {
    for (int it = 0; it < 100000; ++it) {
      const Eigen::VectorXd u0 = u, v0 = v;
      update_fixed_effects(y, obs, zeroL, u, v);
      const double ch =
          std::max((u - u0).cwiseAbs().maxCoeff(), (v - v0).cwiseAbs().maxCoeff());
      if (ch < 1e-12) break;
    }
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  for (std::size_t k = 0; k < cells.i.size(); ++k) {
    const auto i = cells.i[k], t = cells.t[k];
    z(i, t) = y(i, t) - u[i] - v[t];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z);
  return 2.0 * svd.singularValues()[0] / static_cast<double>(cells.size());
}

std::vector<double> make_lambda_grid(double lmax, const McConfig& cfg) {
  if (!cfg.lambda_grid.empty()) {
    auto g = cfg.lambda_grid;
    for (double l : g)
      if (l <= 0.0) fail(errc::bad_input, "lambda grid must be positive");
    std::sort(g.begin(), g.end(), std::greater<>());
    return g;
  }
  if (cfg.grid_size < 1) fail(errc::bad_input, "grid size must be >= 1");
  std::vector<double> g(cfg.grid_size);
  if (cfg.grid_size == 1) {
    g[0] = lmax;
    return g;
  }
  const double lo = std::log(lmax * cfg.lambda_min_ratio), hi = std::log(lmax);
  for (int k = 0; k < cfg.grid_size; ++k)
    g[k] = std::exp(hi + (lo - hi) * k / (cfg.grid_size - 1));
  return g;
}

double cross_validate_lambda(const Eigen::MatrixXd& y, const ObsMask& obs, const McConfig& cfg,
                             Rng& rng) {
  if (cfg.folds < 2) fail(errc::bad_input, "folds must be >= 2");
  const CellList cells = observed_cells(obs);
  if (cells.size() < cfg.folds) fail(errc::bad_input, "folds exceed observed cells");

  const std::vector<double> grid = make_lambda_grid(lambda_max(y, obs, cfg.fixed_effects), cfg);

  // random fold assignment: shuffle then round-robin
  std::vector<std::int32_t> order(cells.i.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<std::int32_t>(k);
  for (std::size_t k = order.size(); k > 1; --k)
    std::swap(order[k - 1], order[rng.below(k)]);

  std::vector<double> err(grid.size(), 0.0);
  for (int f = 0; f < cfg.folds; ++f) {
    ObsMask train = obs;
    std::vector<std::int32_t> hold;
    for (std::size_t k = f; k < order.size(); k += cfg.folds) {
      const auto c = order[k];
      train(cells.i[c], cells.t[c]) = 0;
      hold.push_back(c);
    }
    SoftImputeFit warm;
    bool have_warm = false;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      warm = soft_impute(y, train, grid[gi], cfg, have_warm ? &warm : nullptr);
      have_warm = true;
      double sse = 0.0;
      for (auto c : hold) {
        const auto i = cells.i[c], t = cells.t[c];
        const double r = y(i, t) - warm.L(i, t) - warm.u[i] - warm.v[t];
        sse += r * r;
      }
      err[gi] += sse;
    }
  }
  std::size_t best = 0;
  for (std::size_t gi = 1; gi < grid.size(); ++gi)
    if (err[gi] < err[best]) best = gi;
  return grid[best];
}

ObsMask untreated_mask(const PanelDataset& panel) {
  ObsMask obs(panel.n_units(), panel.T);
  for (int i = 0; i < panel.n_units(); ++i)
    for (int t = 1; t <= panel.T; ++t) obs(i, t - 1) = panel.treated_cell(i, t) ? 0 : 1;
  return obs;
}

McResult mc_effects(const PanelDataset& panel, const McConfig& cfg) {
  // same identification preconditions as the regression imputation
  const ObsMask obs = untreated_mask(panel);
  for (int i = 0; i < panel.n_units(); ++i)
    if (!obs.row(i).any())
      fail(errc::unidentified_unit,
           "unit " + std::to_string(panel.units[i]) + " has no untreated cell");
  for (int t = 0; t < panel.T; ++t)
    if (!obs.col(t).any())
      fail(errc::unidentified_period, "period " + std::to_string(t + 1) + " has no untreated cell");

  McResult res;
  res.lambda_max = lambda_max(panel.y, obs, cfg.fixed_effects);
  Rng rng(substream(cfg.cv_seed, 0x4D434356ULL));
  res.lambda_star = cross_validate_lambda(panel.y, obs, cfg, rng);

  // warm-started path down to lambda_star
  const std::vector<double> grid = make_lambda_grid(res.lambda_max, cfg);
  SoftImputeFit fit;
  bool have = false;
  for (double lam : grid) {
    fit = soft_impute(panel.y, obs, lam, cfg, have ? &fit : nullptr);
    have = true;
    if (lam <= res.lambda_star) break;
  }

  res.effects.estimator = "mc";
  const Eigen::MatrixXd fitted = fit.fitted();
  for (int i = 0; i < panel.n_units(); ++i) {
    if (panel.cohort[i] == 0) continue;
    for (int t = panel.cohort[i]; t <= panel.T; ++t)
      res.effects.cells.push_back({i, t, panel.y(i, t - 1) - fitted(i, t - 1)});
  }
  return res;
}

std::map<int, double> mc_pretrend_placebo(const PanelDataset& panel, const McConfig& cfg,
                                          double lambda, int leads) {
  ObsMask obs = untreated_mask(panel);
  std::vector<std::pair<int, int>> held;  // (unit, period)
  for (int i = 0; i < panel.n_units(); ++i) {
    const int g = panel.cohort[i];
    if (g == 0) continue;
    for (int t = std::max(2, g - leads); t < g; ++t) {
      obs(i, t - 1) = 0;
      held.push_back({i, t});
    }
  }
  if (held.empty()) return {};
  const SoftImputeFit fit = soft_impute(panel.y, obs, lambda, cfg);
  const Eigen::MatrixXd fitted = fit.fitted();
  std::map<int, std::pair<double, long long>> acc;
  for (const auto& [i, t] : held) {
    auto& a = acc[t - panel.cohort[i]];
    a.first += panel.y(i, t - 1) - fitted(i, t - 1);
    a.second += 1;
  }
  std::map<int, double> out;
  for (const auto& [e, a] : acc) out[e] = a.first / static_cast<double>(a.second);
  return out;
}

}  // namespace didlab
