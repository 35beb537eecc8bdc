// Regression-family estimators. twfe_static and twfe_event_study run the
// within-transformation on the full unit x period data. sun_abraham and etwfe
// collapse to cohort x period cells first: their designs are constant within
// cells, so the weighted cell regression reproduces the unit-level OLS exactly
// on balanced panels (unit tests check this against dummy regressions).

#include "didlab/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace didlab {

namespace {

void build_panel_factors(const PanelDataset& p, std::vector<std::int32_t>& unit_f,
                         std::vector<std::int32_t>& period_f) {
  const int N = p.n_units(), T = p.T;
  unit_f.resize(static_cast<std::size_t>(N) * T);
  period_f.resize(static_cast<std::size_t>(N) * T);
  std::size_t r = 0;
  for (int i = 0; i < N; ++i)
    for (int t = 0; t < T; ++t, ++r) {
      unit_f[r] = i;
      period_f[r] = t;
    }
}

}  // namespace

Estimate twfe_static(const PanelDataset& p, const AbsorbOptions& opts) {
  const int N = p.n_units(), T = p.T;
  const long long treated_cells = p.d.cast<int>().sum();
  if (treated_cells == 0 || treated_cells == static_cast<long long>(N) * T)
    fail(errc::collinear_design, "need at least one treated and one untreated cell");

  RegressionProblem prob;
  prob.y.resize(static_cast<Eigen::Index>(N) * T);
  prob.X.resize(static_cast<Eigen::Index>(N) * T, 1);
  Eigen::Index r = 0;
  for (int i = 0; i < N; ++i)
    for (int t = 0; t < T; ++t, ++r) {
      prob.y[r] = p.y(i, t);
      prob.X(r, 0) = static_cast<double>(p.d(i, t));
    }
  prob.absorbed.resize(2);
  build_panel_factors(p, prob.absorbed[0], prob.absorbed[1]);
  const Eigen::VectorXd beta = absorb_and_solve(prob, opts);
  return {beta[0], "twfe"};
}

std::pair<int, int> event_window_support(const PanelDataset& p) {
  int lo = 0, hi = 0;
  for (int i = 0; i < p.n_units(); ++i) {
    if (p.cohort[i] == 0) continue;
    lo = std::min(lo, 1 - p.cohort[i]);
    hi = std::max(hi, p.T - p.cohort[i]);
  }
  return {std::max(1, -lo), std::max(1, hi)};
}

EventStudyCurve twfe_event_study(const PanelDataset& p, int max_lead, int max_lag,
                                 const AbsorbOptions& opts) {
  if (max_lead < 1 || max_lag < 1) fail(errc::bad_input, "window bounds must be >= 1");
  const int N = p.n_units(), T = p.T;

  std::vector<int> es;
  for (int e = -max_lead; e <= max_lag; ++e)
    if (e != -1) es.push_back(e);
  std::map<int, int> col_of;
  for (std::size_t k = 0; k < es.size(); ++k) col_of[es[k]] = static_cast<int>(k);

  RegressionProblem prob;
  prob.y.resize(static_cast<Eigen::Index>(N) * T);
  prob.X.setZero(static_cast<Eigen::Index>(N) * T, static_cast<Eigen::Index>(es.size()));
  std::vector<long long> support(es.size(), 0);
  Eigen::Index r = 0;
  for (int i = 0; i < N; ++i) {
    const int g = p.cohort[i];
    for (int t = 1; t <= T; ++t, ++r) {
      prob.y[r] = p.y(i, t - 1);
      if (g == 0) continue;
      const int e = std::clamp(t - g, -max_lead, max_lag);
      if (e == -1) continue;
      const int c = col_of.at(e);
      prob.X(r, c) = 1.0;
      ++support[c];
    }
  }
  for (std::size_t k = 0; k < es.size(); ++k)
    if (support[k] == 0)
      fail(errc::empty_event_bin, "no observations at event time " + std::to_string(es[k]));

  prob.absorbed.resize(2);
  build_panel_factors(p, prob.absorbed[0], prob.absorbed[1]);
  const Eigen::VectorXd beta = absorb_and_solve(prob, opts);

  EventStudyCurve curve;
  curve.reference_periods.insert(-1);
  for (std::size_t k = 0; k < es.size(); ++k) curve.points[es[k]] = {beta[k], false};
  return curve;
}

namespace {

// Shared cell-level machinery for the saturated designs: weighted OLS of cell
// means on period dummies + cohort dummies + the given interaction dummies.
struct CellDesign {
  std::vector<std::pair<int, int>> inter;  // (cohort index, period) per column
  Eigen::VectorXd coef;                    // aligned with inter
};

CellDesign solve_cell_design(const CohortCells& cells, const std::vector<char>& keep_cell,
                             const std::vector<std::pair<int, int>>& inter,
                             const std::vector<char>& cohort_dummy) {
  const int C = static_cast<int>(cells.cohorts.size());
  const int T = static_cast<int>(cells.ybar.cols());
  std::vector<int> rows;
  for (int c = 0; c < C; ++c)
    for (int t = 1; t <= T; ++t)
      if (keep_cell[c * T + (t - 1)]) rows.push_back(c * T + (t - 1));

  int n_cohort_cols = 0;
  std::vector<int> cohort_col(C, -1);
  for (int c = 0; c < C; ++c)
    if (cohort_dummy[c]) cohort_col[c] = n_cohort_cols++;

  const int ncol = 1 + (T - 1) + n_cohort_cols + static_cast<int>(inter.size());
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows.size(), ncol);
  Eigen::VectorXd y(rows.size()), w(rows.size());
  std::map<std::pair<int, int>, int> inter_col;
  for (std::size_t k = 0; k < inter.size(); ++k)
    inter_col[inter[k]] = 1 + (T - 1) + n_cohort_cols + static_cast<int>(k);

  for (std::size_t rI = 0; rI < rows.size(); ++rI) {
    const int c = rows[rI] / T, t = rows[rI] % T + 1;
    y[rI] = cells.ybar(c, t - 1);
    w[rI] = cells.n[c];
    X(rI, 0) = 1.0;
    if (t >= 2) X(rI, t - 1) = 1.0;  // period dummies, t = 2..T
    if (cohort_col[c] >= 0) X(rI, 1 + (T - 1) + cohort_col[c]) = 1.0;
    auto it = inter_col.find({c, t});
    if (it != inter_col.end()) X(rI, it->second) = 1.0;
  }

  CellDesign out;
  out.inter = inter;
  const Eigen::VectorXd beta = wls_solve(X, y, w);
  out.coef = beta.tail(static_cast<Eigen::Index>(inter.size()));
  return out;
}

// cohort-share weights among treated observations at each event time
EventStudyCurve share_weighted_curve(const std::map<std::pair<int, int>, double>& by_cohort_e,
                                     const CohortCells& cells) {
  std::map<int, std::pair<double, double>> acc;  // e -> (sum w*v, sum w)
  for (const auto& [key, v] : by_cohort_e) {
    const double w = cells.n[cells.index_of(key.first)];
    auto& a = acc[key.second];
    a.first += w * v;
    a.second += w;
  }
  EventStudyCurve curve;
  curve.reference_periods.insert(-1);
  for (const auto& [e, a] : acc) curve.points[e] = {a.first / a.second, false};
  return curve;
}

Estimate share_weighted_overall(const std::map<std::pair<int, int>, double>& by_cohort_e,
                                const CohortCells& cells, const std::string& label) {
  double num = 0.0, den = 0.0;
  for (const auto& [key, v] : by_cohort_e) {
    if (key.second < 0) continue;
    const double w = cells.n[cells.index_of(key.first)];
    num += w * v;
    den += w;
  }
  if (den == 0.0) fail(errc::empty_cohort, "no post-treatment cells");
  return {num / den, label};
}

}  // namespace

SunAbrahamResult sun_abraham(const PanelDataset& p, SaControl control) {
  const CohortCells cells = collapse_by_cohort(p);
  const int C = static_cast<int>(cells.cohorts.size());
  const int T = p.T;

  std::vector<int> treated;
  for (int c = 0; c < C; ++c)
    if (cells.cohorts[c] > 0) treated.push_back(c);
  if (treated.empty()) fail(errc::empty_cohort, "no treated cohorts");

  int t_limit = T;  // cells with t <= t_limit enter the sample
  std::vector<char> is_control_cohort(C, 0);
  if (control == SaControl::never_treated) {
    if (!cells.has_never()) fail(errc::empty_control, "no never-treated units");
    is_control_cohort[0] = 1;
  } else {
    if (treated.size() < 2)
      fail(errc::empty_control, "last-treated control needs at least two cohorts");
    const int last = treated.back();
    is_control_cohort[last] = 1;
    t_limit = cells.cohorts[last] - 1;  // drop periods where the control is treated
  }

  std::vector<std::pair<int, int>> inter;  // (cohort index, period)
  std::vector<char> cohort_dummy(C, 0);
  for (int c : treated) {
    if (is_control_cohort[c]) continue;
    const int g = cells.cohorts[c];
    if (g < 2) fail(errc::empty_control, "cohort treated at period 1 has no reference period");
    cohort_dummy[c] = 1;
    for (int t = 1; t <= t_limit; ++t)
      if (t != g - 1) inter.push_back({c, t});
  }
  std::vector<char> keep(static_cast<std::size_t>(C) * T, 0);
  for (int c = 0; c < C; ++c)
    for (int t = 1; t <= t_limit; ++t) keep[c * T + (t - 1)] = 1;

  const CellDesign fit = solve_cell_design(cells, keep, inter, cohort_dummy);

  SunAbrahamResult res;
  std::map<std::pair<int, int>, double> by_ce;
  for (std::size_t k = 0; k < fit.inter.size(); ++k) {
    const int c = fit.inter[k].first, t = fit.inter[k].second;
    const int e = t - cells.cohorts[c];
    res.cohort_event[{cells.cohorts[c], e}] = fit.coef[k];
    by_ce[{cells.cohorts[c], e}] = fit.coef[k];
  }
  res.curve = share_weighted_curve(by_ce, cells);
  res.overall = share_weighted_overall(by_ce, cells, "sa");
  return res;
}

EtwfeResult etwfe(const PanelDataset& p) {
  const CohortCells cells = collapse_by_cohort(p);
  if (!cells.has_never()) fail(errc::empty_control, "no never-treated units");
  const int C = static_cast<int>(cells.cohorts.size());
  const int T = p.T;

  // fit period + cohort effects on untreated cells; the saturated interaction
  // coefficients are then the residual treated-cell means
  std::vector<char> keep(static_cast<std::size_t>(C) * T, 0);
  std::vector<char> cohort_dummy(C, 0);
  for (int c = 0; c < C; ++c) {
    const int g = cells.cohorts[c];
    if (g == 1) fail(errc::unidentified_unit, "cohort treated at period 1 has no pre-period");
    if (g > 0) cohort_dummy[c] = 1;
    for (int t = 1; t <= T; ++t)
      if (g == 0 || t < g) keep[c * T + (t - 1)] = 1;
  }

  std::vector<int> rows;
  for (int c = 0; c < C; ++c)
    for (int t = 1; t <= T; ++t)
      if (keep[c * T + (t - 1)]) rows.push_back(c * T + (t - 1));
  int n_cohort_cols = 0;
  std::vector<int> cohort_col(C, -1);
  for (int c = 0; c < C; ++c)
    if (cohort_dummy[c]) cohort_col[c] = n_cohort_cols++;
  const int ncol = 1 + (T - 1) + n_cohort_cols;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows.size(), ncol);
  Eigen::VectorXd yv(rows.size()), w(rows.size());
  for (std::size_t rI = 0; rI < rows.size(); ++rI) {
    const int c = rows[rI] / T, t = rows[rI] % T + 1;
    yv[rI] = cells.ybar(c, t - 1);
    w[rI] = cells.n[c];
    X(rI, 0) = 1.0;
    if (t >= 2) X(rI, t - 1) = 1.0;
    if (cohort_col[c] >= 0) X(rI, 1 + (T - 1) + cohort_col[c]) = 1.0;
  }
  const Eigen::VectorXd beta = wls_solve(X, yv, w);

  auto fitted = [&](int c, int t) {
    double v = beta[0];
    if (t >= 2) v += beta[t - 1];
    if (cohort_col[c] >= 0) v += beta[1 + (T - 1) + cohort_col[c]];
    return v;
  };

  EtwfeResult res;
  std::map<std::pair<int, int>, double> by_ce;
  for (int c = 0; c < C; ++c) {
    const int g = cells.cohorts[c];
    if (g == 0) continue;
    for (int t = g; t <= T; ++t) {
      const double eff = cells.ybar(c, t - 1) - fitted(c, t);
      res.cohort_period[{g, t}] = eff;
      by_ce[{g, t - g}] = eff;
    }
  }
  res.curve = share_weighted_curve(by_ce, cells);
  res.curve.reference_periods.clear();  // no placebo coefficients by design
  res.overall = share_weighted_overall(by_ce, cells, "etwfe");
  return res;
}

}  // namespace didlab
