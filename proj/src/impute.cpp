// Regression imputation: fit y = alpha_i + zeta_t on untreated cells, impute
// treated counterfactuals, difference, aggregate.

#include "didlab/impute.hpp"

#include <cmath>

namespace didlab {

ControlModel fit_control_model(const PanelDataset& p, double tol, int max_iter) {
  const int N = p.n_units(), T = p.T;

  std::vector<int> unit_obs(N, 0), period_obs(T, 0);
  for (int i = 0; i < N; ++i)
    for (int t = 1; t <= T; ++t)
      if (!p.treated_cell(i, t)) {
        ++unit_obs[i];
        ++period_obs[t - 1];
      }
  for (int i = 0; i < N; ++i)
    if (unit_obs[i] == 0)
      fail(errc::unidentified_unit,
           "unit " + std::to_string(p.units[i]) + " has no untreated cell");
  for (int t = 1; t <= T; ++t)
    if (period_obs[t - 1] == 0)
      fail(errc::unidentified_period, "period " + std::to_string(t) + " has no untreated cell");

  ControlModel cm;
  cm.unit_effects.setZero(N);
  cm.period_effects.setZero(T);

  // alternate weighted averaging until the largest update is below tol
  for (int it = 0; it < max_iter; ++it) {
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
      double s = 0.0;
      for (int t = 1; t <= T; ++t)
        if (!p.treated_cell(i, t)) s += p.y(i, t - 1) - cm.period_effects[t - 1];
      const double v = s / unit_obs[i];
      worst = std::max(worst, std::abs(v - cm.unit_effects[i]));
      cm.unit_effects[i] = v;
    }
    for (int t = 1; t <= T; ++t) {
      double s = 0.0;
      for (int i = 0; i < N; ++i)
        if (!p.treated_cell(i, t)) s += p.y(i, t - 1) - cm.unit_effects[i];
      const double v = s / period_obs[t - 1];
      worst = std::max(worst, std::abs(v - cm.period_effects[t - 1]));
      cm.period_effects[t - 1] = v;
    }
    if (worst < tol) {
      const double shift = cm.period_effects.mean();
      cm.period_effects.array() -= shift;
      cm.unit_effects.array() += shift;
      return cm;
    }
  }
  fail(errc::no_convergence, "control model did not converge");
}

CellEffects impute_effects(const PanelDataset& p, const ControlModel& cm) {
  CellEffects ce;
  ce.estimator = "bjs";
  for (int i = 0; i < p.n_units(); ++i) {
    if (p.cohort[i] == 0) continue;
    for (int t = p.cohort[i]; t <= p.T; ++t)
      ce.cells.push_back(
          {i, t, p.y(i, t - 1) - cm.unit_effects[i] - cm.period_effects[t - 1]});
  }
  return ce;
}

Estimate aggregate_uniform(const CellEffects& ce) {
  if (ce.cells.empty()) fail(errc::empty_cohort, "no treated cells to aggregate");
  double s = 0.0;
  for (const auto& c : ce.cells) s += c.effect;
  return {s / static_cast<double>(ce.cells.size()), ce.estimator};
}

EventStudyCurve aggregate_by_event(const CellEffects& ce, const PanelDataset& p) {
  if (ce.cells.empty()) fail(errc::empty_cohort, "no treated cells to aggregate");
  std::map<int, std::pair<double, long long>> acc;
  for (const auto& c : ce.cells) {
    auto& a = acc[c.t - p.cohort[c.unit]];
    a.first += c.effect;
    a.second += 1;
  }
  EventStudyCurve curve;
  for (const auto& [e, a] : acc) curve.points[e] = {a.first / a.second, false};
  return curve;
}

std::map<int, double> bjs_pretrend_residuals(const PanelDataset& p, const ControlModel& cm,
                                             int max_lead) {
  std::map<int, std::pair<double, long long>> acc;
  for (int i = 0; i < p.n_units(); ++i) {
    const int g = p.cohort[i];
    if (g == 0) continue;
    for (int t = 1; t < g; ++t) {
      const int e = t - g;
      if (e < -max_lead) continue;
      auto& a = acc[e];
      a.first += p.y(i, t - 1) - cm.unit_effects[i] - cm.period_effects[t - 1];
      a.second += 1;
    }
  }
  std::map<int, double> out;
  for (const auto& [e, a] : acc) out[e] = a.first / static_cast<double>(a.second);
  return out;
}

}  // namespace didlab
