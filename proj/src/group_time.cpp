// Group-time ATTs, their aggregation, and the timing-pair decomposition of the
// static TWFE coefficient.

#include "didlab/group_time.hpp"

#include <algorithm>
#include <cmath>

namespace didlab {

namespace {

// pooled cell mean over a cohort set at one period
double pooled_mean(const CohortCells& cells, const std::vector<int>& cohort_idx, int t) {
  double num = 0.0, den = 0.0;
  for (int c : cohort_idx) {
    num += cells.n[c] * cells.ybar(c, t - 1);
    den += cells.n[c];
  }
  return num / den;
}

std::vector<int> control_set(const CohortCells& cells, int g, int t, int base,
                             GtControl control) {
  std::vector<int> out;
  const int hi = std::max(t, base);
  for (std::size_t c = 0; c < cells.cohorts.size(); ++c) {
    const int gc = cells.cohorts[c];
    if (gc == g) continue;
    const bool is_never = gc == 0;
    const bool is_notyet = gc > hi;
    switch (control) {
      case GtControl::never_treated:
        if (is_never) out.push_back(static_cast<int>(c));
        break;
      case GtControl::not_yet_treated:
        if (is_notyet) out.push_back(static_cast<int>(c));
        break;
      case GtControl::both:
        if (is_never || is_notyet) out.push_back(static_cast<int>(c));
        break;
    }
  }
  return out;
}

}  // namespace

GroupTimeEffect att_gt(const PanelDataset& panel, int g, int t, GtControl control,
                       int base_period) {
  const CohortCells cells = collapse_by_cohort(panel);
  const int ci = cells.index_of(g);
  if (g <= 0 || ci < 0) fail(errc::empty_cohort, "cohort " + std::to_string(g));
  if (t < 1 || t > panel.T || base_period < 1 || base_period > panel.T)
    fail(errc::bad_input, "period out of range");
  if (base_period >= g) fail(errc::bad_input, "base period must be strictly pre-treatment");

  const std::vector<int> ctrl = control_set(cells, g, t, base_period, control);
  if (ctrl.empty())
    fail(errc::empty_control,
         "no control units for (g=" + std::to_string(g) + ", t=" + std::to_string(t) + ")");

  GroupTimeEffect eff;
  eff.g = g;
  eff.t = t;
  eff.control = control;
  eff.base_period = base_period;
  eff.n_treated = cells.n[ci];
  for (int c : ctrl) eff.n_control += cells.n[c];
  eff.value = (cells.ybar(ci, t - 1) - cells.ybar(ci, base_period - 1)) -
              (pooled_mean(cells, ctrl, t) - pooled_mean(cells, ctrl, base_period));
  return eff;
}

std::vector<GroupTimeEffect> att_gt_all(const PanelDataset& panel, GtControl control,
                                        int anticipation) {
  const CohortCells cells = collapse_by_cohort(panel);
  std::vector<GroupTimeEffect> out;
  for (std::size_t c = 0; c < cells.cohorts.size(); ++c) {
    const int g = cells.cohorts[c];
    if (g == 0) continue;
    const int base = g - 1 - anticipation;
    if (base < 1)
      fail(errc::bad_input,
           "anticipation " + std::to_string(anticipation) + " leaves cohort " +
               std::to_string(g) + " without a base period");
    for (int t = 1; t <= panel.T; ++t) {
      if (t == base) continue;
      out.push_back(att_gt(panel, g, t, control, base));
    }
  }
  if (out.empty()) fail(errc::empty_cohort, "no treated cohorts");
  return out;
}

Estimate aggregate_gt_overall(const std::vector<GroupTimeEffect>& effects,
                              const PanelDataset& panel) {
  (void)panel;
  double num = 0.0, den = 0.0;
  for (const auto& e : effects) {
    if (e.t < e.g) continue;  // pre-treatment contrasts stay out of the summary
    num += e.n_treated * e.value;
    den += e.n_treated;
  }
  if (den == 0.0) fail(errc::empty_cohort, "no post-treatment contrasts");
  return {num / den, "cs"};
}

EventStudyCurve aggregate_gt_event(const std::vector<GroupTimeEffect>& effects,
                                   const PanelDataset& panel) {
  (void)panel;
  std::map<int, std::pair<double, double>> acc;
  for (const auto& e : effects) {
    auto& a = acc[e.t - e.g];
    a.first += e.n_treated * e.value;
    a.second += e.n_treated;
  }
  EventStudyCurve curve;
  curve.reference_periods.insert(-1);
  for (const auto& [e, a] : acc) curve.points[e] = {a.first / a.second, false};
  return curve;
}

BaconResult bacon_decompose(const PanelDataset& panel) {
  const CohortCells cells = collapse_by_cohort(panel);
  const int T = panel.T;
  std::vector<int> timing;  // cohort indices with g > 0
  for (std::size_t c = 0; c < cells.cohorts.size(); ++c)
    if (cells.cohorts[c] > 0) timing.push_back(static_cast<int>(c));
  if (timing.empty()) fail(errc::empty_cohort, "no treated cohorts");
  if (timing.size() < 2 && !cells.has_never())
    fail(errc::single_timing_group,
         "one timing group and no never-treated units: decomposition degenerate");

  const double n_total = std::accumulate(cells.n.begin(), cells.n.end(), 0.0);
  auto dbar = [&](int c) {
    return static_cast<double>(T - cells.cohorts[c] + 1) / static_cast<double>(T);
  };
  auto window_mean = [&](int c, int lo, int hi) {  // periods lo..hi inclusive
    double s = 0.0;
    for (int t = lo; t <= hi; ++t) s += cells.ybar(c, t - 1);
    return s / static_cast<double>(hi - lo + 1);
  };

  BaconResult res;
  std::vector<double> numerators;

  if (cells.has_never()) {
    for (int c : timing) {
      const int gk = cells.cohorts[c];
      const double did = (window_mean(c, gk, T) - window_mean(c, 1, gk - 1)) -
                         (window_mean(0, gk, T) - window_mean(0, 1, gk - 1));
      const double num =
          (cells.n[c] / n_total) * (cells.n[0] / n_total) * dbar(c) * (1.0 - dbar(c));
      res.comparisons.push_back(
          {BaconKind::treated_vs_never, gk, 0, did, 0.0, false});
      numerators.push_back(num);
    }
  }
  for (std::size_t a = 0; a < timing.size(); ++a) {
    for (std::size_t b = a + 1; b < timing.size(); ++b) {
      const int ck = timing[a], cl = timing[b];
      const int gk = cells.cohorts[ck], gl = cells.cohorts[cl];
      const double nk = cells.n[ck] / n_total, nl = cells.n[cl] / n_total;
      const double dk = dbar(ck), dl = dbar(cl);
      // early vs late over the late group's pre-period window [1, gl-1]
      {
        const double did = (window_mean(ck, gk, gl - 1) - window_mean(ck, 1, gk - 1)) -
                           (window_mean(cl, gk, gl - 1) - window_mean(cl, 1, gk - 1));
        res.comparisons.push_back(
            {BaconKind::early_vs_late_pre, gk, gl, did, 0.0, false});
        numerators.push_back(nk * nl * (dk - dl) * (1.0 - dk));
      }
      // late vs already-treated early over [gk, T]
      {
        const double did = (window_mean(cl, gl, T) - window_mean(cl, gk, gl - 1)) -
                           (window_mean(ck, gl, T) - window_mean(ck, gk, gl - 1));
        res.comparisons.push_back(
            {BaconKind::late_vs_early_post, gl, gk, did, 0.0, true});
        numerators.push_back(nk * nl * dl * (dk - dl));
      }
    }
  }

  const double vd = std::accumulate(numerators.begin(), numerators.end(), 0.0);
  if (vd <= 0.0) fail(errc::collinear_design, "treatment has no within variation");
  for (std::size_t k = 0; k < numerators.size(); ++k) {
    res.comparisons[k].weight = numerators[k] / vd;
    res.reconstruction += res.comparisons[k].weight * res.comparisons[k].did;
    if (res.comparisons[k].forbidden) res.forbidden_share += res.comparisons[k].weight;
  }
  res.beta_twfe = twfe_static(panel).value;
  return res;
}

std::vector<PretrendRow> pretrend_report(
    const std::vector<std::pair<std::string, PreSamples>>& curves) {
  std::vector<PretrendRow> out;
  for (const auto& [name, pre] : curves) {
    PretrendRow row;
    row.estimator = name;
    row.in_sample = pre.in_sample;
    double sum = 0.0;
    long long n = 0;
    for (const auto& [e, samples] : pre.by_event) {
      if (e >= -1 || samples.empty()) continue;
      double m = 0.0;
      for (double v : samples) m += v;
      m /= static_cast<double>(samples.size());
      sum += m;
      ++n;
      row.max_abs_pre = std::max(row.max_abs_pre, std::abs(m));
      if (!pre.in_sample && samples.size() >= 2) {
        double ss = 0.0;
        for (double v : samples) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / (samples.size() - 1.0));
        const double mcse = sd / std::sqrt(static_cast<double>(samples.size()));
        if (std::abs(m) > 3.0 * std::max(mcse, 1e-15)) row.flagged = true;
      }
    }
    row.mean_pre = n > 0 ? sum / static_cast<double>(n) : 0.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace didlab
