// Replication runner and aggregation. Replications are the unit of
// parallelism; every task writes into its own preallocated slot and the
// reduction is sequential, so reports do not depend on the worker count.

#include "didlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace didlab {

namespace {

constexpr std::uint64_t kMcCvTag = 0x6D63;

void run_one_estimator(const std::string& est, const GeneratedPanel& gp,
                       const EstimatorOptions& options, std::uint64_t stream_seed,
                       ReplicationResult& out) {
  const PanelDataset& panel = gp.panel;
  if (est == "twfe") {
    out.overall[est] = twfe_static(panel).value;
  } else if (est == "twfe-es") {
    int lead = options.es_max_lead, lag = options.es_max_lag;
    if (lead <= 0 || lag <= 0) {
      const auto [lo, hi] = event_window_support(panel);
      if (lead <= 0) lead = lo;
      if (lag <= 0) lag = hi;
    }
    out.curves[est] = twfe_event_study(panel, lead, lag).points;
  } else if (est == "sa") {
    const SunAbrahamResult sa = sun_abraham(panel, SaControl::never_treated);
    out.overall[est] = sa.overall.value;
    out.curves[est] = sa.curve.points;
  } else if (est == "cs") {
    const auto effects = att_gt_all(panel, options.cs_control, options.cs_anticipation);
    out.overall[est] = aggregate_gt_overall(effects, panel).value;
    out.curves[est] = aggregate_gt_event(effects, panel).points;
  } else if (est == "bjs") {
    const ControlModel cm = fit_control_model(panel);
    const CellEffects ce = impute_effects(panel, cm);
    out.overall[est] = aggregate_uniform(ce).value;
    auto points = aggregate_by_event(ce, panel).points;
    for (const auto& [e, v] : bjs_pretrend_residuals(panel, cm, panel.T - 2))
      points[e] = {v, true};  // training residuals, exempt from flagging
    out.curves[est] = std::move(points);
  } else if (est == "mc") {
    McConfig cfg = options.mc;
    cfg.cv_seed = substream(stream_seed, kMcCvTag);
    const McResult mc = mc_effects(panel, cfg);
    out.overall[est] = aggregate_uniform(mc.effects).value;
    auto points = aggregate_by_event(mc.effects, panel).points;
    for (const auto& [e, v] :
         mc_pretrend_placebo(panel, cfg, mc.lambda_star, cfg.placebo_leads))
      points[e] = {v, false};  // held-out prediction errors
    out.curves[est] = std::move(points);
  } else if (est == "etwfe") {
    const EtwfeResult et = etwfe(panel);
    out.overall[est] = et.overall.value;
    out.curves[est] = et.curve.points;
  } else {
    fail(errc::bad_input, "unknown estimator " + est);
  }
}

double quantile(std::vector<double> sorted, double p) {
  // linear interpolation between order statistics
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = (static_cast<double>(n) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ReplicationResult run_replication(const ScenarioConfig& scenario,
                                  const std::vector<std::string>& estimators,
                                  std::uint64_t stream_seed, const EstimatorOptions& options) {
  if (estimators.empty()) fail(errc::empty_plan, "no estimators requested");
  ReplicationResult res;
  GeneratedPanel gp;
  try {
    gp = generate_panel(scenario, stream_seed);
  } catch (const Error& e) {
    res.panel_error = e.what();
    return res;
  }
  res.panel_ok = true;
  res.truth_overall = true_att_overall(gp);
  res.truth_by_event = truth_by_event_all(gp);
  for (const auto& est : estimators) {
    try {
      run_one_estimator(est, gp, options, stream_seed, res);
    } catch (const Error& e) {
      res.errors[est] = e.what();
    }
  }
  return res;
}

int default_workers() {
  if (const char* env = std::getenv("DIDLAB_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

SimulationReport run_bench(const BenchPlan& plan, int workers) {
  if (plan.scenarios.empty()) fail(errc::empty_plan, "plan has no scenarios");
  if (plan.estimators.empty()) fail(errc::empty_plan, "plan has no estimators");
  if (plan.reps < 1) fail(errc::bad_input, "reps must be >= 1");
  for (const auto& est : plan.estimators)
    if (std::find(all_estimators().begin(), all_estimators().end(), est) ==
        all_estimators().end())
      fail(errc::bad_input, "unknown estimator " + est);
  if (workers <= 0) workers = default_workers();

  SimulationReport report;
  report.plan = plan;
  const int S = static_cast<int>(plan.scenarios.size());
  report.raw.assign(S, {});
  for (auto& v : report.raw) v.resize(plan.reps);

  // estimators active at replication r (per-estimator R override)
  auto active_at = [&](int r) {
    std::vector<std::string> act;
    for (const auto& est : plan.estimators) {
      auto it = plan.rep_override.find(est);
      const int cap = it == plan.rep_override.end() ? plan.reps : std::min(it->second, plan.reps);
      if (r < cap) act.push_back(est);
    }
    return act;
  };

  const long long n_tasks = static_cast<long long>(S) * plan.reps;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
  for (long long task = 0; task < n_tasks; ++task) {
    const int s = static_cast<int>(task / plan.reps);
    const int r = static_cast<int>(task % plan.reps);
    const auto act = active_at(r);
    ReplicationResult res =
        run_replication(plan.scenarios[s], act, substream(plan.base_seed, r), plan.options);
    res.rep = r;
    report.raw[s][r] = std::move(res);
  }

  aggregate_report(report);
  return report;
}

void aggregate_report(SimulationReport& report) {
  report.summary.clear();
  report.events.clear();
  report.pretrend.clear();
  report.failures.clear();
  const BenchPlan& plan = report.plan;

  for (std::size_t s = 0; s < plan.scenarios.size(); ++s) {
    const std::string& sid = plan.scenarios[s].id;
    const auto& reps = report.raw[s];

    for (const auto& r : reps) {
      if (!r.panel_ok)
        report.failures.push_back({sid, "*", r.rep, r.panel_error});
      for (const auto& [est, msg] : r.errors) report.failures.push_back({sid, est, r.rep, msg});
    }

    for (const auto& est : plan.estimators) {
      // ---- single-number summary
      std::vector<double> vals, truths;
      for (const auto& r : reps) {
        auto it = r.overall.find(est);
        if (it == r.overall.end()) continue;
        vals.push_back(it->second);
        truths.push_back(r.truth_overall);
      }
      if (!vals.empty()) {
        SummaryRow row;
        row.scenario = sid;
        row.estimator = est;
        row.reps = static_cast<int>(vals.size());
        double m = 0.0;
        for (double v : vals) m += v;
        m /= static_cast<double>(vals.size());
        double tm = 0.0;
        for (double v : truths) tm += v;
        tm /= static_cast<double>(truths.size());
        double ss = 0.0;
        for (double v : vals) ss += (v - m) * (v - m);
        row.mean = m;
        row.truth = tm;
        row.abs_bias = m - tm;
        if (std::abs(tm) > 1e-300) row.rel_bias = row.abs_bias / tm;
        row.sd = vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1.0)) : 0.0;
        std::sort(vals.begin(), vals.end());
        row.q05 = quantile(vals, 0.05);
        row.q25 = quantile(vals, 0.25);
        row.q50 = quantile(vals, 0.50);
        row.q75 = quantile(vals, 0.75);
        row.q95 = quantile(vals, 0.95);
        report.summary.push_back(std::move(row));
      }

      // ---- event-study points
      std::map<int, std::vector<double>> by_e;
      std::map<int, std::vector<double>> truth_e;
      std::map<int, bool> insample_e;
      for (const auto& r : reps) {
        auto it = r.curves.find(est);
        if (it == r.curves.end()) continue;
        for (const auto& [e, pt] : it->second) {
          by_e[e].push_back(pt.value);
          auto te = r.truth_by_event.find(e);
          truth_e[e].push_back(te == r.truth_by_event.end() ? 0.0 : te->second);
          insample_e[e] = insample_e[e] || pt.in_sample;
        }
      }
      PreSamples pre;
      bool any_pre = false;
      for (const auto& [e, v] : by_e) {
        EventRow row;
        row.scenario = sid;
        row.estimator = est;
        row.e = e;
        row.reps = static_cast<int>(v.size());
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        row.mean = m;
        row.sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1.0)) : 0.0;
        double t = 0.0;
        for (double x : truth_e[e]) t += x;
        row.truth = t / static_cast<double>(truth_e[e].size());
        row.in_sample = insample_e[e];
        report.events.push_back(std::move(row));
        if (e < -1) {
          pre.by_event[e] = v;
          pre.in_sample = pre.in_sample || insample_e[e];
          any_pre = true;
        }
      }
      if (any_pre) {
        auto rows = pretrend_report({{est, pre}});
        for (auto& r : rows) report.pretrend.push_back({sid, r});
      }
    }
  }
}

}  // namespace didlab
