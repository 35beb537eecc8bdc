#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "didlab/fe_solver.hpp"
#include "didlab/panel.hpp"

namespace didlab {

struct Estimate {
  double value = 0.0;
  std::string label;
};

struct CurvePoint {
  double value = 0.0;
  bool in_sample = false;  // true when the point reads training residuals
};

struct EventStudyCurve {
  std::map<int, CurvePoint> points;
  std::set<int> reference_periods;  // e values fixed at 0 by construction
};

// Static TWFE: y on D with unit and period fixed effects absorbed.
Estimate twfe_static(const PanelDataset& panel, const AbsorbOptions& opts = {});

// Event-study TWFE. Dummies at e in {-max_lead..-2, 0..max_lag}; event times
// beyond the window are binned into the endpoint dummies. e = -1 and the
// never-treated are the omitted baseline. Throws EmptyEventBin when a dummy
// has no support.
EventStudyCurve twfe_event_study(const PanelDataset& panel, int max_lead, int max_lag,
                                 const AbsorbOptions& opts = {});

// Widest window with support in this panel (makes binning inert).
std::pair<int, int> event_window_support(const PanelDataset& panel);

enum class SaControl { never_treated, last_treated_cohort };

struct SunAbrahamResult {
  std::map<std::pair<int, int>, double> cohort_event;  // (g, e) -> coefficient
  EventStudyCurve curve;                               // cohort-share weighted
  Estimate overall;                                    // share-weighted mean over e >= 0
};

// Saturated TWFE with cohort x event-time interactions, reference e = -1.
SunAbrahamResult sun_abraham(const PanelDataset& panel,
                             SaControl control = SaControl::never_treated);

struct EtwfeResult {
  std::map<std::pair<int, int>, double> cohort_period;  // (g, t) -> delta hat
  EventStudyCurve curve;                                // post-treatment only
  Estimate overall;
};

// Extended TWFE: period effects + cohort intercepts + saturated post-onset
// cohort x period interactions, never-treated as baseline. Produces no
// pre-treatment placebo coefficients.
EtwfeResult etwfe(const PanelDataset& panel);

}  // namespace didlab
