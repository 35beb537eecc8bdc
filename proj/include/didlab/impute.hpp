#pragma once

#include <map>
#include <string>
#include <vector>

#include "didlab/estimators.hpp"
#include "didlab/panel.hpp"

namespace didlab {

// Two-way control model fitted on the observed-untreated cells only.
// Identified up to a constant; normalized so the period effects sum to zero.
struct ControlModel {
  Eigen::VectorXd unit_effects;    // per unit
  Eigen::VectorXd period_effects;  // per period, mean zero
};

ControlModel fit_control_model(const PanelDataset& panel, double tol = 1e-12,
                               int max_iter = 100000);

// Per-cell treatment effect estimates on the treated cells.
struct CellEffects {
  struct Cell {
    int unit;  // row index into the panel
    int t;     // period
    double effect;
  };
  std::vector<Cell> cells;
  std::string estimator;
};

CellEffects impute_effects(const PanelDataset& panel, const ControlModel& cm);

Estimate aggregate_uniform(const CellEffects& ce);
EventStudyCurve aggregate_by_event(const CellEffects& ce, const PanelDataset& panel);

// Mean control-model residual on the observed-untreated cells at each e < 0.
// These read the model's own training residuals (in-sample); they are reported
// as diagnostics but exempt from pre-trend flagging.
std::map<int, double> bjs_pretrend_residuals(const PanelDataset& panel, const ControlModel& cm,
                                             int max_lead);

}  // namespace didlab
