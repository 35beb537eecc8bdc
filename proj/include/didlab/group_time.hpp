#pragma once

#include <map>
#include <string>
#include <vector>

#include "didlab/estimators.hpp"
#include "didlab/panel.hpp"

namespace didlab {

enum class GtControl { never_treated, not_yet_treated, both };

struct GroupTimeEffect {
  int g = 0;
  int t = 0;
  double value = 0.0;
  GtControl control = GtControl::never_treated;
  int base_period = 0;
  double n_treated = 0.0;
  double n_control = 0.0;
};

// delta_{g,t} = [ybar_g(t) - ybar_g(base)] - [ybar_C(t) - ybar_C(base)].
// t < g gives a pre-treatment placebo contrast.
GroupTimeEffect att_gt(const PanelDataset& panel, int g, int t, GtControl control,
                       int base_period);

// Every (g, t != base) contrast, base = g - 1 - anticipation.
std::vector<GroupTimeEffect> att_gt_all(const PanelDataset& panel, GtControl control,
                                        int anticipation = 0);

// Post-treatment cells only, cohort-frequency weighted.
Estimate aggregate_gt_overall(const std::vector<GroupTimeEffect>& effects,
                              const PanelDataset& panel);
// All contrasts grouped by e = t - g (pre side carries the placebos).
EventStudyCurve aggregate_gt_event(const std::vector<GroupTimeEffect>& effects,
                                   const PanelDataset& panel);

enum class BaconKind { treated_vs_never, early_vs_late_pre, late_vs_early_post };

inline const char* bacon_kind_name(BaconKind k) {
  switch (k) {
    case BaconKind::treated_vs_never: return "TreatedVsNever";
    case BaconKind::early_vs_late_pre: return "EarlyVsLatePre";
    case BaconKind::late_vs_early_post: return "LateVsEarlyPost";
  }
  return "?";
}

struct BaconComparison {
  BaconKind kind;
  int treat_g = 0;
  int ctrl_g = 0;  // 0 = never-treated
  double did = 0.0;
  double weight = 0.0;
  bool forbidden = false;
};

struct BaconResult {
  std::vector<BaconComparison> comparisons;
  double beta_twfe = 0.0;        // from twfe_static on the same panel
  double reconstruction = 0.0;   // sum of weight * did
  double forbidden_share = 0.0;  // total weight on LateVsEarlyPost
};

BaconResult bacon_decompose(const PanelDataset& panel);

// Across-replication placebo summary. Points marked in-sample are reported
// but never flagged (they read residuals the model already minimized).
struct PreSamples {
  std::map<int, std::vector<double>> by_event;  // e < -1 only
  bool in_sample = false;
};

struct PretrendRow {
  std::string estimator;
  double mean_pre = 0.0;
  double max_abs_pre = 0.0;
  bool flagged = false;
  bool in_sample = false;
};

std::vector<PretrendRow> pretrend_report(
    const std::vector<std::pair<std::string, PreSamples>>& curves);

}  // namespace didlab
