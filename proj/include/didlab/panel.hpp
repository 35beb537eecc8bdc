#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "didlab/errors.hpp"

namespace didlab {

// One input observation (long format).
struct PanelRow {
  long long unit;
  int period;
  double y;
  int d;
};

// Balanced unit x period panel with an absorbing binary treatment.
// Periods are 1..T. cohort[i] is the first treated period, 0 for never-treated.
// Immutable after construction; all estimators take it by const reference.
struct PanelDataset {
  std::vector<long long> units;  // external ids, index-aligned with rows of y
  int T = 0;
  Eigen::MatrixXd y;                                          // N x T
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> d;  // N x T, {0,1}
  std::vector<int> cohort;                                    // derived, 0 = never
  std::vector<std::uint8_t> ever_treated;                     // derived

  int n_units() const { return static_cast<int>(units.size()); }
  int n_periods() const { return T; }
  bool treated_cell(int i, int t) const { return d(i, t - 1) != 0; }
};

struct CohortLabel {
  bool treated = false;
  int g = 0;  // first treated period when treated
};

PanelDataset validate_panel(std::span<const PanelRow> rows);

std::map<long long, CohortLabel> derive_cohorts(const PanelDataset& panel);

// e = t - g; NotApplicable for never-treated labels.
int event_time(int t, const CohortLabel& label);

// Panel CSV schema: header "unit,period,y,d".
PanelDataset read_panel_csv(const std::string& path);
void write_panel_csv(const PanelDataset& panel, const std::string& path);

// Cohort x period cell means with unit counts. Every regressor used by the
// estimators in this project is constant within these cells, so weighted
// regressions on the collapsed table reproduce the unit-level fits exactly
// (balanced panel).
struct CohortCells {
  std::vector<int> cohorts;   // ascending; cohorts[0] == 0 iff never-treated present
  std::vector<double> n;      // unit count per cohort
  Eigen::MatrixXd ybar;       // C x T
  bool has_never() const { return !cohorts.empty() && cohorts.front() == 0; }
  int index_of(int g) const;  // -1 when absent
};

CohortCells collapse_by_cohort(const PanelDataset& panel);

}  // namespace didlab
