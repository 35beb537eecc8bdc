#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "didlab/effect_path.hpp"
#include "didlab/panel.hpp"
#include "didlab/rng.hpp"

namespace didlab {

enum class TimingMode { distributed, two_timing };

// Full DGP parameterization for one simulated scenario.
struct ScenarioConfig {
  std::string id = "scenario";
  int n_units = 2000;
  int n_periods = 15;
  double sigma_eps = 0.2;
  double sigma_alpha = 1.0;
  double theta = 0.2;           // common linear trend per period
  double rho = 0.0;             // extra trend slope for ever-treated units
  double lambda_scale = 5.0;    // logistic scale in treatment assignment
  TimingMode timing = TimingMode::distributed;
  double timing_mean = 8.0;
  double timing_sd = 2.0;
  bool timing_literal = false;  // per-period Bernoulli hazard variant
  int early_g = 4;
  int late_g = 12;
  EffectShape shape = EffectShape::step;
  double amplitude = 0.2;
  ShapeParams shape_params;
  double group_ratio = 1.0;     // late-group effect multiplier
  Anticipation anticipation;
};

void check_config(const ScenarioConfig& cfg);

struct GeneratedPanel {
  PanelDataset panel;
  Eigen::MatrixXd truth;            // N x T, delta_true (0 outside effect window)
  std::vector<std::uint8_t> late;   // L_i
  EffectPath path;
};

// Eq.-level pieces, exposed for direct testing.
std::vector<std::uint8_t> assign_treatment(const std::vector<double>& alpha, double lambda_scale,
                                           Rng& rng);
std::vector<int> draw_timing(const ScenarioConfig& cfg, const std::vector<std::uint8_t>& treated,
                             Rng& rng);

GeneratedPanel generate_panel(const ScenarioConfig& cfg, std::uint64_t seed);

// Oracle all bias metrics compare against.
double true_att_overall(const GeneratedPanel& gp);
std::map<int, double> true_att_by_event(const GeneratedPanel& gp);  // e >= 0
// Truth path including anticipation entries (e < 0), for reports.
std::map<int, double> truth_by_event_all(const GeneratedPanel& gp);

void write_truth_csv(const GeneratedPanel& gp, const std::string& path);

}  // namespace didlab
