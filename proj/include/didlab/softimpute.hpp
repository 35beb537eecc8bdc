#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "didlab/impute.hpp"
#include "didlab/panel.hpp"
#include "didlab/rng.hpp"

namespace didlab {

using ObsMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Nuclear-norm matrix completion settings. The objective is
//   (1/|O|) sum_O (Y - L - u_i - v_t)^2 + lambda * ||L||_*
// so the SVT threshold is lambda * |O| / 2 and full shrinkage happens at
// lambda_max = 2 * sigma_max / |O|.
struct McConfig {
  int grid_size = 50;
  double lambda_min_ratio = 1e-3;
  std::vector<double> lambda_grid;  // optional explicit grid, descending
  int folds = 5;
  double tol = 1e-8;
  int max_iter = 2000;
  bool fixed_effects = true;  // unpenalized alpha_i, zeta_t
  std::uint64_t cv_seed = 0;
  int placebo_leads = 5;
};

struct SoftImputeFit {
  Eigen::MatrixXd L;
  Eigen::VectorXd u;  // row (unit) effects
  Eigen::VectorXd v;  // column (period) effects
  std::vector<double> objective;  // per accepted iteration, non-increasing
  int iterations = 0;
  Eigen::MatrixXd fitted() const {
    return (L.colwise() + u).rowwise() + v.transpose();
  }
};

SoftImputeFit soft_impute(const Eigen::MatrixXd& y, const ObsMask& obs, double lambda,
                          const McConfig& cfg, const SoftImputeFit* warm = nullptr);

// Smallest lambda with L = 0 (fit reduces to the additive two-way model).
double lambda_max(const Eigen::MatrixXd& y, const ObsMask& obs, bool fixed_effects = true);

std::vector<double> make_lambda_grid(double lmax, const McConfig& cfg);

// K-fold CV over observed cells, warm-started descending grid; returns the
// lambda with the smallest mean held-out squared error. Deterministic given
// the rng state.
double cross_validate_lambda(const Eigen::MatrixXd& y, const ObsMask& obs, const McConfig& cfg,
                             Rng& rng);

struct McResult {
  CellEffects effects;
  double lambda_star = 0.0;
  double lambda_max = 0.0;
};

McResult mc_effects(const PanelDataset& panel, const McConfig& cfg);

// Placebo pre-treatment estimates: re-fit with the near-treatment pre-window
// masked out (each unit keeps its earliest pre-periods) and report y - fit on
// the held-out cells by event time. Out-of-sample, so flag-eligible.
std::map<int, double> mc_pretrend_placebo(const PanelDataset& panel, const McConfig& cfg,
                                          double lambda, int leads);

ObsMask untreated_mask(const PanelDataset& panel);

}  // namespace didlab
