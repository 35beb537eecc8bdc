// Scenario data generator: y = alpha_i + theta*t + rho*t*D_i + delta + eps,
// treatment assigned by a logistic of the unit effect, timing drawn around the
// middle of the window. Substreams keep draws aligned across scenarios that
// share (N, T, seed).

#include "didlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace didlab {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

constexpr std::uint64_t kStreamAlpha = 1;
constexpr std::uint64_t kStreamTreat = 2;
constexpr std::uint64_t kStreamTiming = 3;
constexpr std::uint64_t kStreamEps = 4;

}  // namespace

void check_config(const ScenarioConfig& cfg) {
  if (cfg.n_units < 2 || cfg.n_periods < 3)
    fail(errc::bad_input, "need N >= 2 and T >= 3");
  if (cfg.sigma_eps <= 0.0 || cfg.sigma_alpha <= 0.0)
    fail(errc::bad_input, "sigma_eps and sigma_alpha must be > 0");
  if (cfg.amplitude < 0.0) fail(errc::bad_input, "amplitude must be >= 0");
  if (cfg.group_ratio <= 0.0 || cfg.group_ratio > 1.0)
    fail(errc::bad_input, "group_ratio must be in (0, 1]");
  if (cfg.timing == TimingMode::two_timing &&
      !(cfg.early_g < cfg.late_g && cfg.late_g <= cfg.n_periods))
    fail(errc::bad_input, "two-timing requires early < late <= T");
}

std::vector<std::uint8_t> assign_treatment(const std::vector<double>& alpha, double lambda_scale,
                                           Rng& rng) {
  std::vector<std::uint8_t> d(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i)
    d[i] = rng.bernoulli(logistic(lambda_scale * alpha[i])) ? 1 : 0;
  return d;
}

std::vector<int> draw_timing(const ScenarioConfig& cfg, const std::vector<std::uint8_t>& treated,
                             Rng& rng) {
  const int T = cfg.n_periods;
  std::vector<int> g(treated.size(), 0);
  if (cfg.timing == TimingMode::two_timing) {
    // first half of the treated (in unit order) gets the early timing
    long long k = std::count(treated.begin(), treated.end(), std::uint8_t{1});
    long long n_early = (k + 1) / 2, assigned = 0;
    for (std::size_t i = 0; i < treated.size(); ++i) {
      if (!treated[i]) continue;
      g[i] = assigned < n_early ? cfg.early_g : cfg.late_g;
      ++assigned;
    }
    return g;
  }
  for (std::size_t i = 0; i < treated.size(); ++i) {
    if (!treated[i]) continue;
    if (cfg.timing_literal) {
      // per-period Bernoulli of a logistic of the normal CDF, taken verbatim;
      // this piles mass onto the first periods and is kept for comparison only
      int first = T;
      for (int t = 1; t <= T; ++t) {
        const double phi = normal_cdf((t - cfg.timing_mean) / cfg.timing_sd);
        if (rng.bernoulli(logistic(cfg.lambda_scale * phi))) {
          first = t;
          break;
        }
      }
      g[i] = first;
    } else {
      const long draw = std::lround(rng.normal(cfg.timing_mean, cfg.timing_sd));
      g[i] = static_cast<int>(std::clamp<long>(draw, 2, T - 1));
    }
  }
  return g;
}

GeneratedPanel generate_panel(const ScenarioConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  const int N = cfg.n_units, T = cfg.n_periods;

  Rng r_alpha(substream(seed, kStreamAlpha));
  Rng r_treat(substream(seed, kStreamTreat));
  Rng r_timing(substream(seed, kStreamTiming));
  Rng r_eps(substream(seed, kStreamEps));

  std::vector<double> alpha(N);
  for (int i = 0; i < N; ++i) alpha[i] = r_alpha.normal(0.0, cfg.sigma_alpha);

  const std::vector<std::uint8_t> treated = assign_treatment(alpha, cfg.lambda_scale, r_treat);
  const std::vector<int> g = draw_timing(cfg, treated, r_timing);

  if (std::count(treated.begin(), treated.end(), std::uint8_t{0}) == 0)
    fail(errc::degenerate_scenario, "no never-treated units (control group starvation)");
  if (std::count(treated.begin(), treated.end(), std::uint8_t{1}) == 0)
    fail(errc::degenerate_scenario, "no treated units");

  GeneratedPanel gp;
  gp.path = build_effect_path(cfg.shape, cfg.amplitude, cfg.anticipation, T, cfg.shape_params);
  gp.late.assign(N, 0);
  for (int i = 0; i < N; ++i) {
    if (!treated[i]) continue;
    gp.late[i] = cfg.timing == TimingMode::two_timing ? (g[i] == cfg.late_g)
                                                      : (g[i] >= 9);
  }

  PanelDataset& p = gp.panel;
  p.units.resize(N);
  for (int i = 0; i < N; ++i) p.units[i] = i + 1;
  p.T = T;
  p.y.setZero(N, T);
  p.d.setZero(N, T);
  p.cohort.assign(N, 0);
  p.ever_treated = treated;
  gp.truth.setZero(N, T);

  for (int i = 0; i < N; ++i) {
    p.cohort[i] = g[i];
    const double ratio = gp.late[i] ? cfg.group_ratio : 1.0;
    for (int t = 1; t <= T; ++t) {
      double delta = 0.0;
      if (g[i] > 0) {
        if (t >= g[i]) p.d(i, t - 1) = 1;
        delta = gp.path.at(t - g[i]) * ratio;
      }
      gp.truth(i, t - 1) = delta;
      const double eps = r_eps.normal(0.0, cfg.sigma_eps);
      p.y(i, t - 1) =
          alpha[i] + cfg.theta * t + cfg.rho * t * (treated[i] ? 1.0 : 0.0) + delta + eps;
    }
  }
  return gp;
}

double true_att_overall(const GeneratedPanel& gp) {
  double sum = 0.0;
  long long n = 0;
  const PanelDataset& p = gp.panel;
  for (int i = 0; i < p.n_units(); ++i) {
    if (p.cohort[i] == 0) continue;
    for (int t = p.cohort[i]; t <= p.T; ++t) {
      sum += gp.truth(i, t - 1);
      ++n;
    }
  }
  if (n == 0) fail(errc::empty_cohort, "no treated cells");
  return sum / static_cast<double>(n);
}

std::map<int, double> true_att_by_event(const GeneratedPanel& gp) {
  std::map<int, std::pair<double, long long>> acc;
  const PanelDataset& p = gp.panel;
  for (int i = 0; i < p.n_units(); ++i) {
    if (p.cohort[i] == 0) continue;
    for (int t = p.cohort[i]; t <= p.T; ++t) {
      auto& a = acc[t - p.cohort[i]];
      a.first += gp.truth(i, t - 1);
      a.second += 1;
    }
  }
  std::map<int, double> out;
  for (const auto& [e, a] : acc) out[e] = a.first / static_cast<double>(a.second);
  return out;
}

std::map<int, double> truth_by_event_all(const GeneratedPanel& gp) {
  std::map<int, std::pair<double, long long>> acc;
  const PanelDataset& p = gp.panel;
  for (int i = 0; i < p.n_units(); ++i) {
    if (p.cohort[i] == 0) continue;
    for (int t = 1; t <= p.T; ++t) {
      auto& a = acc[t - p.cohort[i]];
      a.first += gp.truth(i, t - 1);
      a.second += 1;
    }
  }
  std::map<int, double> out;
  for (const auto& [e, a] : acc) out[e] = a.first / static_cast<double>(a.second);
  return out;
}

void write_truth_csv(const GeneratedPanel& gp, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(errc::io_error, "cannot write " + path);
  std::fputs("unit,period,delta_true\n", f);
  const PanelDataset& p = gp.panel;
  for (int i = 0; i < p.n_units(); ++i)
    for (int t = 1; t <= p.T; ++t)
      std::fprintf(f, "%lld,%d,%.17g\n", p.units[i], t, gp.truth(i, t - 1));
  std::fclose(f);
}

}  // namespace didlab
