#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "didlab/group_time.hpp"
#include "didlab/scenario.hpp"
#include "didlab/softimpute.hpp"

namespace didlab {

inline const std::vector<std::string>& all_estimators() {
  static const std::vector<std::string> v{"twfe", "twfe-es", "sa", "cs", "bjs", "mc", "etwfe"};
  return v;
}

// Per-estimator knobs shared by the bench and the estimate CLI.
struct EstimatorOptions {
  GtControl cs_control = GtControl::never_treated;
  int cs_anticipation = 0;
  McConfig mc;
  int es_max_lead = 0;  // 0 = derive from panel support
  int es_max_lag = 0;
};

struct BenchPlan {
  std::string id = "bench";
  std::vector<ScenarioConfig> scenarios;
  std::vector<std::string> estimators;
  int reps = 200;
  std::uint64_t base_seed = 42;
  std::map<std::string, int> rep_override;  // estimator -> smaller R
  EstimatorOptions options;
};

struct ReplicationResult {
  int rep = 0;
  bool panel_ok = false;
  std::string panel_error;
  double truth_overall = 0.0;
  std::map<int, double> truth_by_event;                       // includes e < 0
  std::map<std::string, double> overall;                      // per estimator
  std::map<std::string, std::map<int, CurvePoint>> curves;    // per estimator
  std::map<std::string, std::string> errors;                  // per-estimator failures
};

ReplicationResult run_replication(const ScenarioConfig& scenario,
                                  const std::vector<std::string>& estimators,
                                  std::uint64_t stream_seed, const EstimatorOptions& options);

struct SummaryRow {
  std::string scenario, estimator;
  int reps = 0;
  double mean = 0.0, abs_bias = 0.0, sd = 0.0;
  std::optional<double> rel_bias;  // null when truth == 0
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
  double truth = 0.0;
};

struct EventRow {
  std::string scenario, estimator;
  int e = 0;
  int reps = 0;
  double mean = 0.0, sd = 0.0, truth = 0.0;
  bool in_sample = false;
};

struct FailureRow {
  std::string scenario, estimator;
  int rep = 0;
  std::string error;
};

struct PretrendSummaryRow {
  std::string scenario;
  PretrendRow row;
};

struct SimulationReport {
  BenchPlan plan;
  std::map<std::string, std::string> preset_hashes;
  std::vector<SummaryRow> summary;
  std::vector<EventRow> events;
  std::vector<PretrendSummaryRow> pretrend;
  std::vector<FailureRow> failures;
  // raw store, replication level: scenario -> results
  std::vector<std::vector<ReplicationResult>> raw;
};

// workers <= 0: DIDLAB_WORKERS env var, then the OpenMP default. Reports are
// identical for every worker count.
SimulationReport run_bench(const BenchPlan& plan, int workers = 0);

// Re-aggregate a report from its raw replication store.
void aggregate_report(SimulationReport& report);

void emit_report(const SimulationReport& report, const std::string& out_dir);

// Rebuild summary/eventstudy/pretrend files from an emitted raw store.
SimulationReport load_raw_report(const std::string& dir);

int default_workers();

// --- JSON wiring -----------------------------------------------------------

ScenarioConfig scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioConfig& cfg);

struct LoadedPlan {
  BenchPlan plan;
  std::map<std::string, std::string> preset_hashes;  // name -> fnv64(file bytes)
};

// Accepts a plan preset, a scenario preset (wrapped into a one-scenario plan),
// or an emitted manifest.json. Names resolve through the search directories.
LoadedPlan load_plan(const std::string& name_or_path,
                     const std::vector<std::string>& search_dirs);

ScenarioConfig load_scenario(const std::string& name_or_path,
                             const std::vector<std::string>& search_dirs);

std::string resolve_preset(const std::string& name_or_path,
                           const std::vector<std::string>& search_dirs);

// Single-panel estimate (the estimate subcommand): JSON text
// {estimator, overall, curve:[{e, value}], lambda_star?}.
std::string estimate_json(const PanelDataset& panel, const std::string& estimator,
                          const EstimatorOptions& options);

std::uint64_t fnv64(const std::string& bytes);

}  // namespace didlab
