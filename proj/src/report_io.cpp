// Report files, preset loading, and the single-panel estimate JSON.

#include <array>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "didlab/harness.hpp"

namespace didlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string shape_name(EffectShape s) {
  switch (s) {
    case EffectShape::step: return "step";
    case EffectShape::trend_break: return "trend-break";
    case EffectShape::inverted_u: return "inverted-u";
    case EffectShape::fade_out: return "fade-out";
  }
  return "?";
}

EffectShape shape_from(const std::string& s) {
  if (s == "step") return EffectShape::step;
  if (s == "trend-break") return EffectShape::trend_break;
  if (s == "inverted-u") return EffectShape::inverted_u;
  if (s == "fade-out") return EffectShape::fade_out;
  fail(errc::bad_input, "unknown effect shape " + s);
}

std::string control_name(GtControl c) {
  switch (c) {
    case GtControl::never_treated: return "never";
    case GtControl::not_yet_treated: return "notyet";
    case GtControl::both: return "both";
  }
  return "?";
}

GtControl control_from(const std::string& s) {
  if (s == "never") return GtControl::never_treated;
  if (s == "notyet") return GtControl::not_yet_treated;
  if (s == "both") return GtControl::both;
  fail(errc::bad_input, "unknown control group " + s);
}

json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["id"] = cfg.id;
  j["n_units"] = cfg.n_units;
  j["n_periods"] = cfg.n_periods;
  j["sigma_eps"] = cfg.sigma_eps;
  j["sigma_alpha"] = cfg.sigma_alpha;
  j["theta"] = cfg.theta;
  j["rho"] = cfg.rho;
  j["lambda_scale"] = cfg.lambda_scale;
  json t;
  t["mode"] = cfg.timing == TimingMode::distributed ? "distributed" : "two-timing";
  t["mean"] = cfg.timing_mean;
  t["sd"] = cfg.timing_sd;
  t["early"] = cfg.early_g;
  t["late"] = cfg.late_g;
  t["literal"] = cfg.timing_literal;
  j["timing"] = t;
  json e;
  e["shape"] = shape_name(cfg.shape);
  e["amplitude"] = cfg.amplitude;
  e["onset"] = cfg.shape_params.onset;
  e["rise"] = cfg.shape_params.rise;
  e["fall"] = cfg.shape_params.fall;
  e["fade_length"] = cfg.shape_params.fade_length;
  j["effect"] = e;
  j["group_ratio"] = cfg.group_ratio;
  if (cfg.anticipation.depth > 0) {
    json a;
    a["depth"] = cfg.anticipation.depth;
    a["magnitude"] = cfg.anticipation.magnitude;
    j["anticipation"] = a;
  }
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  cfg.id = j.value("id", std::string("scenario"));
  cfg.n_units = j.value("n_units", cfg.n_units);
  cfg.n_periods = j.value("n_periods", cfg.n_periods);
  cfg.sigma_eps = j.value("sigma_eps", cfg.sigma_eps);
  cfg.sigma_alpha = j.value("sigma_alpha", cfg.sigma_alpha);
  cfg.theta = j.value("theta", cfg.theta);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.lambda_scale = j.value("lambda_scale", cfg.lambda_scale);
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    const std::string mode = t.value("mode", std::string("distributed"));
    if (mode == "distributed")
      cfg.timing = TimingMode::distributed;
    else if (mode == "two-timing")
      cfg.timing = TimingMode::two_timing;
    else
      fail(errc::bad_input, "unknown timing mode " + mode);
    cfg.timing_mean = t.value("mean", cfg.timing_mean);
    cfg.timing_sd = t.value("sd", cfg.timing_sd);
    cfg.early_g = t.value("early", cfg.early_g);
    cfg.late_g = t.value("late", cfg.late_g);
    cfg.timing_literal = t.value("literal", false);
  }
  if (j.contains("effect")) {
    const json& e = j.at("effect");
    cfg.shape = shape_from(e.value("shape", std::string("step")));
    cfg.amplitude = e.value("amplitude", cfg.amplitude);
    cfg.shape_params.onset = e.value("onset", 0);
    cfg.shape_params.rise = e.value("rise", cfg.shape_params.rise);
    cfg.shape_params.fall = e.value("fall", cfg.shape_params.fall);
    cfg.shape_params.fade_length = e.value("fade_length", cfg.shape_params.fade_length);
  }
  cfg.group_ratio = j.value("group_ratio", cfg.group_ratio);
  if (j.contains("anticipation")) {
    cfg.anticipation.depth = j.at("anticipation").value("depth", 0);
    cfg.anticipation.magnitude = j.at("anticipation").value("magnitude", 0.0);
  }
  check_config(cfg);
  return cfg;
}

json mc_to_json(const McConfig& mc) {
  json j;
  j["grid_size"] = mc.grid_size;
  j["lambda_min_ratio"] = mc.lambda_min_ratio;
  j["folds"] = mc.folds;
  j["tol"] = mc.tol;
  j["max_iter"] = mc.max_iter;
  j["fixed_effects"] = mc.fixed_effects;
  j["placebo_leads"] = mc.placebo_leads;
  if (!mc.lambda_grid.empty()) j["lambda_grid"] = mc.lambda_grid;
  return j;
}

McConfig mc_from_json(const json& j) {
  McConfig mc;
  mc.grid_size = j.value("grid_size", mc.grid_size);
  mc.lambda_min_ratio = j.value("lambda_min_ratio", mc.lambda_min_ratio);
  mc.folds = j.value("folds", mc.folds);
  mc.tol = j.value("tol", mc.tol);
  mc.max_iter = j.value("max_iter", mc.max_iter);
  mc.fixed_effects = j.value("fixed_effects", true);
  mc.placebo_leads = j.value("placebo_leads", mc.placebo_leads);
  if (j.contains("lambda_grid")) mc.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  return mc;
}

json plan_to_json(const BenchPlan& plan) {
  json p;
  p["id"] = plan.id;
  p["reps"] = plan.reps;
  p["base_seed"] = plan.base_seed;
  p["estimators"] = plan.estimators;
  if (!plan.rep_override.empty()) p["rep_override"] = plan.rep_override;
  p["cs_control"] = control_name(plan.options.cs_control);
  p["cs_anticipation"] = plan.options.cs_anticipation;
  p["mc"] = mc_to_json(plan.options.mc);
  json scen = json::array();
  for (const auto& s : plan.scenarios) scen.push_back(scenario_to_json(s));
  p["scenarios"] = scen;
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt_hash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::uint64_t fnv64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (j.contains("scenario")) j = j.at("scenario");
  return scenario_from_json(j);
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
  json j;
  j["scenario"] = scenario_to_json(cfg);
  return j.dump(2) + "\n";
}

std::string resolve_preset(const std::string& name_or_path,
                           const std::vector<std::string>& search_dirs) {
  if (fs::exists(name_or_path)) return name_or_path;
  for (const auto& dir : search_dirs) {
    for (const auto& cand : {dir + "/" + name_or_path + ".json", dir + "/" + name_or_path}) {
      if (fs::exists(cand)) return cand;
    }
  }
  fail(errc::io_error, "preset not found: " + name_or_path);
}

ScenarioConfig load_scenario(const std::string& name_or_path,
                             const std::vector<std::string>& search_dirs) {
  const std::string path = resolve_preset(name_or_path, search_dirs);
  return scenario_from_json_text(read_file(path));
}

LoadedPlan load_plan(const std::string& name_or_path,
                     const std::vector<std::string>& search_dirs) {
  const std::string path = resolve_preset(name_or_path, search_dirs);
  const std::string text = read_file(path);
  json j = json::parse(text);

  LoadedPlan out;
  out.preset_hashes[fs::path(path).filename().string()] = fmt_hash(fnv64(text));

  if (j.contains("scenario")) {
    // single-scenario preset: wrap into a default plan
    out.plan.id = j.at("scenario").value("id", std::string("scenario"));
    out.plan.scenarios.push_back(scenario_from_json(j.at("scenario")));
    out.plan.estimators = all_estimators();
    return out;
  }
  if (!j.contains("plan")) fail(errc::bad_input, "expected a scenario or plan preset: " + path);
  const json& p = j.at("plan");
  out.plan.id = p.value("id", std::string("bench"));
  out.plan.reps = p.value("reps", out.plan.reps);
  out.plan.base_seed = p.value("base_seed", out.plan.base_seed);
  if (p.contains("estimators"))
    out.plan.estimators = p.at("estimators").get<std::vector<std::string>>();
  else
    out.plan.estimators = all_estimators();
  if (p.contains("rep_override"))
    out.plan.rep_override = p.at("rep_override").get<std::map<std::string, int>>();
  out.plan.options.cs_control = control_from(p.value("cs_control", std::string("never")));
  out.plan.options.cs_anticipation = p.value("cs_anticipation", 0);
  if (p.contains("mc")) out.plan.options.mc = mc_from_json(p.at("mc"));
  if (!p.contains("scenarios")) fail(errc::empty_plan, "plan has no scenarios: " + path);
  for (const auto& s : p.at("scenarios")) {
    if (s.is_string()) {
      const std::string spath = resolve_preset(s.get<std::string>(), search_dirs);
      const std::string stext = read_file(spath);
      out.preset_hashes[fs::path(spath).filename().string()] = fmt_hash(fnv64(stext));
      out.plan.scenarios.push_back(scenario_from_json_text(stext));
    } else {
      out.plan.scenarios.push_back(scenario_from_json(s));
    }
  }
  return out;
}

void emit_report(const SimulationReport& report, const std::string& out_dir) {
  if (report.summary.empty() && report.events.empty() && report.raw.empty())
    fail(errc::empty_plan, "nothing to emit");
  fs::create_directories(out_dir);

  {
    std::ofstream f(out_dir + "/summary.csv");
    if (!f) fail(errc::io_error, "cannot write summary.csv");
    f << "scenario,estimator,mean,abs_bias,rel_bias,sd,q05,q25,q50,q75,q95\n";
    for (const auto& r : report.summary) {
      f << r.scenario << ',' << r.estimator << ',' << fmt(r.mean) << ',' << fmt(r.abs_bias)
        << ',' << (r.rel_bias ? fmt(*r.rel_bias) : std::string()) << ',' << fmt(r.sd) << ','
        << fmt(r.q05) << ',' << fmt(r.q25) << ',' << fmt(r.q50) << ',' << fmt(r.q75) << ','
        << fmt(r.q95) << '\n';
    }
  }
  {
    std::ofstream f(out_dir + "/eventstudy.csv");
    if (!f) fail(errc::io_error, "cannot write eventstudy.csv");
    f << "scenario,estimator,e,mean,sd,truth,in_sample\n";
    for (const auto& r : report.events)
      f << r.scenario << ',' << r.estimator << ',' << r.e << ',' << fmt(r.mean) << ','
        << fmt(r.sd) << ',' << fmt(r.truth) << ',' << (r.in_sample ? 1 : 0) << '\n';
  }
  {
    std::ofstream f(out_dir + "/pretrend.csv");
    if (!f) fail(errc::io_error, "cannot write pretrend.csv");
    f << "scenario,estimator,mean_pre,max_abs_pre,flagged,in_sample\n";
    for (const auto& r : report.pretrend)
      f << r.scenario << ',' << r.row.estimator << ',' << fmt(r.row.mean_pre) << ','
        << fmt(r.row.max_abs_pre) << ',' << (r.row.flagged ? 1 : 0) << ','
        << (r.row.in_sample ? 1 : 0) << '\n';
  }
  if (!report.failures.empty()) {
    std::ofstream f(out_dir + "/failures.csv");
    if (!f) fail(errc::io_error, "cannot write failures.csv");
    f << "scenario,estimator,rep,error\n";
    for (const auto& r : report.failures) {
      std::string msg = r.error;
      for (auto& c : msg)
        if (c == ',' || c == '\n') c = ';';
      f << r.scenario << ',' << r.estimator << ',' << r.rep << ',' << msg << '\n';
    }
  }
  {
    std::ofstream f(out_dir + "/replications.csv");
    if (!f) fail(errc::io_error, "cannot write replications.csv");
    f << "scenario,estimator,rep,metric,e,value,in_sample\n";
    for (std::size_t s = 0; s < report.raw.size(); ++s) {
      const std::string& sid = report.plan.scenarios[s].id;
      for (const auto& r : report.raw[s]) {
        if (!r.panel_ok) continue;
        f << sid << ",," << r.rep << ",truth_overall,," << fmt(r.truth_overall) << ",0\n";
        for (const auto& [e, v] : r.truth_by_event)
          f << sid << ",," << r.rep << ",truth_e," << e << ',' << fmt(v) << ",0\n";
        for (const auto& [est, v] : r.overall)
          f << sid << ',' << est << ',' << r.rep << ",overall,," << fmt(v) << ",0\n";
        for (const auto& [est, curve] : r.curves)
          for (const auto& [e, pt] : curve)
            f << sid << ',' << est << ',' << r.rep << ",curve," << e << ',' << fmt(pt.value)
              << ',' << (pt.in_sample ? 1 : 0) << '\n';
      }
    }
  }
  {
    json m;
    m["didlab_version"] = "0.1.0";
    m["plan"] = plan_to_json(report.plan);
    m["preset_hashes"] = report.preset_hashes;
    m["partial_failures"] = report.failures.size();
    std::ofstream f(out_dir + "/manifest.json");
    if (!f) fail(errc::io_error, "cannot write manifest.json");
    f << m.dump(2) << '\n';
  }
}

SimulationReport load_raw_report(const std::string& dir) {
  SimulationReport report;
  {
    json m = json::parse(read_file(dir + "/manifest.json"));
    if (!m.contains("plan")) fail(errc::bad_input, "manifest has no plan");
    const json& p = m.at("plan");
    report.plan.id = p.value("id", std::string("bench"));
    report.plan.reps = p.value("reps", 200);
    report.plan.base_seed = p.value("base_seed", 42);
    report.plan.estimators = p.at("estimators").get<std::vector<std::string>>();
    if (p.contains("rep_override"))
      report.plan.rep_override = p.at("rep_override").get<std::map<std::string, int>>();
    report.plan.options.cs_control = control_from(p.value("cs_control", std::string("never")));
    report.plan.options.cs_anticipation = p.value("cs_anticipation", 0);
    if (p.contains("mc")) report.plan.options.mc = mc_from_json(p.at("mc"));
    for (const auto& s : p.at("scenarios"))
      report.plan.scenarios.push_back(scenario_from_json(s));
    if (m.contains("preset_hashes"))
      report.preset_hashes = m.at("preset_hashes").get<std::map<std::string, std::string>>();
  }

  std::map<std::string, int> scen_index;
  for (std::size_t s = 0; s < report.plan.scenarios.size(); ++s)
    scen_index[report.plan.scenarios[s].id] = static_cast<int>(s);
  report.raw.assign(report.plan.scenarios.size(), {});
  for (auto& v : report.raw) v.resize(report.plan.reps);

  std::ifstream f(dir + "/replications.csv");
  if (!f) fail(errc::io_error, "cannot open replications.csv");
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::array<std::string, 7> field;
    std::size_t start = 0;
    for (int k = 0; k < 7; ++k) {
      const std::size_t pos = k < 6 ? line.find(',', start) : line.size();
      if (pos == std::string::npos) fail(errc::bad_input, "bad row: " + line);
      field[k] = line.substr(start, pos - start);
      start = pos + 1;
    }
    const int s = scen_index.at(field[0]);
    const int rep = std::stoi(field[2]);
    auto& slot = report.raw[s][rep];
    slot.rep = rep;
    slot.panel_ok = true;
    const double value = std::stod(field[5]);
    if (field[3] == "truth_overall") {
      slot.truth_overall = value;
    } else if (field[3] == "truth_e") {
      slot.truth_by_event[std::stoi(field[4])] = value;
    } else if (field[3] == "overall") {
      slot.overall[field[1]] = value;
    } else if (field[3] == "curve") {
      slot.curves[field[1]][std::stoi(field[4])] = {value, field[6] == "1"};
    }
  }
  aggregate_report(report);
  return report;
}

std::string estimate_json(const PanelDataset& panel, const std::string& estimator,
                          const EstimatorOptions& options) {
  json out;
  out["estimator"] = estimator;
  json curve = json::array();

  auto curve_from_points = [&](const std::map<int, CurvePoint>& pts) {
    for (const auto& [e, pt] : pts) {
      json row;
      row["e"] = e;
      row["value"] = pt.value;
      if (pt.in_sample) row["in_sample"] = true;
      curve.push_back(row);
    }
  };

  if (estimator == "twfe") {
    out["overall"] = twfe_static(panel).value;
  } else if (estimator == "twfe-es") {
    int lead = options.es_max_lead, lag = options.es_max_lag;
    if (lead <= 0 || lag <= 0) {
      const auto [lo, hi] = event_window_support(panel);
      if (lead <= 0) lead = lo;
      if (lag <= 0) lag = hi;
    }
    curve_from_points(twfe_event_study(panel, lead, lag).points);
  } else if (estimator == "sa") {
    const auto sa = sun_abraham(panel, SaControl::never_treated);
    out["overall"] = sa.overall.value;
    curve_from_points(sa.curve.points);
  } else if (estimator == "cs") {
    const auto effects = att_gt_all(panel, options.cs_control, options.cs_anticipation);
    out["overall"] = aggregate_gt_overall(effects, panel).value;
    curve_from_points(aggregate_gt_event(effects, panel).points);
  } else if (estimator == "bjs") {
    const ControlModel cm = fit_control_model(panel);
    const CellEffects ce = impute_effects(panel, cm);
    out["overall"] = aggregate_uniform(ce).value;
    auto pts = aggregate_by_event(ce, panel).points;
    for (const auto& [e, v] : bjs_pretrend_residuals(panel, cm, panel.T - 2))
      pts[e] = {v, true};
    curve_from_points(pts);
  } else if (estimator == "mc") {
    const McResult mc = mc_effects(panel, options.mc);
    out["overall"] = aggregate_uniform(mc.effects).value;
    out["lambda_star"] = mc.lambda_star;
    auto pts = aggregate_by_event(mc.effects, panel).points;
    for (const auto& [e, v] :
         mc_pretrend_placebo(panel, options.mc, mc.lambda_star, options.mc.placebo_leads))
      pts[e] = {v, false};
    curve_from_points(pts);
  } else if (estimator == "etwfe") {
    const auto et = etwfe(panel);
    out["overall"] = et.overall.value;
    curve_from_points(et.curve.points);
  } else {
    fail(errc::bad_input, "unknown estimator " + estimator);
  }
  out["curve"] = curve;
  return out.dump(2) + "\n";
}

}  // namespace didlab
