#pragma once

#include <stdexcept>
#include <string>

namespace didlab {

// Machine-readable error codes. CLI prints them as "error: <name>: <message>".
enum class errc {
  duplicate_cell,
  unbalanced_panel,
  non_absorbing_treatment,
  degenerate_scenario,
  collinear_design,
  no_convergence,
  empty_event_bin,
  empty_control,
  empty_cohort,
  single_timing_group,
  unidentified_unit,
  unidentified_period,
  non_finite_input,
  not_applicable,
  empty_plan,
  bad_input,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::duplicate_cell: return "DuplicateCell";
    case errc::unbalanced_panel: return "UnbalancedPanel";
    case errc::non_absorbing_treatment: return "NonAbsorbingTreatment";
    case errc::degenerate_scenario: return "DegenerateScenario";
    case errc::collinear_design: return "CollinearDesign";
    case errc::no_convergence: return "NoConvergence";
    case errc::empty_event_bin: return "EmptyEventBin";
    case errc::empty_control: return "EmptyControl";
    case errc::empty_cohort: return "EmptyCohort";
    case errc::single_timing_group: return "SingleTimingGroup";
    case errc::unidentified_unit: return "UnidentifiedUnit";
    case errc::unidentified_period: return "UnidentifiedPeriod";
    case errc::non_finite_input: return "NonFiniteInput";
    case errc::not_applicable: return "NotApplicable";
    case errc::empty_plan: return "EmptyPlan";
    case errc::bad_input: return "BadInput";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace didlab
