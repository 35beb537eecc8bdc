// Panel validation, cohort bookkeeping and CSV round-trips.

#include "didlab/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace didlab {

PanelDataset validate_panel(std::span<const PanelRow> rows) {
  if (rows.empty()) fail(errc::bad_input, "empty input");

  std::vector<long long> units;
  int tmin = rows.front().period, tmax = rows.front().period;
  {
    std::unordered_map<long long, int> seen;
    for (const auto& r : rows) {
      if (seen.emplace(r.unit, 1).second) units.push_back(r.unit);
      tmin = std::min(tmin, r.period);
      tmax = std::max(tmax, r.period);
    }
  }
  if (tmin != 1)
    fail(errc::unbalanced_panel, "periods must start at 1, found " + std::to_string(tmin));
  const int T = tmax;
  std::sort(units.begin(), units.end());

  const int N = static_cast<int>(units.size());
  std::unordered_map<long long, int> row_of;
  row_of.reserve(units.size());
  for (int i = 0; i < N; ++i) row_of.emplace(units[i], i);

  PanelDataset p;
  p.units = std::move(units);
  p.T = T;
  p.y.setZero(N, T);
  p.d.setZero(N, T);
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> filled(N, T);
  filled.setZero();

  for (const auto& r : rows) {
    if (r.period < 1 || r.period > T)
      fail(errc::unbalanced_panel, "period out of range for unit " + std::to_string(r.unit));
    if (r.d != 0 && r.d != 1)
      fail(errc::bad_input, "d must be 0/1, unit " + std::to_string(r.unit));
    if (!std::isfinite(r.y))
      fail(errc::non_finite_input, "y not finite at unit " + std::to_string(r.unit));
    const int i = row_of.at(r.unit);
    if (filled(i, r.period - 1))
      fail(errc::duplicate_cell,
           "unit " + std::to_string(r.unit) + ", period " + std::to_string(r.period));
    filled(i, r.period - 1) = 1;
    p.y(i, r.period - 1) = r.y;
    p.d(i, r.period - 1) = static_cast<std::int8_t>(r.d);
  }

  if (static_cast<long long>(rows.size()) != static_cast<long long>(N) * T ||
      filled.cast<int>().sum() != N * T)
    fail(errc::unbalanced_panel, "every (unit, period) pair must be present exactly once");

  p.cohort.assign(N, 0);
  p.ever_treated.assign(N, 0);
  for (int i = 0; i < N; ++i) {
    int first = 0;
    for (int t = 1; t <= T; ++t) {
      if (p.d(i, t - 1)) {
        if (first == 0) first = t;
      } else if (first != 0) {
        fail(errc::non_absorbing_treatment,
             "unit " + std::to_string(p.units[i]) + " reverts to untreated at period " +
                 std::to_string(t));
      }
    }
    p.cohort[i] = first;
    p.ever_treated[i] = first != 0;
  }
  return p;
}

std::map<long long, CohortLabel> derive_cohorts(const PanelDataset& panel) {
  std::map<long long, CohortLabel> out;
  for (int i = 0; i < panel.n_units(); ++i) {
    CohortLabel label;
    label.treated = panel.cohort[i] != 0;
    label.g = panel.cohort[i];
    out.emplace(panel.units[i], label);
  }
  return out;
}

int event_time(int t, const CohortLabel& label) {
  if (!label.treated) fail(errc::not_applicable, "event time undefined for never-treated");
  return t - label.g;
}

PanelDataset read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(errc::io_error, "empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "unit,period,y,d")
    fail(errc::bad_input, "expected header unit,period,y,d in " + path);

  std::vector<PanelRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    PanelRow r{};
    char* end = nullptr;
    const char* s = line.c_str();
    r.unit = std::strtoll(s, &end, 10);
    if (*end != ',') fail(errc::bad_input, "bad row: " + line);
    r.period = static_cast<int>(std::strtol(end + 1, &end, 10));
    if (*end != ',') fail(errc::bad_input, "bad row: " + line);
    r.y = std::strtod(end + 1, &end);
    if (*end != ',') fail(errc::bad_input, "bad row: " + line);
    r.d = static_cast<int>(std::strtol(end + 1, &end, 10));
    if (*end != '\0') fail(errc::bad_input, "bad row: " + line);
    rows.push_back(r);
  }
  return validate_panel(rows);
}

void write_panel_csv(const PanelDataset& panel, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(errc::io_error, "cannot write " + path);
  std::fputs("unit,period,y,d\n", f);
  for (int i = 0; i < panel.n_units(); ++i)
    for (int t = 1; t <= panel.T; ++t)
      std::fprintf(f, "%lld,%d,%.17g,%d\n", panel.units[i], t, panel.y(i, t - 1),
                   static_cast<int>(panel.d(i, t - 1)));
  std::fclose(f);
}

int CohortCells::index_of(int g) const {
  auto it = std::lower_bound(cohorts.begin(), cohorts.end(), g);
  if (it == cohorts.end() || *it != g) return -1;
  return static_cast<int>(it - cohorts.begin());
}

CohortCells collapse_by_cohort(const PanelDataset& panel) {
  CohortCells cells;
  cells.cohorts = panel.cohort;
  std::sort(cells.cohorts.begin(), cells.cohorts.end());
  cells.cohorts.erase(std::unique(cells.cohorts.begin(), cells.cohorts.end()),
                      cells.cohorts.end());
  const int C = static_cast<int>(cells.cohorts.size());
  cells.n.assign(C, 0.0);
  cells.ybar.setZero(C, panel.T);
  for (int i = 0; i < panel.n_units(); ++i) {
    const int c = cells.index_of(panel.cohort[i]);
    cells.n[c] += 1.0;
    cells.ybar.row(c) += panel.y.row(i);
  }
  for (int c = 0; c < C; ++c) cells.ybar.row(c) /= cells.n[c];
  return cells;
}

}  // namespace didlab
