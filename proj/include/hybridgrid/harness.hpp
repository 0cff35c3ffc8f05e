#pragma once

#include <map>
#include <string>
#include <vector>

#include "hybridgrid/dcopf.hpp"
#include "hybridgrid/grid.hpp"
#include "json.hpp"

namespace hybridgrid {

using ProfileMap = std::map<std::string, std::vector<double>>;

struct HourResult {
  int hour = 0;                 // absolute hour index
  double total_load_mw = 0.0;   // scaled system load
  double res_capacity_mw = 0.0; // available RES capacity
  double total_cost_eur = 0.0;  // 0 when infeasible
  OpfStatus status = OpfStatus::infeasible;
};

struct ScenarioRun {
  std::string variant_id;
  int start_hour = 0;
  std::vector<HourResult> hours;  // contiguous from start_hour
  double sum_cost_eur = 0.0;      // over feasible hours
  int max_load_hour = 0;          // absolute index, first on ties
  int infeasible_count = 0;
};

/// Builds the per-hour scaling from the profiles referenced by the network
/// and merges in `extra` (extra wins on key collisions).
ProfileMap merged_profiles(const Network& net, const ProfileMap& extra);

/// One OPF per hour in [start_hour, start_hour + n_hours). Missing or short
/// profiles are an error before any solve; infeasible hours are recorded and
/// the run continues. Hours are solved concurrently (max_threads <= 0 picks
/// a default; the HYBRIDGRID_THREADS environment variable caps it) and
/// assembled in hour order, so output is independent of scheduling.
ScenarioRun run_week(const Network& net, const ProfileMap& profiles,
                     int start_hour, int n_hours, const std::string& variant_id,
                     int max_threads = 0);

struct CompareRow {
  int hour = 0;
  HourResult a;
  HourResult b;
  double delta = 0.0;      // b - a, only meaningful when both feasible
  double rel_delta = 0.0;  // delta / cost_a
  bool both_feasible = false;
};

struct Comparison {
  std::vector<CompareRow> rows;
  double total_a = 0.0;  // over hours where both variants are feasible
  double total_b = 0.0;
  double delta_total = 0.0;
  double max_rel_gap = 0.0;
};

/// Per-hour deltas and weekly totals. Throws ValidationError when the hour
/// ranges differ.
Comparison compare(const ScenarioRun& a, const ScenarioRun& b);

/// CSV with one row per hour: load, RES capacity, cost and status per
/// variant, and the cost delta. The multi-window form concatenates rows of
/// several (a, b) window pairs under one header and one total line.
std::string comparison_csv(const ScenarioRun& a, const ScenarioRun& b);
std::string comparison_csv(const std::vector<ScenarioRun>& a_windows,
                           const std::vector<ScenarioRun>& b_windows);

struct ExtremeWeeks {
  int min_week_start = 0;
  int max_week_start = 0;
};

/// Start hours of the 168 h windows (aligned to week boundaries from hour 0,
/// clamped so the window fits the year) containing the hours of minimum and
/// maximum total system load. Ties pick the earliest hour.
ExtremeWeeks find_extreme_weeks(const Network& net, const ProfileMap& profiles,
                                int year_hours);

nlohmann::json run_to_json(const ScenarioRun& run);

}  // namespace hybridgrid
