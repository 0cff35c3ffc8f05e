#include "hybridgrid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "hybridgrid/json_canon.hpp"

namespace hybridgrid {

namespace {

using nlohmann::json;

int thread_budget(int requested, int n_jobs) {
  int threads = requested > 0
                    ? requested
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  if (const char* cap = std::getenv("HYBRIDGRID_THREADS")) {
    const int limit = std::atoi(cap);
    if (limit > 0) threads = std::min(threads, limit);
  }
  return std::max(1, std::min(threads, n_jobs));
}

const std::vector<double>& profile_series(const ProfileMap& profiles,
                                          const std::string& pid,
                                          const std::string& owner) {
  auto it = profiles.find(pid);
  if (it == profiles.end())
    throw ValidationError(owner + ": missing profile '" + pid + "'");
  return it->second;
}

}  // namespace

ProfileMap merged_profiles(const Network& net, const ProfileMap& extra) {
  ProfileMap merged = net.profiles;
  for (const auto& [pid, series] : extra) merged[pid] = series;
  return merged;
}

ScenarioRun run_week(const Network& net, const ProfileMap& profiles,
                     int start_hour, int n_hours, const std::string& variant_id,
                     int max_threads) {
  if (start_hour < 0 || n_hours <= 0)
    throw ValidationError("run_week: invalid hour range");

  // Every referenced profile must exist and cover the window before any
  // solve starts.
  const std::size_t need = static_cast<std::size_t>(start_hour) +
                           static_cast<std::size_t>(n_hours);
  for (const auto& bus : net.buses) {
    if (!bus.load_profile_id) continue;
    std::ostringstream owner;
    owner << "bus " << bus.id;
    const auto& series = profile_series(profiles, *bus.load_profile_id, owner.str());
    if (series.size() < need)
      throw ValidationError(owner.str() + ": profile '" + *bus.load_profile_id +
                            "' shorter than the requested window");
  }
  for (const auto& gen : net.generators) {
    if (gen.kind != GeneratorKind::res || !gen.res_profile_id) continue;
    std::ostringstream owner;
    owner << "generator " << gen.id;
    const auto& series = profile_series(profiles, *gen.res_profile_id, owner.str());
    if (series.size() < need)
      throw ValidationError(owner.str() + ": profile '" + *gen.res_profile_id +
                            "' shorter than the requested window");
    for (std::size_t h = static_cast<std::size_t>(start_hour); h < need; ++h)
      if (series[h] < 0.0 || series[h] > 1.0)
        throw ValidationError(owner.str() + ": RES availability outside [0, 1]");
  }

  ScenarioRun run;
  run.variant_id = variant_id;
  run.start_hour = start_hour;
  run.hours.resize(static_cast<std::size_t>(n_hours));

  std::atomic<int> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const int slot = cursor.fetch_add(1);
      if (slot >= n_hours) return;
      const int hour = start_hour + slot;
      try {
        OpfProblem prob;
        prob.net = net;
        double total_load = 0.0;
        for (const auto& bus : net.buses) {
          double scale = 1.0;
          if (bus.load_profile_id)
            scale = profiles.at(*bus.load_profile_id)[static_cast<std::size_t>(hour)];
          prob.load_scale[bus.id] = scale;
          total_load += bus.load_mw * scale;
        }
        double res_capacity = 0.0;
        for (const auto& gen : net.generators) {
          if (gen.kind != GeneratorKind::res) continue;
          double factor = 1.0;
          if (gen.res_profile_id)
            factor = profiles.at(*gen.res_profile_id)[static_cast<std::size_t>(hour)];
          prob.res_availability[gen.id] = factor;
          res_capacity += factor * gen.p_max;
        }
        const OpfSolution sol = solve(prob);
        HourResult& out = run.hours[static_cast<std::size_t>(slot)];
        out.hour = hour;
        out.total_load_mw = total_load;
        out.res_capacity_mw = res_capacity;
        out.status = sol.status;
        out.total_cost_eur = sol.status == OpfStatus::optimal ? sol.total_cost : 0.0;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = thread_budget(max_threads, n_hours);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  run.max_load_hour = start_hour;
  double max_load = -1.0;
  for (const auto& hr : run.hours) {
    if (hr.status == OpfStatus::optimal)
      run.sum_cost_eur += hr.total_cost_eur;
    else
      ++run.infeasible_count;
    if (hr.total_load_mw > max_load) {
      max_load = hr.total_load_mw;
      run.max_load_hour = hr.hour;
    }
  }
  return run;
}

Comparison compare(const ScenarioRun& a, const ScenarioRun& b) {
  if (a.start_hour != b.start_hour || a.hours.size() != b.hours.size())
    throw ValidationError("compare: runs cover different hour ranges");

  Comparison cmp;
  for (std::size_t i = 0; i < a.hours.size(); ++i) {
    CompareRow row;
    row.hour = a.hours[i].hour;
    row.a = a.hours[i];
    row.b = b.hours[i];
    row.both_feasible = a.hours[i].status == OpfStatus::optimal &&
                        b.hours[i].status == OpfStatus::optimal;
    if (row.both_feasible) {
      row.delta = row.b.total_cost_eur - row.a.total_cost_eur;
      row.rel_delta = row.a.total_cost_eur != 0.0
                          ? row.delta / row.a.total_cost_eur
                          : 0.0;
      cmp.total_a += row.a.total_cost_eur;
      cmp.total_b += row.b.total_cost_eur;
      cmp.max_rel_gap = std::max(cmp.max_rel_gap, std::abs(row.rel_delta));
    }
    cmp.rows.push_back(row);
  }
  cmp.delta_total = cmp.total_b - cmp.total_a;
  return cmp;
}

std::string comparison_csv(const std::vector<ScenarioRun>& a_windows,
                           const std::vector<ScenarioRun>& b_windows) {
  if (a_windows.empty() || a_windows.size() != b_windows.size())
    throw ValidationError("comparison_csv: mismatched window lists");

  std::ostringstream ss;
  const std::string& va = a_windows.front().variant_id;
  const std::string& vb = b_windows.front().variant_id;
  ss << "hour,load_mw_" << va << ",res_mw_" << va << ",cost_" << va
     << ",status_" << va << ",load_mw_" << vb << ",res_mw_" << vb << ",cost_"
     << vb << ",status_" << vb << ",delta,rel_delta\n";
  auto status = [](OpfStatus s) {
    return s == OpfStatus::optimal ? "optimal" : "infeasible";
  };

  double total_a = 0.0, total_b = 0.0, max_rel_gap = 0.0;
  for (std::size_t w = 0; w < a_windows.size(); ++w) {
    const Comparison cmp = compare(a_windows[w], b_windows[w]);
    for (const auto& row : cmp.rows) {
      ss << row.hour << "," << format_real(row.a.total_load_mw) << ","
         << format_real(row.a.res_capacity_mw) << ","
         << format_real(row.a.total_cost_eur) << "," << status(row.a.status)
         << "," << format_real(row.b.total_load_mw) << ","
         << format_real(row.b.res_capacity_mw) << ","
         << format_real(row.b.total_cost_eur) << "," << status(row.b.status)
         << ",";
      if (row.both_feasible)
        ss << format_real(row.delta) << "," << format_real(row.rel_delta);
      else
        ss << ",";
      ss << "\n";
    }
    total_a += cmp.total_a;
    total_b += cmp.total_b;
    max_rel_gap = std::max(max_rel_gap, cmp.max_rel_gap);
  }
  ss << "total,,," << format_real(total_a) << ",,,," << format_real(total_b)
     << ",," << format_real(total_b - total_a) << "," << format_real(max_rel_gap)
     << "\n";
  return ss.str();
}

std::string comparison_csv(const ScenarioRun& a, const ScenarioRun& b) {
  return comparison_csv(std::vector<ScenarioRun>{a},
                        std::vector<ScenarioRun>{b});
}

ExtremeWeeks find_extreme_weeks(const Network& net, const ProfileMap& profiles,
                                int year_hours) {
  if (year_hours < 168)
    throw ValidationError("find_extreme_weeks: need at least 168 hours");
  for (const auto& bus : net.buses) {
    if (!bus.load_profile_id) continue;
    std::ostringstream owner;
    owner << "bus " << bus.id;
    const auto& series = profile_series(profiles, *bus.load_profile_id, owner.str());
    if (series.size() < static_cast<std::size_t>(year_hours))
      throw ValidationError(owner.str() + ": profile '" + *bus.load_profile_id +
                            "' shorter than the year");
  }

  int min_hour = 0, max_hour = 0;
  double min_load = 0.0, max_load = 0.0;
  for (int h = 0; h < year_hours; ++h) {
    double load = 0.0;
    for (const auto& bus : net.buses) {
      double scale = 1.0;
      if (bus.load_profile_id)
        scale = profiles.at(*bus.load_profile_id)[static_cast<std::size_t>(h)];
      load += bus.load_mw * scale;
    }
    if (h == 0 || load < min_load) {
      min_load = load;
      min_hour = h;
    }
    if (h == 0 || load > max_load) {
      max_load = load;
      max_hour = h;
    }
  }

  auto week_start = [year_hours](int hour) {
    const int aligned = 168 * (hour / 168);
    return std::min(aligned, year_hours - 168);
  };
  return {week_start(min_hour), week_start(max_hour)};
}

json run_to_json(const ScenarioRun& run) {
  json hours = json::array();
  for (const auto& hr : run.hours) {
    hours.push_back({{"hour", hr.hour},
                     {"total_load_mw", hr.total_load_mw},
                     {"res_capacity_mw", hr.res_capacity_mw},
                     {"total_cost_eur", hr.total_cost_eur},
                     {"status", hr.status == OpfStatus::optimal ? "optimal"
                                                                : "infeasible"}});
  }
  return {{"variant_id", run.variant_id},
          {"start_hour", run.start_hour},
          {"hours", std::move(hours)},
          {"aggregate",
           {{"sum_cost_eur", run.sum_cost_eur},
            {"max_load_hour", run.max_load_hour},
            {"infeasible_count", run.infeasible_count}}}};
}

}  // namespace hybridgrid
