#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "hybridgrid/harness.hpp"

using namespace hybridgrid;
using namespace hybridgrid::testing;

namespace {

/// Two-bus fixture with a load profile on bus 2 and a RES profile on a third
/// generator; profile length configurable.
Network profiled_net(int hours, double load_base = 1.0) {
  Network net;
  net.buses = {make_bus(1), make_bus(2, 80.0, "L")};
  net.branches = {make_branch(1, 1, 2, 0.01, 10.0, 400.0)};
  net.generators = {make_gen(1, 1, 150.0, 20.0),
                    make_gen(2, 2, 100.0, 60.0),
                    make_gen(3, 1, 50.0, 1.0, 0.0, GeneratorKind::res, "W")};
  std::vector<double> load(static_cast<std::size_t>(hours), load_base);
  std::vector<double> wind(static_cast<std::size_t>(hours), 0.5);
  net.profiles = {{"L", load}, {"W", wind}};
  return net;
}

}  // namespace

TEST_CASE("constant profiles give identical hourly costs") {
  const Network net = profiled_net(168);
  const ScenarioRun run = run_week(net, net.profiles, 0, 168, "base");
  REQUIRE(run.hours.size() == 168);
  CHECK(run.infeasible_count == 0);
  for (const auto& hr : run.hours) {
    CHECK(hr.status == OpfStatus::optimal);
    CHECK(hr.total_cost_eur == doctest::Approx(run.hours[0].total_cost_eur));
    CHECK(hr.total_load_mw == doctest::Approx(80.0));
    CHECK(hr.res_capacity_mw == doctest::Approx(25.0));
  }
  CHECK(run.sum_cost_eur == doctest::Approx(168 * run.hours[0].total_cost_eur));
}

TEST_CASE("missing profile is an error before any solve") {
  Network net = profiled_net(168);
  net.profiles.erase("W");
  CHECK_THROWS_WITH_AS(run_week(net, net.profiles, 0, 168, "base"),
                       doctest::Contains("missing profile 'W'"),
                       ValidationError);
}

TEST_CASE("short profile is an error") {
  const Network net = profiled_net(100);
  CHECK_THROWS_AS(run_week(net, net.profiles, 0, 168, "base"), ValidationError);
}

TEST_CASE("an infeasible hour is recorded, the run continues") {
  Network net = profiled_net(24);
  // hour 5: no wind and load spike beyond conventional capacity
  net.profiles["L"][5] = 4.0;   // 320 MW load
  net.profiles["W"][5] = 0.0;   // conventional max = 150 + 100 = 250
  const ScenarioRun run = run_week(net, net.profiles, 0, 24, "base");
  CHECK(run.infeasible_count == 1);
  CHECK(run.hours[5].status == OpfStatus::infeasible);
  CHECK(run.hours[5].total_cost_eur == 0.0);
  CHECK(run.hours[4].status == OpfStatus::optimal);
  CHECK(run.hours[6].status == OpfStatus::optimal);
  CHECK(run.max_load_hour == 5);
}

TEST_CASE("lossy B2B variant costs more, bounded by loss times price") {
  // base: AC line; variant: the only path is a 1.9% B2B link
  Network base = profiled_net(24);
  Network htg = base;
  htg.branches.clear();
  htg.hvdc_links = {make_link(1, 1, 2, 400.0, 1.9)};

  const ScenarioRun run_base = run_week(base, base.profiles, 0, 24, "base");
  const ScenarioRun run_htg = run_week(htg, htg.profiles, 0, 24, "htg");
  REQUIRE(run_base.infeasible_count == 0);
  REQUIRE(run_htg.infeasible_count == 0);

  const Comparison cmp = compare(run_base, run_htg);
  CHECK(cmp.delta_total > 0.0);
  // bound: loss MW * max marginal price (60) per hour
  for (const auto& row : cmp.rows) {
    const double import_mw = 80.0;  // bus-2 load served over the link
    const double loss_bound = 0.019 * (import_mw / (1 - 0.019)) * 60.0;
    CHECK(row.delta > 0.0);
    CHECK(row.delta <= loss_bound + 1e-6);
  }
}

TEST_CASE("compare: identical runs have zero deltas") {
  const Network net = profiled_net(24);
  const ScenarioRun a = run_week(net, net.profiles, 0, 24, "a");
  const ScenarioRun b = run_week(net, net.profiles, 0, 24, "b");
  const Comparison cmp = compare(a, b);
  CHECK(cmp.delta_total == doctest::Approx(0.0));
  CHECK(cmp.max_rel_gap == doctest::Approx(0.0));
  for (const auto& row : cmp.rows) CHECK(row.delta == doctest::Approx(0.0));
}

TEST_CASE("compare: constant shift accumulates over the window") {
  const Network net = profiled_net(24);
  const ScenarioRun a = run_week(net, net.profiles, 0, 24, "a");
  ScenarioRun b = a;
  for (auto& hr : b.hours) hr.total_cost_eur += 7.5;
  b.sum_cost_eur += 24 * 7.5;
  const Comparison cmp = compare(a, b);
  CHECK(cmp.delta_total == doctest::Approx(24 * 7.5));

  // antisymmetry
  const Comparison flipped = compare(b, a);
  CHECK(flipped.delta_total == doctest::Approx(-cmp.delta_total));
  for (std::size_t i = 0; i < cmp.rows.size(); ++i)
    CHECK(flipped.rows[i].delta == doctest::Approx(-cmp.rows[i].delta));
}

TEST_CASE("compare rejects mismatched ranges") {
  const Network net = profiled_net(48);
  const ScenarioRun a = run_week(net, net.profiles, 0, 24, "a");
  const ScenarioRun b = run_week(net, net.profiles, 24, 24, "b");
  CHECK_THROWS_AS(compare(a, b), ValidationError);
}

TEST_CASE("run order is independent of thread count") {
  Network net = profiled_net(48);
  for (int h = 0; h < 48; ++h)
    net.profiles["L"][static_cast<std::size_t>(h)] = 0.5 + 0.01 * h;
  const ScenarioRun serial = run_week(net, net.profiles, 0, 48, "x", 1);
  const ScenarioRun parallel = run_week(net, net.profiles, 0, 48, "x", 8);
  REQUIRE(serial.hours.size() == parallel.hours.size());
  for (std::size_t i = 0; i < serial.hours.size(); ++i) {
    CHECK(serial.hours[i].hour == parallel.hours[i].hour);
    CHECK(serial.hours[i].total_cost_eur == parallel.hours[i].total_cost_eur);
  }
}

TEST_CASE("find_extreme_weeks") {
  Network net = profiled_net(8760);

  SUBCASE("single spike") {
    net.profiles["L"].assign(8760, 0.5);
    net.profiles["L"][5000] = 2.0;
    const ExtremeWeeks weeks = find_extreme_weeks(net, net.profiles, 8760);
    CHECK(weeks.max_week_start == 168 * (5000 / 168));
    CHECK(weeks.max_week_start <= 5000);
    CHECK(5000 < weeks.max_week_start + 168);
    CHECK(weeks.min_week_start == 0);  // first tie wins
  }
  SUBCASE("constant load: week 0 for both") {
    net.profiles["L"].assign(8760, 1.0);
    const ExtremeWeeks weeks = find_extreme_weeks(net, net.profiles, 8760);
    CHECK(weeks.min_week_start == 0);
    CHECK(weeks.max_week_start == 0);
  }
  SUBCASE("sinusoidal profile matches the analytic extrema") {
    for (int h = 0; h < 8760; ++h)
      net.profiles["L"][static_cast<std::size_t>(h)] =
          1.0 + 0.5 * std::sin(2.0 * M_PI * (h - 2190) / 8760.0);
    // maximum at h = 2190 + 8760/4 = 4380, minimum at 2190 + 3*8760/4 = 8760-2190
    const ExtremeWeeks weeks = find_extreme_weeks(net, net.profiles, 8760);
    CHECK(weeks.max_week_start == 168 * (4380 / 168));
    const int min_hour = 2190 + 3 * 8760 / 4 >= 8760 ? 2190 + 3 * 8760 / 4 - 8760
                                                     : 2190 + 3 * 8760 / 4;
    CHECK(weeks.min_week_start == std::min(168 * (min_hour / 168), 8760 - 168));
  }
  SUBCASE("short profiles are an error") {
    CHECK_THROWS_AS(find_extreme_weeks(net, {{"L", {1.0, 2.0}}, {"W", {1.0, 1.0}}},
                                       8760),
                    ValidationError);
  }
}

TEST_CASE("run_week with all-ones profiles equals the peak solve replicated") {
  Network net = profiled_net(24);
  net.profiles["L"].assign(24, 1.0);
  net.profiles["W"].assign(24, 1.0);
  const ScenarioRun run = run_week(net, net.profiles, 0, 24, "peak");

  OpfProblem prob;
  prob.net = net;
  const OpfSolution peak = solve(prob);
  REQUIRE(peak.status == OpfStatus::optimal);
  for (const auto& hr : run.hours)
    CHECK(hr.total_cost_eur == doctest::Approx(peak.total_cost));
}
