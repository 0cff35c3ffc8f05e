#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "hybridgrid/case_io.hpp"
#include "hybridgrid/connectivity.hpp"
#include "hybridgrid/json_canon.hpp"
#include "hybridgrid/preprocess.hpp"
#include "oracles.hpp"

using namespace hybridgrid;
using namespace hybridgrid::testing;

namespace {

/// Backbone pair of buses plus `n_new` new lines in parallel to an existing
/// corridor; `n_essential` of them flagged.
Network expansion_net(int n_new, int n_essential) {
  Network net;
  net.buses = {make_bus(1, 10.0), make_bus(2, 10.0)};
  net.generators = {make_gen(1, 1, 100.0, 15.0)};
  net.branches = {make_branch(1, 1, 2)};
  for (int i = 0; i < n_new; ++i) {
    net.branches.push_back(make_branch(100 + i, 1, 2, 0.01 + 1e-4 * i, 10.0,
                                       100.0, 40.0, BranchKind::line,
                                       BranchStatus::new_build,
                                       i < n_essential));
  }
  return net;
}

}  // namespace

TEST_CASE("reduce_to_base_grid keeps only essential new lines") {
  // mirrors the scale of the reference expansion plan: 93 new, 6 essential
  const Network net = expansion_net(93, 6);
  ReduceReport report;
  const Network base = reduce_to_base_grid(net, &report);

  int new_lines = 0;
  for (const auto& br : base.branches)
    if (br.status == BranchStatus::new_build) ++new_lines;
  CHECK(new_lines == 6);
  CHECK(base.branches.size() == 7);
  CHECK(report.removed.size() == 87);
  CHECK(report.total_km == doctest::Approx(87 * 40.0));
}

TEST_CASE("reduce_to_base_grid is identity without new branches") {
  const Network net = expansion_net(0, 0);
  const Network base = reduce_to_base_grid(net);
  CHECK(base.branches.size() == net.branches.size());
}

TEST_CASE("reduce_to_base_grid rejects removals that disconnect the grid") {
  Network net = expansion_net(0, 0);
  net.buses.push_back(make_bus(3, 5.0));
  net.branches.push_back(make_branch(50, 2, 3, 0.01, 10.0, 100.0, 25.0,
                                     BranchKind::line, BranchStatus::new_build,
                                     false));  // mis-flagged: only path to bus 3
  CHECK_THROWS_AS(reduce_to_base_grid(net), ValidationError);
}

TEST_CASE("flag_essential_lines applies the bridge rule") {
  SUBCASE("new bus attached by one new line") {
    Network net = expansion_net(0, 0);
    net.buses.push_back(make_bus(3, 20.0));
    net.branches.push_back(make_branch(50, 2, 3, 0.01, 10.0, 100.0, 25.0,
                                       BranchKind::line,
                                       BranchStatus::new_build, false));
    const Network flagged = flag_essential_lines(net);
    CHECK(flagged.find_branch(50)->essential);
  }
  SUBCASE("new line paralleling an existing corridor") {
    Network net = expansion_net(1, 1);  // flag it; the rule must clear it
    const Network flagged = flag_essential_lines(net);
    CHECK_FALSE(flagged.find_branch(100)->essential);
  }
  SUBCASE("dangling bus with neither load nor generation") {
    Network net = expansion_net(0, 0);
    net.buses.push_back(make_bus(3, 0.0));
    net.branches.push_back(make_branch(50, 2, 3, 0.01, 10.0, 100.0, 25.0,
                                       BranchKind::line,
                                       BranchStatus::new_build, false));
    const Network flagged = flag_essential_lines(net);
    CHECK_FALSE(flagged.find_branch(50)->essential);
  }
}

TEST_CASE("chain of two new lines to a generator bus: both essential") {
  Network net;
  net.buses = {make_bus(1, 30.0), make_bus(2, 0.0), make_bus(3, 0.0)};
  net.generators = {make_gen(1, 1, 100.0, 15.0), make_gen(2, 3, 50.0, 25.0)};
  net.branches = {
      make_branch(1, 1, 2, 0.01, 10.0, 100.0, 30.0, BranchKind::line,
                  BranchStatus::new_build, false),
      make_branch(2, 2, 3, 0.01, 10.0, 100.0, 30.0, BranchKind::line,
                  BranchStatus::new_build, false),
  };
  const Network flagged = flag_essential_lines(net);
  CHECK(flagged.find_branch(1)->essential);
  CHECK(flagged.find_branch(2)->essential);

  // oracle: brute force over all removal subsets of new branches; a branch is
  // essential iff it appears in no subset whose removal keeps every
  // load/generation bus reachable from the rest.
  const std::vector<Id> new_ids = {1, 2};
  std::set<Id> in_some_removable;
  for (unsigned mask = 1; mask < (1u << new_ids.size()); ++mask) {
    std::set<Id> keep;
    for (const auto& br : net.branches) keep.insert(br.id);
    std::set<Id> removed;
    for (std::size_t i = 0; i < new_ids.size(); ++i)
      if (mask & (1u << i)) {
        keep.erase(new_ids[i]);
        removed.insert(new_ids[i]);
      }
    const auto comps = bfs_components(net, keep, {});
    // actives: 1 and 3
    bool actives_connected = false;
    for (const auto& comp : comps) {
      const bool has1 = std::count(comp.begin(), comp.end(), 1) > 0;
      const bool has3 = std::count(comp.begin(), comp.end(), 3) > 0;
      if (has1 && has3) actives_connected = true;
    }
    if (actives_connected)
      for (Id id : removed) in_some_removable.insert(id);
  }
  for (Id id : new_ids) {
    const bool oracle_essential = !in_some_removable.count(id);
    CHECK(flagged.find_branch(id)->essential == oracle_essential);
  }
}

TEST_CASE("merge_parallel_branches equivalents") {
  Network net;
  net.buses = {make_bus(1, 10.0), make_bus(2)};
  net.generators = {make_gen(1, 2, 50.0, 10.0)};

  SUBCASE("two identical branches") {
    net.branches = {make_branch(1, 1, 2, 0.02, 5.0, 100.0, 30.0),
                    make_branch(2, 1, 2, 0.02, 5.0, 100.0, 30.0)};
    const Network merged = merge_parallel_branches(net);
    REQUIRE(merged.branches.size() == 1);
    const Branch& br = merged.branches[0];
    CHECK(br.r == doctest::Approx(0.01));
    CHECK(br.b == doctest::Approx(10.0));
    CHECK(br.rating == doctest::Approx(200.0));
    CHECK(br.length_km == doctest::Approx(30.0));
    CHECK(br.id == 1);
  }
  SUBCASE("harmonic resistance sum") {
    net.branches = {make_branch(1, 1, 2, 0.01), make_branch(2, 2, 1, 0.03)};
    const Network merged = merge_parallel_branches(net);
    REQUIRE(merged.branches.size() == 1);
    CHECK(merged.branches[0].r == doctest::Approx(0.0075));
  }
  SUBCASE("no parallels: identity") {
    net.buses.push_back(make_bus(3));
    net.branches = {make_branch(1, 1, 2), make_branch(2, 2, 3)};
    const Network merged = merge_parallel_branches(net);
    CHECK(merged.branches.size() == 2);
  }
  SUBCASE("mixed kinds in parallel is an error") {
    net.branches = {make_branch(1, 1, 2),
                    make_branch(2, 1, 2, 0.01, 10.0, 100.0, 0.0,
                                BranchKind::transformer)};
    CHECK_THROWS_AS(merge_parallel_branches(net), ValidationError);
  }
}

TEST_CASE("merge preserves per-corridor susceptance and rating sums") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = random_grid(rng, std::uniform_int_distribution<int>(3, 12)(rng),
                              false);
    // duplicate some branches to force parallels
    Id next_id = 1000;
    const std::size_t orig = net.branches.size();
    for (std::size_t i = 0; i < orig; i += 2) {
      Branch copy = net.branches[i];
      copy.id = next_id++;
      copy.r *= 1.7;
      net.branches.push_back(copy);
    }
    std::map<std::pair<Id, Id>, std::pair<double, double>> before;
    for (const auto& br : net.branches) {
      auto key = std::minmax(br.from_bus, br.to_bus);
      before[{key.first, key.second}].first += br.b;
      before[{key.first, key.second}].second += br.rating;
    }
    const Network merged = merge_parallel_branches(net);
    std::map<std::pair<Id, Id>, std::pair<double, double>> after;
    for (const auto& br : merged.branches) {
      auto key = std::minmax(br.from_bus, br.to_bus);
      after[{key.first, key.second}].first += br.b;
      after[{key.first, key.second}].second += br.rating;
    }
    CHECK(before == after);  // exact: plain sums in both directions
  }
}

TEST_CASE("aggregate_generators merges segments in marginal order") {
  Network net;
  net.buses = {make_bus(1, 10.0)};

  SUBCASE("two single-segment generators") {
    net.generators = {make_gen(1, 1, 100.0, 10.0), make_gen(2, 1, 100.0, 20.0)};
    const Network agg = aggregate_generators(net);
    REQUIRE(agg.generators.size() == 1);
    const Generator& gen = agg.generators[0];
    CHECK(gen.p_min == 0.0);
    CHECK(gen.p_max == 200.0);
    REQUIRE(gen.cost.size() == 3);
    CHECK(gen.cost[0].mw == 0.0);
    CHECK(gen.cost[1].mw == 100.0);
    CHECK(gen.cost[1].eur_per_h == doctest::Approx(1000.0));
    CHECK(gen.cost[2].mw == 200.0);
    CHECK(gen.cost[2].eur_per_h == doctest::Approx(3000.0));
  }
  SUBCASE("single generator is untouched") {
    net.generators = {make_gen(1, 1, 100.0, 10.0)};
    const Network agg = aggregate_generators(net);
    REQUIRE(agg.generators.size() == 1);
    CHECK(agg.generators[0].cost == net.generators[0].cost);
  }
  SUBCASE("different kinds stay separate") {
    net.generators = {make_gen(1, 1, 100.0, 10.0),
                      make_gen(2, 1, 100.0, 0.5, 0.0, GeneratorKind::res)};
    const Network agg = aggregate_generators(net);
    CHECK(agg.generators.size() == 2);
  }
  SUBCASE("non-convex input is an error") {
    Generator bad = make_gen(1, 1, 100.0, 10.0);
    bad.cost = {{0.0, 0.0}, {50.0, 1000.0}, {100.0, 1100.0}};
    net.generators = {bad, make_gen(2, 1, 50.0, 5.0)};
    CHECK_THROWS_AS(aggregate_generators(net), ValidationError);
  }
}

TEST_CASE("aggregate matches the grid-search dispatch oracle") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Network net;
    net.buses = {make_bus(1, 10.0)};
    const int n_gens = std::uniform_int_distribution<int>(2, 3)(rng);
    std::vector<Generator> gens;
    for (int g = 0; g < n_gens; ++g) {
      const int n_seg = std::uniform_int_distribution<int>(1, 3)(rng);
      std::vector<std::pair<double, double>> pieces;
      double marginal = std::uniform_int_distribution<int>(1, 30)(rng);
      for (int s = 0; s < n_seg; ++s) {
        pieces.push_back(
            {std::uniform_int_distribution<int>(5, 40)(rng), marginal});
        marginal += std::uniform_int_distribution<int>(0, 15)(rng);
      }
      const double p_min = std::uniform_int_distribution<int>(0, 10)(rng);
      gens.push_back(
          make_gen_pwl(g + 1, 1, p_min, p_min * 3.0, pieces));
    }
    net.generators = gens;
    const Network agg_net = aggregate_generators(net);
    REQUIRE(agg_net.generators.size() == 1);
    const Generator& agg = agg_net.generators[0];

    // sample a few integer demand levels across the joint range
    for (int s = 0; s <= 4; ++s) {
      const double demand =
          std::round(agg.p_min + (agg.p_max - agg.p_min) * s / 4.0);
      const double expect = grid_search_dispatch_cost(gens, demand);
      const double got = cost_at(agg, demand);
      CHECK(got == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("floor_resistance") {
  Network net = expansion_net(0, 0);
  net.branches[0].r = 1e-7;
  net.branches.push_back(make_branch(2, 1, 2, 1e-5));
  net.branches.push_back(make_branch(3, 1, 2, 0.02));
  const Network floored = floor_resistance(net);
  CHECK(floored.find_branch(1)->r == 1e-5);
  CHECK(floored.find_branch(2)->r == 1e-5);  // boundary untouched
  CHECK(floored.find_branch(3)->r == 0.02);
}

TEST_CASE("preprocessing operations are idempotent") {
  std::mt19937 rng(99);
  Network net = random_grid(rng, 14, false);
  // sprinkle in parallels, multiple gens, a tiny resistance and new lines
  Branch dup = net.branches[0];
  dup.id = 500;
  net.branches.push_back(dup);
  net.branches[1].r = 1e-8;
  net.generators.push_back(make_gen(100, net.generators[0].bus, 40.0, 33.0));
  Branch extra = net.branches[2];
  extra.id = 501;
  extra.status = BranchStatus::new_build;
  extra.essential = false;
  net.branches.push_back(extra);

  auto bytes = [](const Network& n) { return dump_canonical(case_to_json(n)); };

  const Network once = preprocess(net);
  const Network twice = preprocess(once);
  CHECK(bytes(once) == bytes(twice));

  CHECK(bytes(reduce_to_base_grid(once)) == bytes(once));
  CHECK(bytes(merge_parallel_branches(once)) == bytes(once));
  CHECK(bytes(aggregate_generators(once)) == bytes(once));
  CHECK(bytes(floor_resistance(once)) == bytes(once));
}

TEST_CASE("reduce never increases branch count nor disconnects") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    Network net = random_grid(rng, std::uniform_int_distribution<int>(4, 20)(rng));
    // mark random branches as new, keeping the joint removal connected (a
    // removal set that disconnects is mis-flagged data and raises instead)
    std::set<Id> marked;
    for (auto& br : net.branches) {
      if (std::uniform_int_distribution<int>(0, 3)(rng) > 0) continue;
      std::set<Id> candidate = marked;
      candidate.insert(br.id);
      const bool still_connected =
          connectivity(net, {.branch = [&candidate](const Branch& other) {
                               return !candidate.count(other.id);
                             },
                             .link = {}})
              .connected;
      if (still_connected) {
        br.status = BranchStatus::new_build;
        marked.insert(br.id);
      }
    }
    const Network flagged = flag_essential_lines(net);
    const Network base = reduce_to_base_grid(flagged);
    CHECK(base.branches.size() <= net.branches.size());
    CHECK(connectivity(base).connected);
  }
}
