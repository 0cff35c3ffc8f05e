#include "hybridgrid/preprocess.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "hybridgrid/connectivity.hpp"

namespace hybridgrid {

namespace {

bool is_new(const Branch& br) { return br.status == BranchStatus::new_build; }

std::set<Id> active_buses(const Network& net) {
  std::set<Id> active;
  for (const auto& bus : net.buses)
    if (bus.load_mw > 0.0) active.insert(bus.id);
  for (const auto& gen : net.generators) active.insert(gen.bus);
  return active;
}

}  // namespace

Network reduce_to_base_grid(const Network& net, ReduceReport* report) {
  Network out = net;
  out.branches.clear();
  ReduceReport local;
  for (const auto& br : net.branches) {
    if (is_new(br) && !br.essential) {
      local.removed.push_back({br.id, br.length_km});
      local.total_km += br.length_km;
    } else {
      out.branches.push_back(br);
    }
  }
  std::sort(local.removed.begin(), local.removed.end(),
            [](const RemovedLine& a, const RemovedLine& b) { return a.id < b.id; });

  if (!out.buses.empty()) {
    const auto conn = connectivity(out);
    if (!conn.connected) {
      std::ostringstream ss;
      ss << "removing non-essential new lines disconnects the grid ("
         << conn.components.size()
         << " components); check the essential flags";
      throw ValidationError(ss.str());
    }
  }
  if (report) *report = std::move(local);
  return out;
}

Network flag_essential_lines(const Network& net) {
  Network out = net;
  const std::set<Id> active = active_buses(net);

  for (auto& br : out.branches) {
    if (!is_new(br)) continue;
    const Id probe = br.id;
    const auto conn = connectivity(
        net, {.branch = [probe](const Branch& other) { return other.id != probe; },
              .link = {}});
    br.essential = false;
    if (conn.connected) continue;
    // Removing one edge from a connected graph splits off exactly one
    // component; essential iff both sides still matter for load/generation.
    for (const auto& comp : conn.components) {
      bool side_active = false;
      for (Id bus : comp)
        if (active.count(bus)) side_active = true;
      if (!side_active) {
        br.essential = false;
        break;
      }
      br.essential = true;
    }
  }
  return out;
}

Network merge_parallel_branches(const Network& net) {
  std::map<std::pair<Id, Id>, std::vector<const Branch*>> corridors;
  for (const auto& br : net.branches) {
    const auto key = std::minmax(br.from_bus, br.to_bus);
    corridors[{key.first, key.second}].push_back(&br);
  }

  Network out = net;
  out.branches.clear();
  for (auto& [key, group] : corridors) {
    if (group.size() == 1) {
      out.branches.push_back(*group.front());
      continue;
    }
    std::sort(group.begin(), group.end(),
              [](const Branch* a, const Branch* b) { return a->id < b->id; });
    for (const Branch* br : group) {
      if (br->kind != group.front()->kind) {
        std::ostringstream ss;
        ss << "parallel branches of mixed kind between buses " << key.first
           << " and " << key.second << " (no unambiguous equivalent)";
        throw ValidationError(ss.str());
      }
    }
    Branch merged = *group.front();
    double inv_r = 0.0, b_sum = 0.0, rating_sum = 0.0, max_len = 0.0;
    bool any_existing = false, any_essential = false;
    for (const Branch* br : group) {
      inv_r += 1.0 / br->r;
      b_sum += br->b;
      rating_sum += br->rating;
      max_len = std::max(max_len, br->length_km);
      any_existing |= br->status == BranchStatus::existing;
      any_essential |= br->essential;
    }
    merged.r = 1.0 / inv_r;
    merged.b = b_sum;
    merged.rating = rating_sum;
    merged.length_km = max_len;
    merged.status = any_existing ? BranchStatus::existing : BranchStatus::new_build;
    merged.essential = merged.status == BranchStatus::new_build && any_essential;
    out.branches.push_back(merged);
  }
  std::sort(out.branches.begin(), out.branches.end(),
            [](const Branch& a, const Branch& b) { return a.id < b.id; });
  return out;
}

Network aggregate_generators(const Network& net) {
  using GroupKey = std::tuple<Id, GeneratorKind, std::string>;
  std::map<GroupKey, std::vector<const Generator*>> groups;
  for (const auto& gen : net.generators) {
    groups[{gen.bus, gen.kind, gen.res_profile_id.value_or("")}].push_back(&gen);
  }

  Network out = net;
  out.generators.clear();
  for (auto& [key, members] : groups) {
    if (members.size() == 1) {
      out.generators.push_back(*members.front());
      continue;
    }
    std::sort(members.begin(), members.end(),
              [](const Generator* a, const Generator* b) { return a->id < b->id; });

    Generator agg = *members.front();
    agg.p_min = 0.0;
    agg.p_max = 0.0;
    double base_cost = 0.0;
    // (marginal, member order, segment order) gives the lower envelope of
    // joint dispatch: cheapest capacity is always consumed first.
    std::vector<std::tuple<double, std::size_t, std::size_t, double>> segs;
    for (std::size_t gi = 0; gi < members.size(); ++gi) {
      const Generator* gen = members[gi];
      agg.p_min += gen->p_min;
      agg.p_max += gen->p_max;
      base_cost += gen->cost.front().eur_per_h;
      const auto gsegs = cost_segments(*gen);  // throws on non-convex input
      for (std::size_t si = 0; si < gsegs.size(); ++si)
        segs.emplace_back(gsegs[si].marginal_eur_per_mwh, gi, si,
                          gsegs[si].width_mw);
    }
    std::sort(segs.begin(), segs.end());

    agg.cost.clear();
    agg.cost.push_back({agg.p_min, base_cost});
    double p = agg.p_min, c = base_cost;
    double prev_marginal = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [marginal, gi, si, width] : segs) {
      (void)gi;
      (void)si;
      p += width;
      c += marginal * width;
      // Adjacent pieces with exactly equal marginals collapse into one.
      if (agg.cost.size() >= 2 && marginal == prev_marginal) agg.cost.pop_back();
      agg.cost.push_back({p, c});
      prev_marginal = marginal;
    }
    out.generators.push_back(std::move(agg));
  }
  std::sort(out.generators.begin(), out.generators.end(),
            [](const Generator& a, const Generator& b) { return a.id < b.id; });
  return out;
}

Network floor_resistance(const Network& net, double floor) {
  Network out = net;
  for (auto& br : out.branches)
    if (br.r < floor) br.r = floor;
  return out;
}

Network preprocess(const Network& net, bool skip_reduce, ReduceReport* report) {
  Network out = skip_reduce ? net : reduce_to_base_grid(net, report);
  out = merge_parallel_branches(out);
  out = aggregate_generators(out);
  return floor_resistance(out);
}

}  // namespace hybridgrid
