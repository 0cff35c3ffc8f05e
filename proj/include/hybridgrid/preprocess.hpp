#pragma once

#include <vector>

#include "hybridgrid/grid.hpp"

namespace hybridgrid {

struct RemovedLine {
  Id id = 0;
  double length_km = 0.0;
};

struct ReduceReport {
  std::vector<RemovedLine> removed;  // sorted by id
  double total_km = 0.0;
};

/// Drops every branch with status=new that is not flagged essential.
/// Throws ValidationError if the removal disconnects the grid (mis-flagged
/// essentials). Fills *report with the removed lines when non-null.
Network reduce_to_base_grid(const Network& net, ReduceReport* report = nullptr);

/// Bridge rule: a new branch is essential iff removing it alone separates
/// two buses that carry load or generation. All other new branches get
/// essential=false. Existing branches are untouched.
Network flag_essential_lines(const Network& net);

/// Combines parallel same-kind branches per bus pair into one equivalent:
/// b summed, 1/r summed, rating summed, length = max. Mixed kinds in
/// parallel are an error.
Network merge_parallel_branches(const Network& net);

/// One equivalent generator per (bus, kind, res profile), p_min/p_max summed,
/// cost = segments of all members merged in nondecreasing marginal order.
Network aggregate_generators(const Network& net);

/// Raises every series resistance below the floor to exactly the floor.
Network floor_resistance(const Network& net, double floor = 1e-5);

/// Full chain in the fixed order reduce -> merge -> aggregate -> floor.
Network preprocess(const Network& net, bool skip_reduce = false,
                   ReduceReport* report = nullptr);

}  // namespace hybridgrid
