#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hybridgrid/dcopf.hpp"
#include "hybridgrid/grid.hpp"
#include "json.hpp"

namespace hybridgrid {

/// Catalog entry for a VSC converter module.
struct ConverterModule {
  std::string id;  // "M1".."M9"
  double rating_mva = 0.0;
  bool b2b_only = false;
  double loss_k = 0.0;  // %/km
  double loss_d = 0.0;  // %
  std::optional<double> max_line_km;
};

std::vector<ConverterModule> load_catalog(const std::string& path);

/// Thresholds and factors of the demand-actuated rating scheme.
struct RatingConfig {
  double mu_tol = 1e-6;  // EUR/MWh above which a branch counts as congested
  double u_high = 70.0;  // percent
  double u_low = 30.0;   // percent
  double up_factor = 2.0;
  double high_factor = 1.0;
  double mid_factor = 0.75;
  double low_factor = 0.5;
};

RatingConfig load_rating_config(const std::string& path);

/// Upgrade suitability weight: mu_k + r_k for lines, plus r_max for
/// transformers (preferring them for conversion).
double suitability(const Branch& branch, const OpfSolution& sol, double r_max);

struct TreeSplit {
  std::vector<Id> tree;      // branch ids, sorted
  std::vector<Id> off_tree;  // branch ids, sorted
};

/// Minimum spanning tree of the AC-branch graph under the given weights
/// (Kruskal, ties broken by smaller branch id). Off-tree branches are the
/// conversion candidates. Throws ValidationError listing components when the
/// AC graph is disconnected.
TreeSplit select_conversions(const Network& net,
                             const std::map<Id, double>& weights);

/// Kirchhoff matrix-tree count of the AC-branch graph, exact integer
/// arithmetic, returned as a decimal string (the value overflows doubles on
/// real grids).
std::string count_spanning_trees(const Network& net);

/// Demand-actuated target rating R~ for converting one branch.
double target_rating(const Branch& branch, const OpfSolution& sol,
                     const RatingConfig& cfg);

struct ConverterChoice {
  std::string converter_id;
  int module_count = 1;
};

/// Smallest eligible module with rating >= target (count 1); if the target
/// exceeds every eligible rating, the largest eligible module with a ceiling
/// count. b2b_only modules are eligible only for back-to-back conversions;
/// max_line_km restricts line length where set. Ties follow catalog order.
ConverterChoice select_converter(double target_mva, bool is_b2b,
                                 double length_km,
                                 const std::vector<ConverterModule>& catalog);

struct Conversion {
  Id branch_id = 0;
  BranchKind kind = BranchKind::line;
  double length_km = 0.0;
  double rating_before = 0.0;  // R_k
  double target_rating = 0.0;  // R~_k
  std::string converter_id;
  int module_count = 1;
  double installed_mva = 0.0;  // module_count * module rating
  HvdcLink link;               // the resulting HVDC link
};

struct TransitionSummary {
  int lines_converted = 0;
  int transformers_converted = 0;
  int uprated = 0;  // conversions with installed capacity > rating before
  double km_converted = 0.0;
  double avg_capacity_factor = 0.0;  // mean installed/before, 0 if no conversions
  double avg_target_factor = 0.0;    // mean target/before, 0 if no conversions
};

struct TransitionPlan {
  std::vector<Conversion> conversions;  // sorted by branch id
  std::vector<Id> tree_branch_ids;      // sorted
  TransitionSummary summary;
};

struct TransitionResult {
  TransitionPlan plan;
  Network converted;
};

/// End-to-end: suitability -> MST selection -> target rating -> converter
/// choice. Off-tree lines become HVDC lines, off-tree transformers become
/// back-to-back converters; the AC remainder is a spanning tree.
TransitionResult build_transition(const Network& net, const OpfSolution& sol,
                                  const std::vector<ConverterModule>& catalog,
                                  const RatingConfig& cfg);

nlohmann::json plan_to_json(const TransitionPlan& plan);
TransitionPlan plan_from_json(const nlohmann::json& j);

}  // namespace hybridgrid
