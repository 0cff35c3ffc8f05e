#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridgrid {

using Id = std::int64_t;

/// Malformed input file (bad JSON, wrong types, missing required fields).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A domain invariant is violated; the message names the entity and the rule.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Internal solver failure (iteration limit, unbounded program, ...).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BranchKind { line, transformer };
enum class BranchStatus { existing, new_build };
enum class GeneratorKind { conventional, res };
enum class LinkOrigin { converted_line, converted_transformer, new_line };

std::string to_string(BranchKind k);
std::string to_string(BranchStatus s);
std::string to_string(GeneratorKind k);
std::string to_string(LinkOrigin o);

struct Bus {
  Id id = 0;
  std::string name;
  double load_mw = 0.0;  // peak active demand
  std::optional<std::string> load_profile_id;
};

struct Branch {
  Id id = 0;
  Id from_bus = 0;
  Id to_bus = 0;
  BranchKind kind = BranchKind::line;
  double r = 0.0;       // series resistance, p.u.
  double b = 0.0;       // series susceptance magnitude for the DC flow model, p.u.
  double rating = 0.0;  // MVA
  double length_km = 0.0;
  BranchStatus status = BranchStatus::existing;
  bool essential = false;  // meaningful only for status == new_build
};

struct CostPoint {
  double mw = 0.0;
  double eur_per_h = 0.0;
  bool operator==(const CostPoint&) const = default;
};

/// One linear piece of a convex piecewise-linear cost.
struct CostSegment {
  double width_mw = 0.0;
  double marginal_eur_per_mwh = 0.0;
};

struct Generator {
  Id id = 0;
  Id bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  // Breakpoints from p_min to p_max, marginal costs nondecreasing.
  std::vector<CostPoint> cost;
  GeneratorKind kind = GeneratorKind::conventional;
  std::optional<std::string> res_profile_id;
};

/// Segments between consecutive breakpoints. Throws ValidationError if the
/// breakpoint list is not strictly increasing or not convex.
std::vector<CostSegment> cost_segments(const Generator& gen);

/// Cost at output p (clamped to [p_min, p_max]).
double cost_at(const Generator& gen, double p);

struct HvdcLink {
  Id id = 0;
  Id from_bus = 0;
  Id to_bus = 0;
  double p_max = 0.0;      // MW, converter rating
  double q_max = 0.0;      // MVAr, 0.5 * p_max
  double loss_k = 0.0;     // %/km
  double loss_d = 0.0;     // %
  double length_km = 0.0;  // 0 = back-to-back
  std::string converter_id;
  LinkOrigin origin = LinkOrigin::new_line;
  bool cable = false;  // DC cable vs overhead, used by cost accounting
};

/// Single authoritative grid state. Immutable after load by convention:
/// every transforming operation returns a new Network.
struct Network {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<HvdcLink> hvdc_links;
  std::vector<Generator> generators;
  std::map<std::string, std::vector<double>> profiles;  // hourly per-unit series

  const Bus* find_bus(Id id) const;
  const Branch* find_branch(Id id) const;
  const HvdcLink* find_link(Id id) const;
  bool bus_exists(Id id) const { return find_bus(id) != nullptr; }
};

/// Checks every type invariant plus cross-references and overall
/// connectivity. Throws ValidationError naming the entity and the rule.
void validate(const Network& net);

/// Sorts all entity vectors by id (canonical in-memory order).
void sort_canonical(Network& net);

}  // namespace hybridgrid
