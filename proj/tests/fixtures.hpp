#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybridgrid/grid.hpp"

namespace hybridgrid::testing {

inline Bus make_bus(Id id, double load_mw = 0.0,
                    std::optional<std::string> profile = std::nullopt) {
  Bus bus;
  bus.id = id;
  bus.name = "b" + std::to_string(id);
  bus.load_mw = load_mw;
  bus.load_profile_id = std::move(profile);
  return bus;
}

inline Branch make_branch(Id id, Id from, Id to, double r = 0.01,
                          double b = 10.0, double rating = 100.0,
                          double length_km = 10.0,
                          BranchKind kind = BranchKind::line,
                          BranchStatus status = BranchStatus::existing,
                          bool essential = false) {
  Branch br;
  br.id = id;
  br.from_bus = from;
  br.to_bus = to;
  br.kind = kind;
  br.r = r;
  br.b = b;
  br.rating = rating;
  br.length_km = kind == BranchKind::transformer ? 0.0 : length_km;
  br.status = status;
  br.essential = essential;
  return br;
}

/// Single-segment generator with marginal cost in EUR/MWh.
inline Generator make_gen(Id id, Id bus, double p_max, double marginal,
                          double p_min = 0.0,
                          GeneratorKind kind = GeneratorKind::conventional,
                          std::optional<std::string> profile = std::nullopt) {
  Generator gen;
  gen.id = id;
  gen.bus = bus;
  gen.p_min = p_min;
  gen.p_max = p_max;
  gen.kind = kind;
  gen.res_profile_id = std::move(profile);
  if (p_min == p_max) {
    gen.cost = {{p_min, p_min * marginal}};
  } else {
    gen.cost = {{p_min, p_min * marginal}, {p_max, p_max * marginal}};
  }
  return gen;
}

/// Generator built from (width_mw, marginal) pieces starting at p_min.
inline Generator make_gen_pwl(Id id, Id bus, double p_min, double base_cost,
                              const std::vector<std::pair<double, double>>& pieces,
                              GeneratorKind kind = GeneratorKind::conventional) {
  Generator gen;
  gen.id = id;
  gen.bus = bus;
  gen.p_min = p_min;
  gen.kind = kind;
  gen.cost = {{p_min, base_cost}};
  double p = p_min, c = base_cost;
  for (const auto& [width, marginal] : pieces) {
    p += width;
    c += width * marginal;
    gen.cost.push_back({p, c});
  }
  gen.p_max = p;
  return gen;
}

inline HvdcLink make_link(Id id, Id from, Id to, double p_max,
                          double loss_d = 0.0, double loss_k = 0.0,
                          double length_km = 0.0,
                          LinkOrigin origin = LinkOrigin::new_line,
                          bool cable = false) {
  HvdcLink link;
  link.id = id;
  link.from_bus = from;
  link.to_bus = to;
  link.p_max = p_max;
  link.q_max = 0.5 * p_max;
  link.loss_d = loss_d;
  link.loss_k = loss_k;
  link.length_km = length_km;
  link.converter_id = "M0";
  link.origin = origin;
  link.cable = cable;
  return link;
}

/// Cheap generator at bus 1, expensive at bus 2, one line, load at bus 2.
/// The spec's canonical congestion fixture.
inline Network two_bus_net(double line_rating, double load_at_2 = 80.0) {
  Network net;
  net.buses = {make_bus(1), make_bus(2, load_at_2)};
  net.branches = {make_branch(1, 1, 2, 0.01, 10.0, line_rating)};
  net.generators = {make_gen(1, 1, 100.0, 10.0), make_gen(2, 2, 100.0, 50.0)};
  return net;
}

}  // namespace hybridgrid::testing
