#include "hybridgrid/dcopf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybridgrid {

double OpfProblem::load_scale_at(Id bus) const {
  auto it = load_scale.find(bus);
  return it == load_scale.end() ? 1.0 : it->second;
}

double OpfProblem::res_factor_at(Id gen) const {
  auto it = res_availability.find(gen);
  return it == res_availability.end() ? 1.0 : it->second;
}

double hvdc_loss_fraction(const HvdcLink& link) {
  const double frac = (link.loss_k * link.length_km + link.loss_d) / 100.0;
  if (!(frac >= 0.0) || frac >= 0.2) {
    std::ostringstream ss;
    ss << "hvdc_link " << link.id << ": loss fraction " << frac
       << " outside [0, 0.2) (implausible catalog data)";
    throw ValidationError(ss.str());
  }
  return frac;
}

namespace {

/// Index bookkeeping between network entities and LP columns/rows.
struct OpfIndex {
  std::vector<int> gen_var;                  // per generator (net order)
  std::vector<std::vector<int>> seg_vars;    // per generator
  std::vector<int> angle_var;                // per bus
  std::vector<int> flow_var;                 // per branch
  std::vector<int> link_fwd_var, link_rev_var;
  std::vector<int> balance_row;              // per bus
};

void check_problem(const OpfProblem& prob) {
  validate(prob.net);
  for (const auto& [bus, scale] : prob.load_scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
      std::ostringstream ss;
      ss << "load_scale for bus " << bus << " must be >= 0";
      throw ValidationError(ss.str());
    }
  }
  for (const auto& [gen, factor] : prob.res_availability) {
    if (!(factor >= 0.0) || factor > 1.0) {
      std::ostringstream ss;
      ss << "res_availability for generator " << gen << " must be in [0, 1]";
      throw ValidationError(ss.str());
    }
  }
}

LinearProgram assemble(const OpfProblem& prob, OpfIndex& ix) {
  const Network& net = prob.net;
  LinearProgram lp;

  auto name = [](const char* tag, Id id) {
    std::ostringstream ss;
    ss << tag << "[" << id << "]";
    return ss.str();
  };

  ix.gen_var.resize(net.generators.size());
  ix.seg_vars.resize(net.generators.size());
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const auto& gen = net.generators[g];
    const double factor =
        gen.kind == GeneratorKind::res ? prob.res_factor_at(gen.id) : 1.0;
    ix.gen_var[g] =
        lp.add_variable(name("p", gen.id), gen.p_min, factor * gen.p_max, 0.0);
    lp.cost_offset += gen.cost.front().eur_per_h;
    int s = 0;
    for (const auto& seg : cost_segments(gen)) {
      std::ostringstream sname;
      sname << "seg[" << gen.id << "," << s++ << "]";
      ix.seg_vars[g].push_back(lp.add_variable(sname.str(), 0.0, seg.width_mw,
                                               seg.marginal_eur_per_mwh));
    }
  }

  const Id ref_bus = net.buses.front().id;  // buses are sorted by id
  ix.angle_var.resize(net.buses.size());
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    const auto& bus = net.buses[b];
    const bool is_ref = bus.id == ref_bus;
    ix.angle_var[b] = lp.add_variable(name("theta", bus.id), is_ref ? 0.0 : -kLpInf,
                                      is_ref ? 0.0 : kLpInf, 0.0);
  }

  ix.flow_var.resize(net.branches.size());
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const auto& br = net.branches[k];
    ix.flow_var[k] =
        lp.add_variable(name("flow", br.id), -br.rating, br.rating, 0.0);
  }

  ix.link_fwd_var.resize(net.hvdc_links.size());
  ix.link_rev_var.resize(net.hvdc_links.size());
  for (std::size_t l = 0; l < net.hvdc_links.size(); ++l) {
    const auto& link = net.hvdc_links[l];
    ix.link_fwd_var[l] =
        lp.add_variable(name("fdc_fwd", link.id), 0.0, link.p_max, 0.0);
    ix.link_rev_var[l] =
        lp.add_variable(name("fdc_rev", link.id), 0.0, link.p_max, 0.0);
  }

  // Bus balance: generation - load = AC outflow + DC sent - DC received.
  std::map<Id, int> row_of_bus;
  ix.balance_row.resize(net.buses.size());
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    const auto& bus = net.buses[b];
    const double load = bus.load_mw * prob.load_scale_at(bus.id);
    ix.balance_row[b] = lp.add_row(name("balance", bus.id), load);
    row_of_bus[bus.id] = ix.balance_row[b];
  }
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    lp.add_coeff(row_of_bus.at(net.generators[g].bus), ix.gen_var[g], 1.0);
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const auto& br = net.branches[k];
    lp.add_coeff(row_of_bus.at(br.from_bus), ix.flow_var[k], -1.0);
    lp.add_coeff(row_of_bus.at(br.to_bus), ix.flow_var[k], 1.0);
  }
  for (std::size_t l = 0; l < net.hvdc_links.size(); ++l) {
    const auto& link = net.hvdc_links[l];
    const double arrive = 1.0 - hvdc_loss_fraction(link);
    lp.add_coeff(row_of_bus.at(link.from_bus), ix.link_fwd_var[l], -1.0);
    lp.add_coeff(row_of_bus.at(link.to_bus), ix.link_fwd_var[l], arrive);
    lp.add_coeff(row_of_bus.at(link.to_bus), ix.link_rev_var[l], -1.0);
    lp.add_coeff(row_of_bus.at(link.from_bus), ix.link_rev_var[l], arrive);
  }

  // AC flow definition: flow_k = b_k * (theta_i - theta_j) * base_mva.
  std::map<Id, int> angle_of_bus;
  for (std::size_t b = 0; b < net.buses.size(); ++b)
    angle_of_bus[net.buses[b].id] = ix.angle_var[b];
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const auto& br = net.branches[k];
    const int row = lp.add_row(name("flowdef", br.id), 0.0);
    const double coupling = br.b * net.base_mva;
    lp.add_coeff(row, ix.flow_var[k], 1.0);
    lp.add_coeff(row, angle_of_bus.at(br.from_bus), -coupling);
    lp.add_coeff(row, angle_of_bus.at(br.to_bus), coupling);
  }

  // Generator linking: p_g = p_min + sum of segment variables.
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const auto& gen = net.generators[g];
    const int row = lp.add_row(name("gen", gen.id), gen.p_min);
    lp.add_coeff(row, ix.gen_var[g], 1.0);
    for (int sv : ix.seg_vars[g]) lp.add_coeff(row, sv, -1.0);
  }

  return lp;
}

}  // namespace

LinearProgram build_lp(const OpfProblem& prob) {
  check_problem(prob);
  OpfIndex ix;
  return assemble(prob, ix);
}

OpfSolution solve(const OpfProblem& prob) {
  check_problem(prob);
  const Network& net = prob.net;
  OpfSolution sol;

  // Dispatch windows that cannot close are reported as plain infeasibility.
  for (const auto& gen : net.generators) {
    const double factor =
        gen.kind == GeneratorKind::res ? prob.res_factor_at(gen.id) : 1.0;
    if (gen.p_min > factor * gen.p_max + 1e-12) {
      std::ostringstream ss;
      ss << "generator " << gen.id << ": p_min " << gen.p_min
         << " MW exceeds available capacity " << factor * gen.p_max << " MW";
      sol.status = OpfStatus::infeasible;
      sol.infeasibility_hint = ss.str();
      return sol;
    }
  }

  OpfIndex ix;
  const LinearProgram lp = assemble(prob, ix);
  const LpSolution lps = solve_lp(lp);

  if (lps.status == LpStatus::unbounded)
    throw SolverError("OPF is unbounded: a dispatch or flow limit is missing");
  if (lps.status == LpStatus::infeasible) {
    sol.status = OpfStatus::infeasible;
    std::ostringstream ss;
    ss << "unmet constraints:";
    for (std::size_t i = 0; i < lps.infeasible_rows.size(); ++i) {
      if (i >= 4) {
        ss << " ...";
        break;
      }
      ss << " " << lp.rows[static_cast<std::size_t>(lps.infeasible_rows[i])].name;
    }
    sol.infeasibility_hint = ss.str();
    return sol;
  }

  sol.status = OpfStatus::optimal;
  sol.total_cost = lps.objective;
  sol.dual_cost = lps.dual_objective;

  for (std::size_t g = 0; g < net.generators.size(); ++g)
    sol.dispatch[net.generators[g].id] = lps.x[static_cast<std::size_t>(ix.gen_var[g])];
  for (std::size_t b = 0; b < net.buses.size(); ++b)
    sol.angles[net.buses[b].id] = lps.x[static_cast<std::size_t>(ix.angle_var[b])];
  for (std::size_t k = 0; k < net.branches.size(); ++k) {
    const auto& br = net.branches[k];
    const double flow = lps.x[static_cast<std::size_t>(ix.flow_var[k])];
    sol.ac_flows[br.id] = flow;
    // mu_k is the bound multiplier of the flow variable: the reduced cost of
    // a nonbasic variable sitting at the binding side of |flow| <= rating.
    sol.mu[br.id] =
        std::abs(lps.reduced_costs[static_cast<std::size_t>(ix.flow_var[k])]);
    sol.utilization[br.id] = 100.0 * std::abs(flow) / br.rating;
  }
  // With positive losses and strictly positive marginal costs everywhere a
  // simultaneous counterflow burns money on both ends, so a clean optimum
  // never carries one.
  bool all_marginals_positive = true;
  for (const auto& gen : net.generators)
    for (const auto& seg : cost_segments(gen))
      if (seg.marginal_eur_per_mwh <= 0.0) all_marginals_positive = false;

  for (std::size_t l = 0; l < net.hvdc_links.size(); ++l) {
    const auto& link = net.hvdc_links[l];
    const double fwd = lps.x[static_cast<std::size_t>(ix.link_fwd_var[l])];
    const double rev = lps.x[static_cast<std::size_t>(ix.link_rev_var[l])];
    sol.hvdc_flows[link.id] = fwd - rev;
    if (all_marginals_positive && hvdc_loss_fraction(link) > 1e-12) {
      const double floor = 1e-6 * std::max(1.0, link.p_max);
      if (fwd > floor && rev > floor)
        throw SolverError("simultaneous HVDC counterflow at optimum");
    }
  }
  return sol;
}

nlohmann::json solution_to_json(const OpfSolution& sol) {
  auto pairs = [](const std::map<Id, double>& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, v] : m) arr.push_back({id, v});
    return arr;
  };
  nlohmann::json j = {
      {"status", sol.status == OpfStatus::optimal ? "optimal" : "infeasible"},
      {"total_cost", sol.total_cost},
      {"dispatch", pairs(sol.dispatch)},
      {"angles", pairs(sol.angles)},
      {"ac_flows", pairs(sol.ac_flows)},
      {"hvdc_flows", pairs(sol.hvdc_flows)},
      {"mu", pairs(sol.mu)},
      {"utilization", pairs(sol.utilization)}};
  if (sol.status != OpfStatus::optimal)
    j["infeasibility_hint"] = sol.infeasibility_hint;
  return j;
}

}  // namespace hybridgrid
