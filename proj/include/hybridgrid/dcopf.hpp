#pragma once

#include <map>
#include <string>

#include "hybridgrid/grid.hpp"
#include "hybridgrid/lp.hpp"
#include "json.hpp"

namespace hybridgrid {

/// One linearized OPF instance. Scales and availability factors default to 1
/// for entities not present in the maps.
struct OpfProblem {
  Network net;
  std::map<Id, double> load_scale;        // per bus, >= 0
  std::map<Id, double> res_availability;  // per RES generator, in [0, 1]

  double load_scale_at(Id bus) const;
  double res_factor_at(Id gen) const;
};

enum class OpfStatus { optimal, infeasible };

struct OpfSolution {
  OpfStatus status = OpfStatus::infeasible;
  std::map<Id, double> dispatch;     // MW per generator
  std::map<Id, double> angles;       // rad per bus, reference bus = 0
  std::map<Id, double> ac_flows;     // MW per branch, from->to positive
  std::map<Id, double> hvdc_flows;   // signed MW per link at the sending end
  std::map<Id, double> mu;           // EUR/MWh flow-limit dual per branch
  std::map<Id, double> utilization;  // percent per branch
  double total_cost = 0.0;           // EUR/h
  double dual_cost = 0.0;            // dual objective, for gap checks
  std::string infeasibility_hint;    // which balance cannot be met
};

/// (loss_k * length_km + loss_d) / 100. Throws ValidationError when the
/// result is outside [0, 0.2) (implausible catalog data).
double hvdc_loss_fraction(const HvdcLink& link);

/// Assembles the OPF as a canonical-form LP. Variables: one output plus one
/// variable per cost segment per generator, one angle per bus (reference
/// fixed at 0), one flow per AC branch, two nonnegative directed flows per
/// HVDC link. Rows: bus balances, AC flow definitions, generator linking.
LinearProgram build_lp(const OpfProblem& prob);

/// Solves the LP and extracts dispatch, flows, branch duals mu_k and
/// utilizations U_k. Deterministic for identical inputs.
OpfSolution solve(const OpfProblem& prob);

/// Solution as JSON, ids as [id, value] pairs sorted by id.
nlohmann::json solution_to_json(const OpfSolution& sol);

}  // namespace hybridgrid
