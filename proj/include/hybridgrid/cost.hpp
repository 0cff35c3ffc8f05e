#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hybridgrid/grid.hpp"
#include "hybridgrid/transition.hpp"
#include "json.hpp"

namespace hybridgrid {

/// Unit rates in MEUR (per km, per MVA). Totals are carried in integer
/// thousands of EUR so reports are exact and byte-stable.
struct CostAssumptions {
  double ac_line_eur_per_km = 1.5;             // MEUR/km, new AC lines
  double dc_overhead_eur_per_km = 1.5;         // MEUR/km, new DC overhead lines
  double dc_cable_eur_per_km = 4.0;            // MEUR/km, new DC cables
  double ac_to_dc_conversion_eur_per_km = 0.2; // MEUR/km, AC line -> DC operation
  double vsc_eur_per_mva = 0.102;              // MEUR/MVA, VSC HVDC substations
  double b2b_station_factor = 1.0;             // B2B station cost multiplier
  int vsc_terminals_per_line = 2;              // substations per converted line
};

CostAssumptions load_assumptions(const std::string& path);

struct CostItem {
  std::string category;
  double quantity = 0.0;
  std::string unit;
  long long unit_cost_keur = 0;
  long long total_keur = 0;
};

struct CostReport {
  std::vector<CostItem> items;
  long long grand_total_keur = 0;
  bool has_comparison = false;
  std::vector<CostItem> comparison;  // delta vs a reference plan
  long long comparison_total_keur = 0;
};

/// Investment cost of a transition plan plus the network's retained new
/// lines: conversion km, VSC substations (2 per converted line), one B2B
/// station per converted transformer, new DC lines at overhead/cable rate,
/// new AC lines at the AC rate.
CostReport plan_cost(const TransitionPlan& plan, const Network& net,
                     const CostAssumptions& assumptions);

/// Per-category new-line km of the reference not present in the base,
/// credited at the applicable rate (negative quantities are debits).
/// Antisymmetric in its arguments.
CostReport savings_vs_reference(const Network& base, const Network& reference,
                                const CostAssumptions& assumptions);

struct LossFit {
  double k = 0.0;  // slope, %/km
  double d = 0.0;  // offset, %
};

/// Ordinary least squares of loss_percent against length_km over the points
/// not listed in omit. Needs >= 2 surviving points with distinct lengths.
LossFit fit_loss_model(const std::vector<std::pair<double, double>>& points,
                       const std::set<std::size_t>& omit = {});

nlohmann::json cost_report_to_json(const CostReport& report);
std::string cost_report_to_csv(const CostReport& report);

}  // namespace hybridgrid
