#include "hybridgrid/cost.hpp"

#include <cmath>
#include <sstream>

#include "hybridgrid/json_canon.hpp"

namespace hybridgrid {

namespace {

using nlohmann::json;

long long keur_rate(double meur) { return std::llround(meur * 1000.0); }

CostItem make_item(std::string category, double quantity, std::string unit,
                   long long unit_cost_keur) {
  CostItem item;
  item.category = std::move(category);
  item.quantity = quantity;
  item.unit = std::move(unit);
  item.unit_cost_keur = unit_cost_keur;
  item.total_keur = std::llround(quantity * static_cast<double>(unit_cost_keur));
  return item;
}

struct NewKm {
  double ac = 0.0;
  double dc_overhead = 0.0;
  double dc_cable = 0.0;
};

NewKm new_line_km(const Network& net) {
  NewKm km;
  for (const auto& br : net.branches)
    if (br.status == BranchStatus::new_build) km.ac += br.length_km;
  for (const auto& link : net.hvdc_links) {
    if (link.origin != LinkOrigin::new_line) continue;
    (link.cable ? km.dc_cable : km.dc_overhead) += link.length_km;
  }
  return km;
}

}  // namespace

CostAssumptions load_assumptions(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  CostAssumptions a;
  a.ac_line_eur_per_km = j.value("ac_line_eur_per_km", a.ac_line_eur_per_km);
  a.dc_overhead_eur_per_km =
      j.value("dc_overhead_eur_per_km", a.dc_overhead_eur_per_km);
  a.dc_cable_eur_per_km = j.value("dc_cable_eur_per_km", a.dc_cable_eur_per_km);
  a.ac_to_dc_conversion_eur_per_km =
      j.value("ac_to_dc_conversion_eur_per_km", a.ac_to_dc_conversion_eur_per_km);
  a.vsc_eur_per_mva = j.value("vsc_eur_per_mva", a.vsc_eur_per_mva);
  a.b2b_station_factor = j.value("b2b_station_factor", a.b2b_station_factor);
  a.vsc_terminals_per_line =
      j.value("vsc_terminals_per_line", a.vsc_terminals_per_line);
  for (double v : {a.ac_line_eur_per_km, a.dc_overhead_eur_per_km,
                   a.dc_cable_eur_per_km, a.ac_to_dc_conversion_eur_per_km,
                   a.vsc_eur_per_mva, a.b2b_station_factor})
    if (v < 0.0) throw ValidationError(path + ": cost rates must be >= 0");
  return a;
}

CostReport plan_cost(const TransitionPlan& plan, const Network& net,
                     const CostAssumptions& assumptions) {
  double conversion_km = 0.0;
  double line_terminal_mva = 0.0;
  double b2b_mva = 0.0;
  for (const auto& conv : plan.conversions) {
    if (conv.kind == BranchKind::transformer) {
      b2b_mva += conv.installed_mva;
    } else {
      conversion_km += conv.length_km;
      line_terminal_mva += assumptions.vsc_terminals_per_line * conv.installed_mva;
    }
  }
  const NewKm km = new_line_km(net);

  CostReport report;
  report.items.push_back(make_item(
      "ac_to_dc_conversion", conversion_km, "km",
      keur_rate(assumptions.ac_to_dc_conversion_eur_per_km)));
  report.items.push_back(make_item("vsc_substations", line_terminal_mva, "MVA",
                                   keur_rate(assumptions.vsc_eur_per_mva)));
  report.items.push_back(make_item(
      "b2b_stations", b2b_mva, "MVA",
      keur_rate(assumptions.vsc_eur_per_mva * assumptions.b2b_station_factor)));
  report.items.push_back(make_item("new_dc_overhead", km.dc_overhead, "km",
                                   keur_rate(assumptions.dc_overhead_eur_per_km)));
  report.items.push_back(make_item("new_dc_cable", km.dc_cable, "km",
                                   keur_rate(assumptions.dc_cable_eur_per_km)));
  report.items.push_back(make_item("new_ac_lines", km.ac, "km",
                                   keur_rate(assumptions.ac_line_eur_per_km)));
  for (const auto& item : report.items) report.grand_total_keur += item.total_keur;
  return report;
}

CostReport savings_vs_reference(const Network& base, const Network& reference,
                                const CostAssumptions& assumptions) {
  const NewKm base_km = new_line_km(base);
  const NewKm ref_km = new_line_km(reference);

  CostReport report;
  report.items.push_back(make_item("new_ac_lines", ref_km.ac - base_km.ac, "km",
                                   keur_rate(assumptions.ac_line_eur_per_km)));
  report.items.push_back(
      make_item("new_dc_overhead", ref_km.dc_overhead - base_km.dc_overhead,
                "km", keur_rate(assumptions.dc_overhead_eur_per_km)));
  report.items.push_back(make_item("new_dc_cable",
                                   ref_km.dc_cable - base_km.dc_cable, "km",
                                   keur_rate(assumptions.dc_cable_eur_per_km)));
  for (const auto& item : report.items) report.grand_total_keur += item.total_keur;
  return report;
}

LossFit fit_loss_model(const std::vector<std::pair<double, double>>& points,
                       const std::set<std::size_t>& omit) {
  std::vector<std::pair<double, double>> used;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!omit.count(i)) used.push_back(points[i]);
  if (used.size() < 2)
    throw ValidationError("loss-model fit needs at least 2 non-omitted points");

  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : used) {
    sx += x;
    sy += y;
  }
  const double mx = sx / used.size();
  const double my = sy / used.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : used) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx < 1e-12)
    throw ValidationError("loss-model fit needs points with distinct lengths");
  LossFit fit;
  fit.k = sxy / sxx;
  fit.d = my - fit.k * mx;
  return fit;
}

json cost_report_to_json(const CostReport& report) {
  auto items_json = [](const std::vector<CostItem>& items) {
    json arr = json::array();
    for (const auto& item : items) {
      arr.push_back({{"category", item.category},
                     {"quantity", item.quantity},
                     {"unit", item.unit},
                     {"unit_cost_keur", item.unit_cost_keur},
                     {"total_keur", item.total_keur}});
    }
    return arr;
  };
  json j = {{"items", items_json(report.items)},
            {"grand_total_keur", report.grand_total_keur}};
  if (report.has_comparison) {
    j["comparison"] = {{"items", items_json(report.comparison)},
                       {"total_keur", report.comparison_total_keur}};
  }
  return j;
}

std::string cost_report_to_csv(const CostReport& report) {
  std::ostringstream ss;
  ss << "category,quantity,unit,unit_cost_keur,total_keur\n";
  auto emit = [&ss](const std::vector<CostItem>& items) {
    for (const auto& item : items) {
      ss << item.category << "," << format_real(item.quantity) << "," << item.unit
         << "," << item.unit_cost_keur << "," << item.total_keur << "\n";
    }
  };
  emit(report.items);
  ss << "grand_total,,,," << report.grand_total_keur << "\n";
  if (report.has_comparison) {
    emit(report.comparison);
    ss << "comparison_total,,,," << report.comparison_total_keur << "\n";
  }
  return ss.str();
}

}  // namespace hybridgrid
