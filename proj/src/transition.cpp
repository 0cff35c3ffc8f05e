#include "hybridgrid/transition.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hybridgrid/connectivity.hpp"
#include "hybridgrid/json_canon.hpp"

namespace hybridgrid {

namespace {

using nlohmann::json;

double mu_of(const OpfSolution& sol, Id branch_id) {
  auto it = sol.mu.find(branch_id);
  if (it == sol.mu.end()) {
    std::ostringstream ss;
    ss << "OPF solution carries no dual for branch " << branch_id;
    throw ValidationError(ss.str());
  }
  return it->second;
}

double utilization_of(const OpfSolution& sol, Id branch_id) {
  auto it = sol.utilization.find(branch_id);
  if (it == sol.utilization.end()) {
    std::ostringstream ss;
    ss << "OPF solution carries no utilization for branch " << branch_id;
    throw ValidationError(ss.str());
  }
  return it->second;
}

}  // namespace

std::vector<ConverterModule> load_catalog(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("modules") || !j["modules"].is_array())
    throw ParseError(path + ": expected an object with a 'modules' array");
  std::vector<ConverterModule> catalog;
  for (const auto& mj : j["modules"]) {
    ConverterModule mod;
    if (!mj.contains("id") || !mj["id"].is_string())
      throw ParseError(path + ": module without string id");
    mod.id = mj["id"].get<std::string>();
    if (!mj.contains("rating_mva") || !mj["rating_mva"].is_number())
      throw ParseError(path + ": module " + mod.id + " needs rating_mva");
    mod.rating_mva = mj["rating_mva"].get<double>();
    if (mod.rating_mva <= 0.0)
      throw ValidationError("module " + mod.id + ": rating_mva must be > 0");
    mod.b2b_only = mj.value("b2b_only", false);
    mod.loss_k = mj.value("loss_k", 0.0);
    mod.loss_d = mj.value("loss_d", 0.0);
    if (mod.loss_d <= 0.0)
      throw ValidationError("module " + mod.id + ": loss_d must be > 0");
    if (mj.contains("max_line_km") && !mj["max_line_km"].is_null())
      mod.max_line_km = mj["max_line_km"].get<double>();
    catalog.push_back(std::move(mod));
  }
  if (catalog.empty()) throw ValidationError(path + ": empty converter catalog");
  return catalog;
}

RatingConfig load_rating_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  RatingConfig cfg;
  cfg.mu_tol = j.value("mu_tol", cfg.mu_tol);
  cfg.u_high = j.value("u_high", cfg.u_high);
  cfg.u_low = j.value("u_low", cfg.u_low);
  cfg.up_factor = j.value("up_factor", cfg.up_factor);
  cfg.high_factor = j.value("high_factor", cfg.high_factor);
  cfg.mid_factor = j.value("mid_factor", cfg.mid_factor);
  cfg.low_factor = j.value("low_factor", cfg.low_factor);
  return cfg;
}

double suitability(const Branch& branch, const OpfSolution& sol, double r_max) {
  const double base = mu_of(sol, branch.id) + branch.r;
  return branch.kind == BranchKind::transformer ? base + r_max : base;
}

TreeSplit select_conversions(const Network& net,
                             const std::map<Id, double>& weights) {
  const auto conn = connectivity(net, {.branch = {}, .link = [](const HvdcLink&) {
                                         return false;
                                       }});
  if (!conn.connected) {
    std::ostringstream ss;
    ss << "AC-branch graph is disconnected; components:";
    for (const auto& comp : conn.components) {
      ss << " {";
      for (std::size_t i = 0; i < comp.size(); ++i)
        ss << (i ? "," : "") << comp[i];
      ss << "}";
    }
    throw ValidationError(ss.str());
  }

  std::map<Id, int> bus_index;
  for (const auto& bus : net.buses) bus_index.emplace(bus.id, 0);
  int next = 0;
  for (auto& [id, idx] : bus_index) idx = next++;

  struct Edge {
    double weight;
    Id id;
    int from, to;
  };
  std::vector<Edge> edges;
  edges.reserve(net.branches.size());
  for (const auto& br : net.branches) {
    auto it = weights.find(br.id);
    if (it == weights.end()) {
      std::ostringstream ss;
      ss << "no suitability weight for branch " << br.id;
      throw ValidationError(ss.str());
    }
    edges.push_back({it->second, br.id, bus_index.at(br.from_bus),
                     bus_index.at(br.to_bus)});
  }
  // Kruskal with (weight, id) keys: the id tie-break pins the tree.
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.id < b.id;
  });

  std::vector<int> parent(bus_index.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };

  TreeSplit split;
  for (const auto& e : edges) {
    const int a = find(e.from), b = find(e.to);
    if (a == b) {
      split.off_tree.push_back(e.id);
    } else {
      parent[std::max(a, b)] = std::min(a, b);
      split.tree.push_back(e.id);
    }
  }
  std::sort(split.tree.begin(), split.tree.end());
  std::sort(split.off_tree.begin(), split.off_tree.end());
  return split;
}

std::string count_spanning_trees(const Network& net) {
  const std::size_t n = net.buses.size();
  if (n == 0) return "0";
  if (n == 1) return "1";

  std::map<Id, std::size_t> bus_index;
  for (const auto& bus : net.buses) bus_index.emplace(bus.id, 0);
  std::size_t next = 0;
  for (auto& [id, idx] : bus_index) idx = next++;

  // Laplacian of the AC multigraph; spanning trees = any cofactor.
  const std::size_t dim = n - 1;
  std::vector<mpz_class> lap(dim * dim, 0);
  auto at = [&lap, dim](std::size_t i, std::size_t j) -> mpz_class& {
    return lap[i * dim + j];
  };
  for (const auto& br : net.branches) {
    const std::size_t i = bus_index.at(br.from_bus);
    const std::size_t j = bus_index.at(br.to_bus);
    if (i < dim) at(i, i) += 1;
    if (j < dim) at(j, j) += 1;
    if (i < dim && j < dim) {
      at(i, j) -= 1;
      at(j, i) -= 1;
    }
  }

  // Bareiss fraction-free elimination: exact integer determinant.
  mpz_class prev = 1;
  int sign = 1;
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = col;
    while (piv < dim && at(piv, col) == 0) ++piv;
    if (piv == dim) return "0";
    if (piv != col) {
      for (std::size_t k = 0; k < dim; ++k) std::swap(at(piv, k), at(col, k));
      sign = -sign;
    }
    for (std::size_t i = col + 1; i < dim; ++i) {
      for (std::size_t k = col + 1; k < dim; ++k) {
        at(i, k) = (at(col, col) * at(i, k) - at(i, col) * at(col, k)) / prev;
      }
      at(i, col) = 0;
    }
    prev = at(col, col);
  }
  mpz_class det = at(dim - 1, dim - 1);
  if (sign < 0) det = -det;
  return det.get_str();
}

double target_rating(const Branch& branch, const OpfSolution& sol,
                     const RatingConfig& cfg) {
  const double mu = mu_of(sol, branch.id);
  const double u = utilization_of(sol, branch.id);
  if (mu > cfg.mu_tol) return cfg.up_factor * branch.rating;   // congested: uprate
  if (u >= cfg.u_high) return cfg.high_factor * branch.rating; // keep capacity
  if (u >= cfg.u_low) return cfg.mid_factor * branch.rating;
  return cfg.low_factor * branch.rating;
}

ConverterChoice select_converter(double target_mva, bool is_b2b,
                                 double length_km,
                                 const std::vector<ConverterModule>& catalog) {
  const ConverterModule* best_fit = nullptr;   // smallest rating >= target
  const ConverterModule* largest = nullptr;    // largest eligible
  for (const auto& mod : catalog) {
    if (mod.b2b_only && !is_b2b) continue;
    if (mod.max_line_km && length_km > *mod.max_line_km) continue;
    if (mod.rating_mva >= target_mva &&
        (!best_fit || mod.rating_mva < best_fit->rating_mva))
      best_fit = &mod;
    if (!largest || mod.rating_mva > largest->rating_mva) largest = &mod;
  }
  if (!largest) {
    std::ostringstream ss;
    ss << "no eligible converter module for a "
       << (is_b2b ? "back-to-back" : "line") << " conversion of " << target_mva
       << " MVA";
    throw ValidationError(ss.str());
  }
  if (best_fit) return {best_fit->id, 1};
  const int count =
      static_cast<int>(std::ceil(target_mva / largest->rating_mva - 1e-12));
  return {largest->id, std::max(count, 1)};
}

TransitionResult build_transition(const Network& net, const OpfSolution& sol,
                                  const std::vector<ConverterModule>& catalog,
                                  const RatingConfig& cfg) {
  if (sol.status != OpfStatus::optimal)
    throw ValidationError("transition planning needs an optimal OPF solution");

  double r_max = 0.0;
  for (const auto& br : net.branches) r_max = std::max(r_max, br.r);

  std::map<Id, double> weights;
  for (const auto& br : net.branches)
    weights[br.id] = suitability(br, sol, r_max);

  const TreeSplit split = select_conversions(net, weights);

  std::map<std::string, const ConverterModule*> module_of;
  for (const auto& mod : catalog) module_of.emplace(mod.id, &mod);

  Id next_link_id = 0;
  for (const auto& link : net.hvdc_links)
    next_link_id = std::max(next_link_id, link.id);
  ++next_link_id;

  TransitionResult result;
  result.converted = net;
  result.converted.branches.clear();
  result.plan.tree_branch_ids = split.tree;

  const std::set<Id> tree_set(split.tree.begin(), split.tree.end());
  double factor_sum = 0.0, target_factor_sum = 0.0;
  for (const auto& br : net.branches) {
    if (tree_set.count(br.id)) {
      result.converted.branches.push_back(br);
      continue;
    }

    Conversion conv;
    conv.branch_id = br.id;
    conv.kind = br.kind;
    conv.length_km = br.length_km;
    conv.rating_before = br.rating;
    conv.target_rating = target_rating(br, sol, cfg);
    const bool is_b2b = br.kind == BranchKind::transformer;
    const ConverterChoice choice =
        select_converter(conv.target_rating, is_b2b, br.length_km, catalog);
    conv.converter_id = choice.converter_id;
    conv.module_count = choice.module_count;
    const ConverterModule& mod = *module_of.at(choice.converter_id);
    conv.installed_mva = choice.module_count * mod.rating_mva;

    HvdcLink link;
    link.id = next_link_id++;
    link.from_bus = br.from_bus;
    link.to_bus = br.to_bus;
    link.p_max = conv.installed_mva;
    link.q_max = 0.5 * conv.installed_mva;  // VSC reactive capability
    link.loss_k = mod.loss_k;
    link.loss_d = mod.loss_d;
    link.length_km = br.length_km;
    link.converter_id = mod.id;
    link.origin = is_b2b ? LinkOrigin::converted_transformer
                         : LinkOrigin::converted_line;
    link.cable = false;
    hvdc_loss_fraction(link);  // reject implausible catalog data early
    conv.link = link;
    result.converted.hvdc_links.push_back(link);

    auto& summary = result.plan.summary;
    if (is_b2b)
      ++summary.transformers_converted;
    else
      ++summary.lines_converted;
    summary.km_converted += br.length_km;
    if (conv.installed_mva > br.rating) ++summary.uprated;
    factor_sum += conv.installed_mva / br.rating;
    target_factor_sum += conv.target_rating / br.rating;

    result.plan.conversions.push_back(std::move(conv));
  }

  const std::size_t n_conv = result.plan.conversions.size();
  if (n_conv > 0) {
    result.plan.summary.avg_capacity_factor = factor_sum / n_conv;
    result.plan.summary.avg_target_factor = target_factor_sum / n_conv;
  }
  validate(result.converted);
  return result;
}

json plan_to_json(const TransitionPlan& plan) {
  json conversions = json::array();
  for (const auto& conv : plan.conversions) {
    conversions.push_back(
        {{"branch_id", conv.branch_id},
         {"kind", to_string(conv.kind)},
         {"length_km", conv.length_km},
         {"rating_before", conv.rating_before},
         {"target_rating", conv.target_rating},
         {"converter_id", conv.converter_id},
         {"module_count", conv.module_count},
         {"installed_mva", conv.installed_mva},
         {"link",
          {{"id", conv.link.id},
           {"from_bus", conv.link.from_bus},
           {"to_bus", conv.link.to_bus},
           {"p_max", conv.link.p_max},
           {"q_max", conv.link.q_max},
           {"loss_k", conv.link.loss_k},
           {"loss_d", conv.link.loss_d},
           {"length_km", conv.link.length_km},
           {"converter_id", conv.link.converter_id},
           {"origin", to_string(conv.link.origin)},
           {"cable", conv.link.cable}}}});
  }
  const auto& s = plan.summary;
  return {{"conversions", std::move(conversions)},
          {"tree_branch_ids", plan.tree_branch_ids},
          {"summary",
           {{"lines_converted", s.lines_converted},
            {"transformers_converted", s.transformers_converted},
            {"uprated", s.uprated},
            {"km_converted", s.km_converted},
            {"avg_capacity_factor", s.avg_capacity_factor},
            {"avg_target_factor", s.avg_target_factor}}}};
}

TransitionPlan plan_from_json(const json& j) {
  TransitionPlan plan;
  for (const auto& cj : j.at("conversions")) {
    Conversion conv;
    conv.branch_id = cj.at("branch_id").get<Id>();
    conv.kind = cj.at("kind").get<std::string>() == "transformer"
                    ? BranchKind::transformer
                    : BranchKind::line;
    conv.length_km = cj.at("length_km").get<double>();
    conv.rating_before = cj.at("rating_before").get<double>();
    conv.target_rating = cj.at("target_rating").get<double>();
    conv.converter_id = cj.at("converter_id").get<std::string>();
    conv.module_count = cj.at("module_count").get<int>();
    conv.installed_mva = cj.at("installed_mva").get<double>();
    const auto& lj = cj.at("link");
    conv.link.id = lj.at("id").get<Id>();
    conv.link.from_bus = lj.at("from_bus").get<Id>();
    conv.link.to_bus = lj.at("to_bus").get<Id>();
    conv.link.p_max = lj.at("p_max").get<double>();
    conv.link.q_max = lj.at("q_max").get<double>();
    conv.link.loss_k = lj.at("loss_k").get<double>();
    conv.link.loss_d = lj.at("loss_d").get<double>();
    conv.link.length_km = lj.at("length_km").get<double>();
    conv.link.converter_id = lj.at("converter_id").get<std::string>();
    const std::string origin = lj.at("origin").get<std::string>();
    conv.link.origin = origin == "converted_line" ? LinkOrigin::converted_line
                       : origin == "converted_transformer"
                           ? LinkOrigin::converted_transformer
                           : LinkOrigin::new_line;
    conv.link.cable = lj.value("cable", false);
    plan.conversions.push_back(std::move(conv));
  }
  plan.tree_branch_ids = j.at("tree_branch_ids").get<std::vector<Id>>();
  const auto& s = j.at("summary");
  plan.summary.lines_converted = s.at("lines_converted").get<int>();
  plan.summary.transformers_converted = s.at("transformers_converted").get<int>();
  plan.summary.uprated = s.at("uprated").get<int>();
  plan.summary.km_converted = s.at("km_converted").get<double>();
  plan.summary.avg_capacity_factor = s.at("avg_capacity_factor").get<double>();
  plan.summary.avg_target_factor = s.at("avg_target_factor").get<double>();
  return plan;
}

}  // namespace hybridgrid
