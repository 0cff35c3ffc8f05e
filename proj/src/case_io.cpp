#include "hybridgrid/case_io.hpp"

#include <sstream>

#include "hybridgrid/json_canon.hpp"

namespace hybridgrid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double num(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) fail(where, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

Id id_of(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer())
    fail(where, std::string("field '") + key + "' must be an integer id");
  return v.get<Id>();
}

std::string str(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_string()) fail(where, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

bool flag(const json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) throw ParseError(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

std::optional<std::string> opt_str(const json& j, const char* key,
                                   const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    fail(where, std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

json opt_to_json(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

BranchKind branch_kind(const std::string& s, const std::string& where) {
  if (s == "line") return BranchKind::line;
  if (s == "transformer") return BranchKind::transformer;
  fail(where, "kind must be 'line' or 'transformer'");
}

BranchStatus branch_status(const std::string& s, const std::string& where) {
  if (s == "existing") return BranchStatus::existing;
  if (s == "new") return BranchStatus::new_build;
  fail(where, "status must be 'existing' or 'new'");
}

GeneratorKind gen_kind(const std::string& s, const std::string& where) {
  if (s == "conventional") return GeneratorKind::conventional;
  if (s == "res") return GeneratorKind::res;
  fail(where, "kind must be 'conventional' or 'res'");
}

LinkOrigin link_origin(const std::string& s, const std::string& where) {
  if (s == "converted_line") return LinkOrigin::converted_line;
  if (s == "converted_transformer") return LinkOrigin::converted_transformer;
  if (s == "new_line") return LinkOrigin::new_line;
  fail(where, "origin must be converted_line, converted_transformer or new_line");
}

}  // namespace

Network case_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("case: top level must be an object");
  Network net;
  net.base_mva = num(j, "base_mva", "case");

  for (const auto& bj : field(j, "buses", "case")) {
    Bus bus;
    bus.id = id_of(bj, "id", "bus");
    std::ostringstream where;
    where << "bus " << bus.id;
    bus.name = bj.contains("name") && bj["name"].is_string()
                   ? bj["name"].get<std::string>()
                   : "";
    bus.load_mw = num(bj, "load_mw", where.str());
    bus.load_profile_id = opt_str(bj, "load_profile_id", where.str());
    net.buses.push_back(std::move(bus));
  }

  for (const auto& bj : field(j, "branches", "case")) {
    Branch br;
    br.id = id_of(bj, "id", "branch");
    std::ostringstream where;
    where << "branch " << br.id;
    br.from_bus = id_of(bj, "from_bus", where.str());
    br.to_bus = id_of(bj, "to_bus", where.str());
    br.kind = branch_kind(str(bj, "kind", where.str()), where.str());
    br.r = num(bj, "r", where.str());
    br.b = num(bj, "b", where.str());
    br.rating = num(bj, "rating", where.str());
    br.length_km = num(bj, "length_km", where.str());
    br.status = branch_status(str(bj, "status", where.str()), where.str());
    br.essential = flag(bj, "essential", false);
    net.branches.push_back(std::move(br));
  }

  for (const auto& gj : field(j, "generators", "case")) {
    Generator gen;
    gen.id = id_of(gj, "id", "generator");
    std::ostringstream where;
    where << "generator " << gen.id;
    gen.bus = id_of(gj, "bus", where.str());
    gen.p_min = num(gj, "p_min", where.str());
    gen.p_max = num(gj, "p_max", where.str());
    const json& cost = field(gj, "cost", where.str());
    if (!cost.is_array() || cost.empty())
      fail(where.str(), "cost must be a non-empty array of [mw, eur_per_h] pairs");
    for (const auto& pt : cost) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
        fail(where.str(), "cost entries must be [mw, eur_per_h] pairs");
      gen.cost.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    gen.kind = gen_kind(str(gj, "kind", where.str()), where.str());
    gen.res_profile_id = opt_str(gj, "res_profile_id", where.str());
    net.generators.push_back(std::move(gen));
  }

  for (const auto& lj : field(j, "hvdc_links", "case")) {
    HvdcLink link;
    link.id = id_of(lj, "id", "hvdc_link");
    std::ostringstream where;
    where << "hvdc_link " << link.id;
    link.from_bus = id_of(lj, "from_bus", where.str());
    link.to_bus = id_of(lj, "to_bus", where.str());
    link.p_max = num(lj, "p_max", where.str());
    link.q_max = num(lj, "q_max", where.str());
    link.loss_k = num(lj, "loss_k", where.str());
    link.loss_d = num(lj, "loss_d", where.str());
    link.length_km = num(lj, "length_km", where.str());
    link.converter_id = lj.contains("converter_id") && lj["converter_id"].is_string()
                            ? lj["converter_id"].get<std::string>()
                            : "";
    link.origin = link_origin(str(lj, "origin", where.str()), where.str());
    link.cable = flag(lj, "cable", false);
    net.hvdc_links.push_back(std::move(link));
  }

  if (j.contains("profiles")) {
    const json& profs = j["profiles"];
    if (!profs.is_object()) throw ParseError("case: profiles must be an object");
    for (auto it = profs.begin(); it != profs.end(); ++it) {
      std::vector<double> series;
      if (!it.value().is_array())
        throw ParseError("profile " + it.key() + ": must be an array of numbers");
      for (const auto& v : it.value()) {
        if (!v.is_number())
          throw ParseError("profile " + it.key() + ": must be an array of numbers");
        series.push_back(v.get<double>());
      }
      net.profiles.emplace(it.key(), std::move(series));
    }
  }

  sort_canonical(net);
  validate(net);
  return net;
}

json case_to_json(const Network& net_in) {
  Network net = net_in;
  sort_canonical(net);

  json j;
  j["base_mva"] = net.base_mva;

  json buses = json::array();
  for (const auto& bus : net.buses) {
    buses.push_back({{"id", bus.id},
                     {"name", bus.name},
                     {"load_mw", bus.load_mw},
                     {"load_profile_id", opt_to_json(bus.load_profile_id)}});
  }
  j["buses"] = std::move(buses);

  json branches = json::array();
  for (const auto& br : net.branches) {
    branches.push_back({{"id", br.id},
                        {"from_bus", br.from_bus},
                        {"to_bus", br.to_bus},
                        {"kind", to_string(br.kind)},
                        {"r", br.r},
                        {"b", br.b},
                        {"rating", br.rating},
                        {"length_km", br.length_km},
                        {"status", to_string(br.status)},
                        {"essential", br.essential}});
  }
  j["branches"] = std::move(branches);

  json gens = json::array();
  for (const auto& gen : net.generators) {
    json cost = json::array();
    for (const auto& pt : gen.cost) cost.push_back({pt.mw, pt.eur_per_h});
    gens.push_back({{"id", gen.id},
                    {"bus", gen.bus},
                    {"p_min", gen.p_min},
                    {"p_max", gen.p_max},
                    {"cost", std::move(cost)},
                    {"kind", to_string(gen.kind)},
                    {"res_profile_id", opt_to_json(gen.res_profile_id)}});
  }
  j["generators"] = std::move(gens);

  json links = json::array();
  for (const auto& link : net.hvdc_links) {
    links.push_back({{"id", link.id},
                     {"from_bus", link.from_bus},
                     {"to_bus", link.to_bus},
                     {"p_max", link.p_max},
                     {"q_max", link.q_max},
                     {"loss_k", link.loss_k},
                     {"loss_d", link.loss_d},
                     {"length_km", link.length_km},
                     {"converter_id", link.converter_id},
                     {"origin", to_string(link.origin)},
                     {"cable", link.cable}});
  }
  j["hvdc_links"] = std::move(links);

  json profs = json::object();
  for (const auto& [pid, series] : net.profiles) profs[pid] = series;
  j["profiles"] = std::move(profs);

  return j;
}

Network load_case(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return case_from_json(j);
}

void save_case(const Network& net, const std::string& path) {
  validate(net);
  write_file(path, dump_canonical(case_to_json(net)));
}

}  // namespace hybridgrid
