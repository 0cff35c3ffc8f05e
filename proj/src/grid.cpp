#include "hybridgrid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hybridgrid/connectivity.hpp"

namespace hybridgrid {

std::string to_string(BranchKind k) {
  return k == BranchKind::line ? "line" : "transformer";
}

std::string to_string(BranchStatus s) {
  return s == BranchStatus::existing ? "existing" : "new";
}

std::string to_string(GeneratorKind k) {
  return k == GeneratorKind::conventional ? "conventional" : "res";
}

std::string to_string(LinkOrigin o) {
  switch (o) {
    case LinkOrigin::converted_line:
      return "converted_line";
    case LinkOrigin::converted_transformer:
      return "converted_transformer";
    default:
      return "new_line";
  }
}

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& v, Id id) {
  for (const auto& e : v)
    if (e.id == id) return &e;
  return nullptr;
}

std::string ident(const char* what, Id id) {
  std::ostringstream ss;
  ss << what << " " << id;
  return ss.str();
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

const Bus* Network::find_bus(Id id) const { return find_by_id(buses, id); }
const Branch* Network::find_branch(Id id) const { return find_by_id(branches, id); }
const HvdcLink* Network::find_link(Id id) const { return find_by_id(hvdc_links, id); }

std::vector<CostSegment> cost_segments(const Generator& gen) {
  const auto& pts = gen.cost;
  if (pts.empty())
    throw ValidationError(ident("generator", gen.id) + ": empty cost curve");
  std::vector<CostSegment> segs;
  segs.reserve(pts.size() - 1);
  double prev_marginal = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double w = pts[i + 1].mw - pts[i].mw;
    if (w <= 0.0)
      throw ValidationError(ident("generator", gen.id) +
                            ": cost breakpoints not strictly increasing");
    const double m = (pts[i + 1].eur_per_h - pts[i].eur_per_h) / w;
    if (m < prev_marginal - 1e-9)
      throw ValidationError(ident("generator", gen.id) +
                            ": cost curve not convex (marginal cost decreases)");
    prev_marginal = m;
    segs.push_back({w, m});
  }
  return segs;
}

double cost_at(const Generator& gen, double p) {
  const auto& pts = gen.cost;
  p = std::max(gen.p_min, std::min(gen.p_max, p));
  double c = pts.front().eur_per_h;
  double base = pts.front().mw;
  for (const auto& seg : cost_segments(gen)) {
    const double take = std::max(0.0, std::min(seg.width_mw, p - base));
    c += take * seg.marginal_eur_per_mwh;
    base += seg.width_mw;
  }
  return c;
}

void validate(const Network& net) {
  if (!(net.base_mva > 0.0) || !finite(net.base_mva))
    throw ValidationError("base_mva must be positive");

  std::set<Id> bus_ids;
  for (const auto& bus : net.buses) {
    if (!bus_ids.insert(bus.id).second)
      throw ValidationError(ident("bus", bus.id) + ": duplicate id");
    if (bus.load_mw < 0.0 || !finite(bus.load_mw))
      throw ValidationError(ident("bus", bus.id) + ": load_mw must be >= 0");
  }

  auto require_bus = [&](Id bus, const std::string& owner) {
    if (!bus_ids.count(bus)) {
      std::ostringstream ss;
      ss << owner << ": unknown bus " << bus;
      throw ValidationError(ss.str());
    }
  };

  std::set<Id> branch_ids;
  for (const auto& br : net.branches) {
    const std::string who = ident("branch", br.id);
    if (!branch_ids.insert(br.id).second)
      throw ValidationError(who + ": duplicate id");
    require_bus(br.from_bus, who);
    require_bus(br.to_bus, who);
    if (br.from_bus == br.to_bus)
      throw ValidationError(who + ": from_bus equals to_bus");
    if (!(br.r > 0.0) || !finite(br.r))
      throw ValidationError(who + ": r must be > 0");
    if (!(br.b > 0.0) || !finite(br.b))
      throw ValidationError(who + ": b must be > 0");
    if (!(br.rating > 0.0) || !finite(br.rating))
      throw ValidationError(who + ": rating must be > 0");
    if (br.length_km < 0.0 || !finite(br.length_km))
      throw ValidationError(who + ": length_km must be >= 0");
    if (br.kind == BranchKind::transformer && br.length_km != 0.0)
      throw ValidationError(who + ": transformer must have length_km = 0");
  }

  std::set<Id> link_ids;
  for (const auto& link : net.hvdc_links) {
    const std::string who = ident("hvdc_link", link.id);
    if (!link_ids.insert(link.id).second)
      throw ValidationError(who + ": duplicate id");
    require_bus(link.from_bus, who);
    require_bus(link.to_bus, who);
    if (link.from_bus == link.to_bus)
      throw ValidationError(who + ": from_bus equals to_bus");
    if (!(link.p_max > 0.0) || !finite(link.p_max))
      throw ValidationError(who + ": p_max must be > 0");
    if (std::abs(link.q_max - 0.5 * link.p_max) > 1e-6 * link.p_max)
      throw ValidationError(who + ": q_max must equal 0.5 * p_max");
    if (link.length_km < 0.0 || !finite(link.length_km))
      throw ValidationError(who + ": length_km must be >= 0");
    const double lambda = (link.loss_k * link.length_km + link.loss_d) / 100.0;
    if (lambda < 0.0 || lambda >= 0.2 || !finite(lambda))
      throw ValidationError(who + ": loss fraction outside [0, 0.2)");
  }

  std::set<Id> gen_ids;
  for (const auto& gen : net.generators) {
    const std::string who = ident("generator", gen.id);
    if (!gen_ids.insert(gen.id).second)
      throw ValidationError(who + ": duplicate id");
    require_bus(gen.bus, who);
    if (gen.p_min < 0.0 || gen.p_min > gen.p_max || !finite(gen.p_max))
      throw ValidationError(who + ": need 0 <= p_min <= p_max");
    if (gen.cost.empty())
      throw ValidationError(who + ": empty cost curve");
    if (std::abs(gen.cost.front().mw - gen.p_min) > 1e-9 * std::max(1.0, gen.p_min))
      throw ValidationError(who + ": first cost breakpoint must equal p_min");
    if (std::abs(gen.cost.back().mw - gen.p_max) > 1e-9 * std::max(1.0, gen.p_max))
      throw ValidationError(who + ": last cost breakpoint must equal p_max");
    if (gen.cost.size() > 1) cost_segments(gen);  // strict increase + convexity
  }

  for (const auto& [pid, series] : net.profiles) {
    for (double v : series)
      if (!finite(v) || v < 0.0)
        throw ValidationError("profile " + pid + ": values must be finite and >= 0");
  }

  if (!net.buses.empty()) {
    const auto conn = connectivity(net);
    if (!conn.connected) {
      std::ostringstream ss;
      ss << "grid is disconnected (" << conn.components.size() << " components)";
      throw ValidationError(ss.str());
    }
  }
}

void sort_canonical(Network& net) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(net.buses.begin(), net.buses.end(), by_id);
  std::sort(net.branches.begin(), net.branches.end(), by_id);
  std::sort(net.hvdc_links.begin(), net.hvdc_links.end(), by_id);
  std::sort(net.generators.begin(), net.generators.end(), by_id);
}

}  // namespace hybridgrid
