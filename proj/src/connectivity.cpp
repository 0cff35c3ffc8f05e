#include "hybridgrid/connectivity.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace hybridgrid {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);  // smaller root wins, keeps things deterministic
    parent[b] = a;
  }
};

}  // namespace

Connectivity connectivity(const Network& net, const EdgeSelect& select) {
  std::map<Id, int> index;
  for (const auto& bus : net.buses) index.emplace(bus.id, 0);
  int next = 0;
  for (auto& [id, idx] : index) idx = next++;

  UnionFind uf(index.size());
  for (const auto& br : net.branches) {
    if (select.branch && !select.branch(br)) continue;
    auto f = index.find(br.from_bus);
    auto t = index.find(br.to_bus);
    if (f == index.end() || t == index.end()) continue;
    uf.unite(f->second, t->second);
  }
  for (const auto& link : net.hvdc_links) {
    if (select.link && !select.link(link)) continue;
    auto f = index.find(link.from_bus);
    auto t = index.find(link.to_bus);
    if (f == index.end() || t == index.end()) continue;
    uf.unite(f->second, t->second);
  }

  std::map<int, std::vector<Id>> groups;
  for (const auto& [id, idx] : index) groups[uf.find(idx)].push_back(id);

  Connectivity out;
  for (auto& [root, ids] : groups) {
    std::sort(ids.begin(), ids.end());
    out.components.push_back(std::move(ids));
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.connected = out.components.size() <= 1;
  return out;
}

}  // namespace hybridgrid
