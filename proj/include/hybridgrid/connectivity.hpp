#pragma once

#include <functional>
#include <vector>

#include "hybridgrid/grid.hpp"

namespace hybridgrid {

/// Selects which edges participate in a connectivity query. Defaults to all.
struct EdgeSelect {
  std::function<bool(const Branch&)> branch;
  std::function<bool(const HvdcLink&)> link;
};

struct Connectivity {
  bool connected = false;
  // Disjoint partition of all bus ids; each component sorted ascending,
  // components ordered by their smallest bus id.
  std::vector<std::vector<Id>> components;
};

Connectivity connectivity(const Network& net, const EdgeSelect& select = {});

}  // namespace hybridgrid
