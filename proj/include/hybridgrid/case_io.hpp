#pragma once

#include <string>

#include "hybridgrid/grid.hpp"
#include "json.hpp"

namespace hybridgrid {

/// Loads and validates a JSON case file.
/// Throws ParseError for malformed files, ValidationError for invariant
/// violations (message names the offending entity).
Network load_case(const std::string& path);

/// Canonical serialization: entities sorted by id, reals with 9 significant
/// digits. save_case(load_case(p)) reproduces p byte-for-byte when p was
/// produced by save_case.
void save_case(const Network& net, const std::string& path);

nlohmann::json case_to_json(const Network& net);
Network case_from_json(const nlohmann::json& j);

}  // namespace hybridgrid
