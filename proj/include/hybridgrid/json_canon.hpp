#pragma once

#include <string>

#include "json.hpp"

namespace hybridgrid {

/// Canonical JSON rendering: object keys sorted, 2-space indent, reals with
/// 9 significant digits, trailing newline. Two calls on equal documents
/// yield identical bytes, which is what the golden-file tests rely on.
std::string dump_canonical(const nlohmann::json& j);

/// Formats one real with 9 significant digits (%.9g, -0 normalized to 0).
std::string format_real(double v);

/// Writes text to path atomically-ish (throws IoError on failure).
void write_file(const std::string& path, const std::string& text);

/// Reads a whole file (throws IoError on failure).
std::string read_file(const std::string& path);

}  // namespace hybridgrid
