#pragma once

#include "mlo/params.hpp"

#include <iosfwd>
#include <string>

namespace mlo {

/// INI config with sections [scenario], [backoff], [phy]. Every key is
/// optional and falls back to the struct default; unknown sections or keys
/// are rejected. gamma accepts a number or "auto".
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(std::istream& in, const std::string& origin = "<input>");

void write_config(std::ostream& out, const ScenarioConfig& cfg);

} // namespace mlo
