#pragma once

#include <string>
#include <string_view>

#include "rssfp/simulator.hpp"

namespace rssfp {

/// "office" and "hall" name the built-in presets. Throws kInvalidInput for
/// anything else.
Scenario preset_by_name(const std::string& name);

/// Parses a scenario document. A top-level "preset" key selects the base
/// scenario; every other key overrides it. Throws kParse on malformed input
/// and kInvalidInput when the result violates scenario invariants.
Scenario parse_scenario(std::string_view text);

std::string scenario_to_json(const Scenario& sc);

/// Preset name or path to a scenario document.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace rssfp
