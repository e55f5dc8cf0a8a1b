#pragma once

#include <string>
#include <vector>

#include "magflow/config.hpp"

namespace magflow {

struct Preset {
  std::string name;
  std::string description;
  KeyValues values;
};

/// The registry of named scenarios, in a fixed order.
const std::vector<Preset>& preset_catalog();

/// Throws ConfigError for unknown names.
const Preset& find_preset(const std::string& name);

}  // namespace magflow
