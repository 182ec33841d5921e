#pragma once

#include <json.hpp>

#include "vtms/controller.hpp"

namespace vtms {

nlohmann::json settings_to_json(const Settings& settings);

/// Missing keys keep their defaults; wrong types throw ConfigError.
Settings settings_from_json(const nlohmann::json& j);

}  // namespace vtms
