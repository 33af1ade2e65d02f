#pragma once

#include "json.hpp"
#include "whatsnet/model.hpp"

namespace whatsnet::detail {

nlohmann::json config_to_json(const WhatsNetConfig& config);
WhatsNetConfig config_from_json(const nlohmann::json& j);

}  // namespace whatsnet::detail
