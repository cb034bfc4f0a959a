#pragma once

#include <nlohmann/json.hpp>

#include "coldfaas/types.hpp"

namespace coldfaas {

void to_json(nlohmann::json& j, const FunctionSpec& spec);
void from_json(const nlohmann::json& j, FunctionSpec& spec);

void to_json(nlohmann::json& j, const InvocationRecord& record);
void from_json(const nlohmann::json& j, InvocationRecord& record);

void to_json(nlohmann::json& j, const RuntimeProfile& profile);
void from_json(const nlohmann::json& j, RuntimeProfile& profile);

}  // namespace coldfaas
