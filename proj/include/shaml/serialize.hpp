#pragma once

#include <string>

#include <json.hpp>

#include "shaml/gbm.hpp"
#include "shaml/logistic.hpp"
#include "shaml/mlp.hpp"

namespace shaml {

// Versioned JSON model format. Doubles are serialized losslessly, so a
// round-tripped model reproduces predictions bit for bit.
inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const LogisticModel& m);
LogisticModel logistic_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MlpModel& m);
MlpModel mlp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GbmModel& m);
GbmModel gbm_from_json(const nlohmann::json& j);

void save_model_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_model_json(const std::string& path);

}  // namespace shaml
