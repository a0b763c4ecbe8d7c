#pragma once

#include <json.hpp>

#include "albias/alcore.hpp"
#include "albias/calibration.hpp"

// JSON encodings shared by run logs and reports.
namespace albias {

using Json = nlohmann::ordered_json;

Json calibration_to_json(const diag::CalibrationReport& r);
diag::CalibrationReport calibration_from_json(const nlohmann::json& j);

Json loop_config_to_json(const al::LoopConfig& c);
al::LoopConfig loop_config_from_json(const nlohmann::json& j);

}  // namespace albias
