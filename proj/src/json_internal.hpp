#pragma once

// nlohmann::json conversions shared by the library sources.

#include "json.hpp"
#include "shb/config.hpp"

namespace shb::detail {

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const FitResult& fit);

}  // namespace shb::detail
