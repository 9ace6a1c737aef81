#pragma once

#include <json.hpp>

#include "zsplit/core.hpp"
#include "zsplit/metrics.hpp"
#include "zsplit/stats.hpp"

// Report serialization. Everything goes through ordered_json with explicit
// field order, so identical inputs always produce identical bytes.

namespace zsplit {

using ojson = nlohmann::ordered_json;

ojson to_json(const SplitConfig& config);
SplitConfig split_config_from_json(const nlohmann::json& j);

ojson to_json(const SplitReport& report);
ojson to_json(const ValidationResult& result);
ojson to_json(const OverlapReport& report);
ojson to_json(const AttributeStats& stats);
ojson to_json(const IdentityDistribution& distribution);
ojson to_json(const MetricsReport& report);
ojson metric_conventions_json();

}  // namespace zsplit
