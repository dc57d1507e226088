#pragma once

// JSON codecs shared by the weight-file and model-file readers. Internal.

#include <json.hpp>

#include "autocrop/cnn.hpp"

namespace autocrop::detail {

/// With explicit_layers == false and a weight_seed present, the layers are
/// omitted (null) and regenerated from the seed on load.
nlohmann::json extractor_to_json(const ExtractorConfig& cfg, bool explicit_layers);

/// Throws ModelSchemaError on missing or mistyped fields.
ExtractorConfig extractor_from_json(const nlohmann::json& j);

}  // namespace autocrop::detail
