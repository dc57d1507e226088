#include <fstream>
#include <iterator>

#include "autocrop/cnn.hpp"
#include "autocrop/error.hpp"
#include "json_codec.hpp"

namespace autocrop {

namespace detail {

using nlohmann::json;

namespace {

json layer_to_json(const ConvLayer& layer) {
  json kernels = json::array();
  for (int k = 0; k < kConvKernels; ++k) {
    json per_channel = json::array();
    for (int c = 0; c < layer.in_channels; ++c) {
      json rows = json::array();
      for (int dy = 0; dy < kKernelSize; ++dy) {
        json row = json::array();
        for (int dx = 0; dx < kKernelSize; ++dx) row.push_back(static_cast<double>(layer.weight(k, c, dy, dx)));
        rows.push_back(std::move(row));
      }
      per_channel.push_back(std::move(rows));
    }
    kernels.push_back(std::move(per_channel));
  }
  json biases = json::array();
  for (float b : layer.biases) biases.push_back(static_cast<double>(b));
  return {{"kernels", std::move(kernels)}, {"biases", std::move(biases)}};
}

float as_float(const json& v, const char* what) {
  if (!v.is_number()) throw ModelSchemaError(std::string(what) + " must be numeric");
  return static_cast<float>(v.get<double>());
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ModelSchemaError(std::string("missing field '") + name + "'");
  return j.at(name);
}

ConvLayer layer_from_json(const json& j) {
  const json& kernels = field(j, "kernels");
  const json& biases = field(j, "biases");
  if (!kernels.is_array() || kernels.size() != kConvKernels)
    throw ModelSchemaError("layers[].kernels must hold 32 filters");
  if (!biases.is_array() || biases.size() != kConvKernels) throw ModelSchemaError("layers[].biases must hold 32 values");
  ConvLayer layer;
  if (!kernels[0].is_array() || kernels[0].empty()) throw ModelSchemaError("filter has no input channels");
  layer.in_channels = static_cast<int>(kernels[0].size());
  layer.kernels.reserve(static_cast<std::size_t>(kConvKernels) * layer.in_channels * kKernelSize * kKernelSize);
  for (const json& filter : kernels) {
    if (!filter.is_array() || static_cast<int>(filter.size()) != layer.in_channels)
      throw ModelSchemaError("filters disagree on input channel count");
    for (const json& rows : filter) {
      if (!rows.is_array() || rows.size() != kKernelSize) throw ModelSchemaError("kernel must be 5x5");
      for (const json& row : rows) {
        if (!row.is_array() || row.size() != kKernelSize) throw ModelSchemaError("kernel must be 5x5");
        for (const json& v : row) layer.kernels.push_back(as_float(v, "kernel weight"));
      }
    }
  }
  for (const json& b : biases) layer.biases.push_back(as_float(b, "bias"));
  return layer;
}

}  // namespace

json extractor_to_json(const ExtractorConfig& cfg, bool explicit_layers) {
  json j;
  j["cap"] = cfg.cap;
  j["spp_levels"] = cfg.spp_levels;
  const bool by_seed = !explicit_layers && cfg.weight_seed.has_value();
  j["weight_seed"] = by_seed ? json(*cfg.weight_seed) : json(nullptr);
  if (by_seed) {
    j["layers"] = nullptr;
  } else {
    json layers = json::array();
    for (const ConvLayer& l : cfg.layers) layers.push_back(layer_to_json(l));
    j["layers"] = std::move(layers);
  }
  if (cfg.classifier) {
    const std::size_t dim = cfg.classifier->weights.size() / 2;
    json w = json::array();
    for (int k = 0; k < 2; ++k) {
      json row = json::array();
      for (std::size_t i = 0; i < dim; ++i) row.push_back(static_cast<double>(cfg.classifier->weights[k * dim + i]));
      w.push_back(std::move(row));
    }
    j["classifier"] = {{"weights", std::move(w)},
                       {"biases", {static_cast<double>(cfg.classifier->biases[0]),
                                   static_cast<double>(cfg.classifier->biases[1])}}};
  } else {
    j["classifier"] = nullptr;
  }
  return j;
}

ExtractorConfig extractor_from_json(const json& j) {
  if (!j.is_object()) throw ModelSchemaError("extractor config must be an object");
  const json& cap = field(j, "cap");
  if (!cap.is_number_integer()) throw ModelSchemaError("cap must be an integer");
  const json& layers = field(j, "layers");
  const json seed = j.value("weight_seed", json(nullptr));

  ExtractorConfig cfg;
  if (layers.is_null()) {
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
      throw ModelSchemaError("layers are null but weight_seed is missing");
    cfg = ExtractorConfig::random(seed.get<std::uint64_t>(), cap.get<int>());
  } else {
    if (!layers.is_array()) throw ModelSchemaError("layers must be an array");
    for (const json& l : layers) cfg.layers.push_back(layer_from_json(l));
    cfg.cap = cap.get<int>();
    cfg.weight_seed.reset();
    cfg.classifier.reset();
  }

  const json& levels = field(j, "spp_levels");
  if (!levels.is_array()) throw ModelSchemaError("spp_levels must be an array");
  cfg.spp_levels.clear();
  for (const json& n : levels) {
    if (!n.is_number_integer()) throw ModelSchemaError("spp level must be an integer");
    cfg.spp_levels.push_back(n.get<int>());
  }

  const json head = j.value("classifier", json(nullptr));
  if (head.is_null()) {
    cfg.classifier.reset();
  } else {
    ClassifierHead h;
    const json& w = field(head, "weights");
    const json& b = field(head, "biases");
    if (!w.is_array() || w.size() != 2 || !b.is_array() || b.size() != 2)
      throw ModelSchemaError("classifier needs a 2-row weight matrix and 2 biases");
    if (!w[0].is_array() || !w[1].is_array() || w[0].size() != w[1].size())
      throw ModelSchemaError("classifier weight rows must be arrays of equal length");
    for (const json& row : w)
      for (const json& v : row) h.weights.push_back(as_float(v, "classifier weight"));
    h.biases = {as_float(b[0], "classifier bias"), as_float(b[1], "classifier bias")};
    cfg.classifier = std::move(h);
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ModelSchemaError(std::string("invalid extractor config: ") + e.what());
  }
  return cfg;
}

}  // namespace detail

std::string weights_to_json(const ExtractorConfig& cfg) {
  return detail::extractor_to_json(cfg, true).dump();
}

ExtractorConfig weights_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("weight file is not valid JSON: ") + e.what(), e.byte);
  }
  return detail::extractor_from_json(j);
}

ExtractorConfig load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weight file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return weights_from_json(text);
}

void save_weights(const ExtractorConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write weight file " + path.string());
  out << weights_to_json(cfg) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace autocrop
