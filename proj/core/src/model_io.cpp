#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <regex>

#include "autocrop/cascade.hpp"
#include "autocrop/error.hpp"
#include "autocrop/random.hpp"
#include "json_codec.hpp"

namespace autocrop {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fern_to_json(const Fern& f) {
  return {{"features", f.feature_indices}, {"thresholds", f.thresholds}, {"bins", f.bin_values}};
}

json params_to_json(const CascadeParams& p) {
  return {{"stages", p.stages},
          {"ferns", p.boost.iterations},
          {"depth", p.boost.depth},
          {"candidates", p.boost.candidates},
          {"beta", p.boost.beta},
          {"shrinkage", p.shrinkage},
          {"seed", p.seed},
          {"validation_fraction", p.validation_fraction},
          {"patience", p.patience},
          {"initial_crop", to_string(p.initial_crop)}};
}

json payload_to_json(const CascadeModel& m) {
  json stages = json::array();
  for (const CascadeStage& s : m.stages) {
    json coords = json::array();
    for (const PrimitiveRegressor& r : s.regressors) {
      json ferns = json::array();
      for (const Fern& f : r.ferns) ferns.push_back(fern_to_json(f));
      coords.push_back({{"budget", r.budget}, {"ferns", std::move(ferns)}});
    }
    stages.push_back(std::move(coords));
  }
  json stats = json::array();
  for (const StageStats& s : m.stats) {
    json gamma = json::array();
    for (double g : s.relative_error) gamma.push_back(nullable(g));
    stats.push_back({{"stage", s.stage},
                     {"train_iou", nullable(s.train_iou)},
                     {"validation_iou", nullable(s.validation_iou)},
                     {"relative_error", std::move(gamma)},
                     {"ferns", s.ferns}});
  }
  return {{"hyperparameters", params_to_json(m.params)},
          {"shrinkage", m.shrinkage},
          {"initial_crop", to_string(m.initial_crop)},
          {"extractor", detail::extractor_to_json(m.extractor, false)},
          {"stages", std::move(stages)},
          {"stats", std::move(stats)}};
}

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ModelSchemaError(std::string("model is missing '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return need(j, key).get<T>();
  } catch (const json::exception& e) {
    throw ModelSchemaError(std::string("model field '") + key + "' has the wrong type");
  }
}

double get_nullable(const json& j, const char* key) {
  const json& v = need(j, key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ModelSchemaError(std::string("model field '") + key + "' must be numeric");
  return v.get<double>();
}

CascadeParams params_from_json(const json& j) {
  CascadeParams p;
  p.stages = get<int>(j, "stages");
  p.boost.iterations = get<int>(j, "ferns");
  p.boost.depth = get<int>(j, "depth");
  p.boost.candidates = get<int>(j, "candidates");
  p.boost.beta = get<double>(j, "beta");
  p.shrinkage = get<double>(j, "shrinkage");
  p.seed = get<std::uint64_t>(j, "seed");
  p.validation_fraction = get<double>(j, "validation_fraction");
  p.patience = get<int>(j, "patience");
  try {
    p.initial_crop = parse_initial_crop(get<std::string>(j, "initial_crop"));
  } catch (const ConfigError& e) {
    throw ModelSchemaError(e.what());
  }
  return p;
}

CascadeModel payload_from_json(const json& j) {
  CascadeModel m;
  m.params = params_from_json(need(j, "hyperparameters"));
  m.shrinkage = get<double>(j, "shrinkage");
  try {
    m.initial_crop = parse_initial_crop(get<std::string>(j, "initial_crop"));
  } catch (const ConfigError& e) {
    throw ModelSchemaError(e.what());
  }
  m.extractor = detail::extractor_from_json(need(j, "extractor"));

  const json& stages = need(j, "stages");
  if (!stages.is_array()) throw ModelSchemaError("stages must be an array");
  for (const json& s : stages) {
    if (!s.is_array() || s.size() != 4) throw ModelSchemaError("every stage needs exactly 4 regressors");
    CascadeStage stage;
    for (int c = 0; c < 4; ++c) {
      const json& r = s[static_cast<std::size_t>(c)];
      stage.regressors[c].budget = get<int>(r, "budget");
      const json& ferns = need(r, "ferns");
      if (!ferns.is_array()) throw ModelSchemaError("regressor ferns must be an array");
      for (const json& f : ferns) {
        Fern fern{get<std::vector<int>>(f, "features"), get<std::vector<double>>(f, "thresholds"),
                  get<std::vector<double>>(f, "bins")};
        stage.regressors[c].ferns.push_back(std::move(fern));
      }
    }
    m.stages.push_back(std::move(stage));
  }

  const json& stats = need(j, "stats");
  if (!stats.is_array()) throw ModelSchemaError("stats must be an array");
  for (const json& s : stats) {
    StageStats st;
    st.stage = get<int>(s, "stage");
    st.train_iou = get_nullable(s, "train_iou");
    st.validation_iou = get_nullable(s, "validation_iou");
    const json& g = need(s, "relative_error");
    if (!g.is_array() || g.size() != 4) throw ModelSchemaError("relative_error needs 4 entries");
    for (int c = 0; c < 4; ++c)
      st.relative_error[c] = g[static_cast<std::size_t>(c)].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                                       : g[static_cast<std::size_t>(c)].get<double>();
    const auto ferns = get<std::vector<int>>(s, "ferns");
    if (ferns.size() != 4) throw ModelSchemaError("ferns needs 4 entries");
    std::copy(ferns.begin(), ferns.end(), st.ferns.begin());
    m.stats.push_back(st);
  }

  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ModelSchemaError(std::string("invalid model: ") + e.what());
  }
  return m;
}

// Best-effort header recovery from a document that failed to parse.
[[noreturn]] void diagnose_unparseable(std::string_view text, const std::string& parse_message) {
  const std::string prefix(text.substr(0, std::min<std::size_t>(text.size(), 256)));
  std::smatch match;
  static const std::regex version_re(R"re("format_version"\s*:\s*(\d+))re");
  static const std::regex checksum_re(R"re("checksum"\s*:\s*"([0-9a-f]{16})")re");
  if (std::regex_search(prefix, match, version_re) && std::stoi(match[1].str()) != kModelFormatVersion)
    throw ModelVersionError("unsupported model format version " + match[1].str());
  if (std::regex_search(prefix, match, checksum_re))
    throw ChecksumError("model payload does not match checksum " + match[1].str() +
                        " (file truncated or corrupt: " + parse_message + ")");
  throw ModelSchemaError("not a model file: " + parse_message);
}

}  // namespace

std::string serialize_model(const CascadeModel& model) {
  const json payload = payload_to_json(model);
  const std::string bytes = payload.dump();
  json doc;
  doc["header"] = {{"format_version", kModelFormatVersion}, {"checksum", hex64(fnv1a64(bytes))}};
  doc["payload"] = payload;
  return doc.dump() + "\n";
}

CascadeModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    diagnose_unparseable(text, e.what());
  }
  const json& header = need(doc, "header");
  const json& version = need(header, "format_version");
  if (!version.is_number_integer()) throw ModelSchemaError("format_version must be an integer");
  if (version.get<int>() != kModelFormatVersion)
    throw ModelVersionError("unsupported model format version " + std::to_string(version.get<int>()) +
                            " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  const std::string checksum = get<std::string>(header, "checksum");
  const json& payload = need(doc, "payload");
  const std::string actual = hex64(fnv1a64(payload.dump()));
  if (actual != checksum) throw ChecksumError("model checksum mismatch: header " + checksum + ", payload " + actual);
  return payload_from_json(payload);
}

void save_model(const CascadeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model " + path.string());
  out << serialize_model(model);
  if (!out) throw IoError("short write to " + path.string());
}

CascadeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_model(text);
}

}  // namespace autocrop
