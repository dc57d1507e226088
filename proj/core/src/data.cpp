#include "autocrop/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "autocrop/error.hpp"
#include "autocrop/parallel.hpp"
#include "autocrop/random.hpp"

namespace autocrop {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view field, std::size_t line, const char* what) {
  field = trim(field);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(std::string("annotation line ") + std::to_string(line) + ": bad " + what + " '" +
                         std::string(field) + "'",
                     line);
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << bytes;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::string_view text, std::vector<std::string>* warnings) {
  std::vector<AnnotationRecord> records;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.starts_with("image_path")) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    if (fields.size() != 6)
      throw ParseError("annotation line " + std::to_string(line_no) + ": expected 6 fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    AnnotationRecord r;
    r.image_path = std::string(trim(fields[0]));
    if (r.image_path.empty()) throw ParseError("annotation line " + std::to_string(line_no) + ": empty image path", line_no);
    r.crop = {parse_int(fields[1], line_no, "x1"), parse_int(fields[2], line_no, "y1"),
              parse_int(fields[3], line_no, "x2"), parse_int(fields[4], line_no, "y2")};
    r.annotator = parse_int(fields[5], line_no, "annotator");
    if (r.crop.x1 > r.crop.x2 || r.crop.y1 > r.crop.y2) {
      if (r.crop.x1 > r.crop.x2) std::swap(r.crop.x1, r.crop.x2);
      if (r.crop.y1 > r.crop.y2) std::swap(r.crop.y1, r.crop.y2);
      if (warnings)
        warnings->push_back("annotation line " + std::to_string(line_no) + ": inverted rectangle repaired");
    }
    if (r.crop.width() == 0 || r.crop.height() == 0)
      throw ParseError("annotation line " + std::to_string(line_no) + ": zero-area rectangle", line_no);
    records.push_back(std::move(r));
  }
  return records;
}

std::string format_annotations(const std::vector<AnnotationRecord>& records) {
  std::string out = "image_path,x1,y1,x2,y2,annotator\n";
  for (const AnnotationRecord& r : records)
    out += r.image_path + "," + std::to_string(r.crop.x1) + "," + std::to_string(r.crop.y1) + "," +
           std::to_string(r.crop.x2) + "," + std::to_string(r.crop.y2) + "," + std::to_string(r.annotator) + "\n";
  return out;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  try {
    return parse_annotations(read_file(path), warnings);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void save_annotations(const std::vector<AnnotationRecord>& records, const std::filesystem::path& path) {
  write_file(path, format_annotations(records));
}

QualityLabel ava_label(double mean_score, double delta) {
  if (!(delta >= 0.0)) throw ConfigError("delta must be non-negative");
  if (mean_score < 5.0 - delta) return QualityLabel::kLow;
  if (mean_score >= 5.0 + delta) return QualityLabel::kHigh;
  return QualityLabel::kDiscard;
}

void SynthSpec::validate() const {
  if (image_count < 1) throw ConfigError("synthetic spec needs at least one image");
  if (min_size < 16 || max_size < min_size) throw ConfigError("image size range must satisfy 16 <= min <= max");
  if (!(subject_min > 0.0 && subject_min <= subject_max && subject_max <= 1.0))
    throw ConfigError("subject size range must satisfy 0 < min <= max <= 1");
  if (!(noise >= 0.0)) throw ConfigError("noise amplitude must be non-negative");
  if (!(margin >= 0.0)) throw ConfigError("margin must be non-negative");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
}

SynthSpec synth_spec_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("synthetic spec is not valid JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  SynthSpec s;
  try {
    s.image_count = j.value("image_count", s.image_count);
    s.min_size = j.value("min_size", s.min_size);
    s.max_size = j.value("max_size", s.max_size);
    s.subject_min = j.value("subject_min", s.subject_min);
    s.subject_max = j.value("subject_max", s.subject_max);
    s.noise = j.value("noise", s.noise);
    s.margin = j.value("margin", s.margin);
    s.seed = j.value("seed", s.seed);
    s.test_fraction = j.value("test_fraction", s.test_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec field has the wrong type: ") + e.what());
  }
  s.validate();
  return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
  const nlohmann::json j = {{"image_count", s.image_count}, {"min_size", s.min_size},   {"max_size", s.max_size},
                            {"subject_min", s.subject_min}, {"subject_max", s.subject_max}, {"noise", s.noise},
                            {"margin", s.margin},           {"seed", s.seed},           {"test_fraction", s.test_fraction}};
  return j.dump(2) + "\n";
}

SynthSpec load_synth_spec(const std::filesystem::path& path) { return synth_spec_from_json(read_file(path)); }

namespace {

float quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<float>(static_cast<unsigned char>(std::lround(c * 255.0))) / 255.0f;
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

SynthImage synth_image(const SynthSpec& spec, int index) {
  spec.validate();
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(attempt)));
    const int w = rng.between(spec.min_size, spec.max_size);
    const int h = rng.between(spec.min_size, spec.max_size);
    const int sw = std::clamp(round_half_up(rng.uniform(spec.subject_min, spec.subject_max) * w), 1, w);
    const int sh = std::clamp(round_half_up(rng.uniform(spec.subject_min, spec.subject_max) * h), 1, h);
    const int sx = rng.between(0, w - sw);
    const int sy = rng.between(0, h - sh);

    std::array<double, 3> background{};
    std::array<double, 3> subject{};
    for (double& c : background) c = rng.uniform(0.05, 0.25);
    for (double& c : subject) c = rng.uniform(0.6, 0.95);
    const int cell = rng.between(3, 6);

    SynthImage out{Image(w, h), {sx, sy, sx + sw, sy + sh}, {}};
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool inside = x >= sx && x < sx + sw && y >= sy && y < sy + sh;
        const double texture = inside ? ((((x - sx) / cell + (y - sy) / cell) % 2) ? 0.12 : -0.12) : 0.0;
        for (int c = 0; c < kImageChannels; ++c) {
          const double base = inside ? subject[c] + texture : background[c];
          out.image.at(x, y, c) = quantize(base + spec.noise * (2.0 * rng.uniform() - 1.0));
        }
      }

    auto grow = [&](int side) {
      const int g = round_half_up(spec.margin * side);
      return spec.margin > 0.0 ? std::max(g, 1) : g;
    };
    const int gx = grow(sw);
    const int gy = grow(sh);
    out.truth = {std::max(0, sx - gx), std::max(0, sy - gy), std::min(w, sx + sw + gx), std::min(h, sy + sh + gy)};
    if (out.truth == PixelRect{0, 0, w, h}) continue;
    return out;
  }
  throw ConfigError("synthetic image " + std::to_string(index) + ": crop covers the whole frame after " +
                    std::to_string(kMaxAttempts) + " attempts; lower subject_max or margin");
}

std::vector<AnnotationRecord> synth_generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  std::vector<AnnotationRecord> records(static_cast<std::size_t>(spec.image_count));
  parallel_for(records.size(), [&](std::size_t i) {
    const SynthImage s = synth_image(spec, static_cast<int>(i));
    char name[32];
    std::snprintf(name, sizeof name, "img_%04zu.ppm", i);
    save_ppm(s.image, out_dir / name);
    records[i] = {name, s.truth, 1};
  });
  save_annotations(records, out_dir / "annotations.csv");
  if (records.size() >= 2) {
    const auto [train, test] = split(records, 1.0 - spec.test_fraction, mix_seed(spec.seed, 0x7e57ULL));
    save_annotations(train, out_dir / "train.csv");
    save_annotations(test, out_dir / "test.csv");
  }
  return records;
}

std::pair<std::vector<AnnotationRecord>, std::vector<AnnotationRecord>> split(
    const std::vector<AnnotationRecord>& records, double fraction, std::uint64_t seed) {
  if (records.size() < 2) throw ConfigError("split needs at least two records");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::size_t n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(records.size()) + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, records.size() - 1);
  std::pair<std::vector<AnnotationRecord>, std::vector<AnnotationRecord>> parts;
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_train ? parts.first : parts.second).push_back(records[order[k]]);
  return parts;
}

std::vector<LabeledImage> load_dataset(const std::vector<AnnotationRecord>& records,
                                       const std::filesystem::path& base_dir) {
  std::map<std::string, std::shared_ptr<const Image>> cache;
  std::vector<LabeledImage> out;
  out.reserve(records.size());
  for (const AnnotationRecord& r : records) {
    auto& slot = cache[r.image_path];
    if (!slot) {
      const std::filesystem::path p = std::filesystem::path(r.image_path).is_absolute() ? std::filesystem::path(r.image_path)
                                                                                        : base_dir / r.image_path;
      slot = std::make_shared<const Image>(load_ppm(p));
    }
    const ImageDims d = slot->dims();
    if (r.crop.x1 < 0 || r.crop.y1 < 0 || r.crop.x2 > d.width || r.crop.y2 > d.height)
      throw ConfigError("annotation for " + r.image_path + " lies outside the " + std::to_string(d.width) + "x" +
                        std::to_string(d.height) + " image");
    out.push_back({slot, normalize(r.crop, d)});
  }
  return out;
}

std::vector<TrainSample> to_train_samples(const std::vector<LabeledImage>& images) {
  std::vector<TrainSample> out;
  out.reserve(images.size());
  for (const LabeledImage& l : images) out.push_back({l.image, l.truth});
  return out;
}

}  // namespace autocrop
