#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autocrop/cascade.hpp"
#include "autocrop/geometry.hpp"
#include "autocrop/imaging.hpp"

namespace autocrop {

/// One annotated crop: `image_path,x1,y1,x2,y2,annotator` in CSV form.
/// Pixel coordinates; the path is relative to the CSV file's directory.
struct AnnotationRecord {
  std::string image_path;
  PixelRect crop;
  int annotator = 1;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Parses annotation CSV. An optional header line starting with
/// "image_path" and blank lines are skipped. Inverted rectangles are swapped
/// and reported through `warnings`. Malformed lines throw ParseError carrying
/// the 1-based line number.
std::vector<AnnotationRecord> parse_annotations(std::string_view text, std::vector<std::string>* warnings = nullptr);
std::string format_annotations(const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path,
                                               std::vector<std::string>* warnings = nullptr);
void save_annotations(const std::vector<AnnotationRecord>& records, const std::filesystem::path& path);

enum class QualityLabel { kLow, kHigh, kDiscard };

/// Mean score below 5 - delta is low quality, at least 5 + delta is high
/// quality, anything in between is discarded.
QualityLabel ava_label(double mean_score, double delta);

/// Parameters of the synthetic cropping benchmark.
struct SynthSpec {
  int image_count = 500;
  int min_size = 96;             ///< image side range in pixels
  int max_size = 128;
  double subject_min = 0.25;     ///< subject side as a fraction of the image side
  double subject_max = 0.5;
  double noise = 0.1;            ///< uniform noise amplitude
  double margin = 0.25;          ///< crop margin per side, fraction of the subject side
  std::uint64_t seed = 2017;
  double test_fraction = 0.3;    ///< share of records written to test.csv

  void validate() const;
};

SynthSpec synth_spec_from_json(std::string_view text);
std::string synth_spec_to_json(const SynthSpec& spec);
SynthSpec load_synth_spec(const std::filesystem::path& path);

struct SynthImage {
  Image image;
  PixelRect subject;
  PixelRect truth;
};

/// Image `index` of the benchmark: dark noisy background with one bright
/// checker-textured subject; truth is the subject grown by the margin rule
/// and clamped. Pixel values are quantized to 8 bits. Deterministic in
/// (spec, index).
SynthImage synth_image(const SynthSpec& spec, int index);

/// Writes img_NNNN.ppm files plus annotations.csv, train.csv and test.csv to
/// out_dir and returns all records.
std::vector<AnnotationRecord> synth_generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Seeded shuffle into (train, test) with round(fraction * N) training
/// records. Throws ConfigError for fewer than 2 records or fraction outside
/// (0, 1).
std::pair<std::vector<AnnotationRecord>, std::vector<AnnotationRecord>> split(
    const std::vector<AnnotationRecord>& records, double fraction, std::uint64_t seed);

/// An annotated image in memory, crop normalized.
struct LabeledImage {
  std::shared_ptr<const Image> image;
  CropRegion truth;
};

/// Loads every referenced image (once per distinct path) relative to
/// base_dir and checks the crops against the image bounds.
std::vector<LabeledImage> load_dataset(const std::vector<AnnotationRecord>& records,
                                       const std::filesystem::path& base_dir);

std::vector<TrainSample> to_train_samples(const std::vector<LabeledImage>& images);

}  // namespace autocrop
