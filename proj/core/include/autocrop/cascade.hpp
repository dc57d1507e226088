#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autocrop/boosting.hpp"
#include "autocrop/cnn.hpp"
#include "autocrop/geometry.hpp"
#include "autocrop/imaging.hpp"

namespace autocrop {

/// Where the cascade starts: a centered rectangle covering the given
/// fraction of each image side.
enum class InitialCrop { kFullFrame, kHalf, kQuarter };

double initial_crop_scale(InitialCrop policy) noexcept;
/// "full", "0.5", "0.25".
std::string to_string(InitialCrop policy);
/// Accepts the names above plus "1.0"/"1" for the full frame.
InitialCrop parse_initial_crop(std::string_view text);
CropRegion initial_region(InitialCrop policy, ImageDims dims);

struct CascadeParams {
  int stages = 30;                ///< T
  BoostParams boost{};            ///< M, S, Q, beta; boost.seed is derived per regressor
  double shrinkage = 0.8;         ///< lambda, in (0, 1]
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  int patience = 3;
  InitialCrop initial_crop = InitialCrop::kFullFrame;

  void validate() const;
};

/// One stage: a primitive regressor per coordinate (x1, y1, x2, y2).
struct CascadeStage {
  std::array<PrimitiveRegressor, 4> regressors;
  friend bool operator==(const CascadeStage&, const CascadeStage&) = default;
};

struct StageStats {
  int stage = 0;
  double train_iou = 0.0;
  double validation_iou = 0.0;                 ///< NaN without a validation split
  std::array<double, 4> relative_error{};      ///< gamma per coordinate; 0 at stage 0
  std::array<int, 4> ferns{};                  ///< accepted ferns per coordinate
};

struct CascadeModel {
  std::vector<CascadeStage> stages;
  double shrinkage = 0.8;
  ExtractorConfig extractor;
  InitialCrop initial_crop = InitialCrop::kFullFrame;
  CascadeParams params;
  /// One entry per evaluated stage, including stages trained after the best
  /// validation stage and then discarded.
  std::vector<StageStats> stats;

  int stage_count() const noexcept { return static_cast<int>(stages.size()); }
  void validate() const;
};

struct TrainSample {
  std::shared_ptr<const Image> image;
  CropRegion target;  ///< normalized ground truth
};

/// Called after every trained stage (and once for stage 0).
using StageCallback = std::function<void(const StageStats&)>;

/// Cascaded cropping regression. Each stage extracts features once per sample
/// from the current (clamped) crop, fits one boosted regressor per coordinate
/// on the residuals Y - C, and moves every coordinate by lambda times its
/// prediction. A seeded validation split stops training after `patience`
/// stages without improvement; the model keeps the best prefix.
CascadeModel ccr_train(std::span<const TrainSample> samples, const CascadeParams& params,
                       const ExtractorConfig& extractor, const StageCallback& on_stage = {});

/// One stage update: state_j + lambda * r_j(features) for every j.
CropRegion apply_stage(const CascadeStage& stage, std::span<const float> features, const CropRegion& state,
                       double shrinkage);

struct Prediction {
  CropRegion region;                    ///< final state, clamped and canonical
  std::vector<CropRegion> trajectory;   ///< raw states C^0 .. C^T
  std::vector<double> stage_seconds;    ///< wall time per stage
};

Prediction ccr_predict(const CascadeModel& model, const Image& img);

inline constexpr int kModelFormatVersion = 1;

/// Single JSON document {"header": {checksum, format_version}, "payload": ...}
/// where checksum is the FNV-1a 64 hash of the compact payload dump.
std::string serialize_model(const CascadeModel& model);
/// Throws ModelVersionError, ChecksumError or ModelSchemaError.
CascadeModel parse_model(std::string_view text);
void save_model(const CascadeModel& model, const std::filesystem::path& path);
CascadeModel load_model(const std::filesystem::path& path);

}  // namespace autocrop
