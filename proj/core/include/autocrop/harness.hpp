#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autocrop/cascade.hpp"
#include "autocrop/data.hpp"

namespace autocrop {

/// Mean test metrics after `stage` cascade stages (stage 0 is the initial crop).
struct CurvePoint {
  int stage = 0;
  double mean_iou = 0.0;
  double mean_bde = 0.0;
  double seconds = 0.0;  ///< mean cumulative prediction time per image
};

/// Evaluates every stage of every test trajectory against the ground truth.
/// When `report_stages` exceeds the model's stage count the curve is padded
/// with the final state, which is what prediction returns for those stages.
/// Throws ConfigError on an empty test set.
std::vector<CurvePoint> run_curve(const CascadeModel& model, std::span<const LabeledImage> test,
                                  int report_stages = -1, BdeMode mode = BdeMode::kSquared);

enum class SweepKind { kFerns, kPrimitive, kInitialCrop };

/// "ferns", "primitive", "init".
std::string to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view text);

struct SweepCell {
  std::string name;
  CascadeParams params;
};

/// Fern counts {1, 5, 10, 20}; CCR (base M) against CCR- (M = 1); initial
/// crops {full, 0.5, 0.25}. Every cell shares the base seed.
std::vector<SweepCell> make_grid(SweepKind kind, const CascadeParams& base);

struct CellResult {
  SweepCell cell;
  CascadeModel model;
  std::vector<CurvePoint> curve;
};

struct SweepResult {
  std::string sweep;
  std::vector<CellResult> cells;
};

/// Trains and evaluates each cell in grid order on the same split.
SweepResult run_sweep(std::string_view sweep, const std::vector<SweepCell>& grid, std::span<const LabeledImage> train,
                      std::span<const LabeledImage> test, const ExtractorConfig& extractor,
                      const std::function<void(const std::string&)>& log = {});

/// CSV with header `sweep,cell,stage,mean_iou,mean_bde,seconds`. Without
/// timing the seconds column is written as 0 so output is reproducible.
std::string curve_csv(const SweepResult& result, bool include_timing = true);

/// 16 hex digits identifying a sweep configuration; names run directories.
std::string config_hash(std::string_view sweep, const std::vector<SweepCell>& grid, const ExtractorConfig& extractor,
                        std::size_t train_count, std::size_t test_count);

/// Copy of `img` with a rectangle outline drawn in `color`.
Image draw_overlay(const Image& img, const PixelRect& rect, std::array<float, 3> color = {1.0f, 0.1f, 0.1f},
                   int thickness = 2);

/// Stages at which crop sequences are dumped by default.
inline constexpr std::array<int, 6> kSequenceStages = {1, 5, 10, 15, 20, 30};

/// Writes stage_NN.ppm overlays of the trajectory at the requested stages
/// (stages past the end show the final state). Returns the written paths.
std::vector<std::filesystem::path> write_crop_sequence(const Prediction& prediction, const Image& img,
                                                       std::span<const int> stages, const std::filesystem::path& dir);

}  // namespace autocrop
