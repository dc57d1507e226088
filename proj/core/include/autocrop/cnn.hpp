#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autocrop/geometry.hpp"
#include "autocrop/imaging.hpp"

namespace autocrop {

inline constexpr int kConvKernels = 32;
inline constexpr int kKernelSize = 5;
inline constexpr int kConvPadding = kKernelSize / 2;
inline constexpr int kConvLayers = 5;
inline constexpr int kPooledLayers = 4;
inline constexpr std::array<int, 3> kSppLevels = {2, 3, 4};
/// (2*2 + 3*3 + 4*4) cells x 32 channels.
inline constexpr int kFeatureDim = 928;
/// Smallest input side whose maps are still 4x4 after four 2x2 pools.
inline constexpr int kMinViableSide = 4 << kPooledLayers;

/// Channel-major activation stack: values[(c * height + y) * width + x].
struct FeatureMaps {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  FeatureMaps() = default;
  FeatureMaps(int c, int h, int w);

  float at(int c, int y, int x) const noexcept {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float& at(int c, int y, int x) noexcept {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  static FeatureMaps from_image(const Image& img);
};

/// 32 filters of 5x5xin_channels. kernels[((k * in + c) * 5 + dy) * 5 + dx].
struct ConvLayer {
  int in_channels = 0;
  std::vector<float> kernels;
  std::vector<float> biases;

  float weight(int k, int c, int dy, int dx) const noexcept {
    return kernels[((static_cast<std::size_t>(k) * in_channels + c) * kKernelSize + dy) * kKernelSize + dx];
  }
  void validate() const;
};

/// Two-class softmax head on top of the pooled features.
/// weights[label * feature_dim + i]; label 0 is low quality, 1 is high.
struct ClassifierHead {
  std::vector<float> weights;
  std::array<float, 2> biases{0.0f, 0.0f};
};

struct ExtractorConfig {
  std::vector<ConvLayer> layers;
  std::vector<int> spp_levels{kSppLevels.begin(), kSppLevels.end()};
  int cap = 256;
  /// Set when the layers were generated by `random`; such configs serialize
  /// as the seed alone.
  std::optional<std::uint64_t> weight_seed;
  std::optional<ClassifierHead> classifier;

  /// Uniform weights in +-1/sqrt(fan_in), zero biases, fully determined by
  /// `seed`. Includes a classifier head drawn the same way.
  static ExtractorConfig random(std::uint64_t seed, int cap = 256);

  int feature_dim() const noexcept;
  /// Throws ConfigError when the structure deviates from five 32-kernel 5x5
  /// layers, the cap is below 32, or the head has the wrong shape.
  void validate() const;
};

using FeatureVector = std::vector<float>;

/// Stride-1 convolution with 2 pixels of zero padding (same-size output).
FeatureMaps conv2d_same(const FeatureMaps& input, const ConvLayer& layer);

FeatureMaps relu(FeatureMaps maps);

/// Non-overlapping 2x2 max pooling; an odd trailing row/column is dropped.
FeatureMaps maxpool2(const FeatureMaps& input);

/// Max over n x n cells for each level n. Cell (i, j) spans rows
/// [floor(i*H/n), floor((i+1)*H/n)) and the analogous columns. Output order
/// is level-major, then channel, then row-major cell.
FeatureVector spp(const FeatureMaps& input, std::span<const int> levels = kSppLevels);

/// Diagnostic side channel of extract_features.
struct ExtractionReport {
  PixelRect window;        ///< source pixels actually read
  int input_width = 0;     ///< network input size after cap/padding
  int input_height = 0;
  bool padded = false;     ///< window was widened or zero-padded to stay viable
};

/// Runs the five-layer stack on an already prepared network input.
FeatureMaps forward_maps(const Image& input, const ExtractorConfig& cfg);

/// Cropping-indexed features: crop -> cap -> [conv, relu, pool] x 4 ->
/// conv, relu -> spp. Windows too small to survive four pools are widened in
/// the source image (or zero-padded when the image itself is too small) and
/// flagged in `report`.
FeatureVector extract_features(const Image& img, const CropRegion& c, const ExtractorConfig& cfg,
                               ExtractionReport* report = nullptr);

enum class QualityClass { kLow = 0, kHigh = 1 };

struct Classification {
  QualityClass label = QualityClass::kLow;
  std::array<double, 2> probabilities{0.5, 0.5};
};

std::array<double, 2> softmax2(double z0, double z1) noexcept;

/// Throws ConfigError when cfg has no classifier head.
Classification classify(std::span<const float> features, const ExtractorConfig& cfg);

/// Weight file: JSON with layers[5].{kernels, biases}, spp_levels, cap,
/// optional classifier.{weights, biases} and weight_seed.
std::string weights_to_json(const ExtractorConfig& cfg);
ExtractorConfig weights_from_json(std::string_view text);
ExtractorConfig load_weights(const std::filesystem::path& path);
void save_weights(const ExtractorConfig& cfg, const std::filesystem::path& path);

}  // namespace autocrop
