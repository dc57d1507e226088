#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "autocrop/cnn.hpp"

namespace autocrop {

/// Row-major N x F matrix of feature vectors.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

  static FeatureMatrix from_rows(const std::vector<FeatureVector>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  float at(std::size_t i, std::size_t d) const noexcept { return data_[i * cols_ + d]; }
  std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  /// Copies `values` into row i; throws ConfigError on a length mismatch.
  void set_row(std::size_t i, std::span<const float> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// The comparisons of a fern without its bin outputs.
struct FernShape {
  std::vector<int> feature_indices;
  std::vector<double> thresholds;

  int depth() const noexcept { return static_cast<int>(feature_indices.size()); }
  friend bool operator==(const FernShape&, const FernShape&) = default;
};

/// Depth-S random fern regressor: S (feature, threshold) tests select one of
/// 2^S bins, each holding a real output.
struct Fern {
  std::vector<int> feature_indices;
  std::vector<double> thresholds;
  std::vector<double> bin_values;

  int depth() const noexcept { return static_cast<int>(feature_indices.size()); }
  FernShape shape() const { return {feature_indices, thresholds}; }
  /// Throws ConfigError when sizes disagree, an index is outside
  /// [0, feature_dim) or a value is non-finite.
  void validate(int feature_dim) const;
  friend bool operator==(const Fern&, const Fern&) = default;
};

inline constexpr int kMaxFernDepth = 16;

/// Candidate generator settings.
struct FernPool {
  int candidates = 64;
  std::uint64_t seed = 0;
  int feature_dim = kFeatureDim;
};

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
};

/// Bit k is set iff x[feature_indices[k]] >= thresholds[k]; the index is
/// sum(bit_k << k).
int bin_index(const FernShape& shape, std::span<const float> x);
int bin_index(const Fern& fern, std::span<const float> x);

double fern_predict(const Fern& fern, std::span<const float> x);

/// Shrunk per-bin residual mean: sum(e in bin) / (count + beta); empty bins
/// output 0.
Fern fit_bins(const FernShape& shape, std::span<const double> residuals, const FeatureMatrix& features,
              double beta);

/// Per-column observed [min, max] over all rows.
std::vector<FeatureRange> feature_ranges(const FeatureMatrix& features);

/// Draws pool.candidates shapes. Each candidate picks `depth` distinct
/// feature dimensions uniformly, then one threshold per dimension uniformly
/// in that dimension's range. Fully determined by pool.seed.
std::vector<FernShape> sample_pool(const FernPool& pool, int depth, std::span<const FeatureRange> ranges);

}  // namespace autocrop
