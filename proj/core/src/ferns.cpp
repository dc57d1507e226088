#include "autocrop/ferns.hpp"

#include <algorithm>
#include <cmath>

#include "autocrop/error.hpp"
#include "autocrop/random.hpp"

namespace autocrop {

FeatureMatrix FeatureMatrix::from_rows(const std::vector<FeatureVector>& rows) {
  FeatureMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.set_row(i, rows[i]);
  return m;
}

void FeatureMatrix::set_row(std::size_t i, std::span<const float> values) {
  if (values.size() != cols_)
    throw ConfigError("feature row has " + std::to_string(values.size()) + " values, expected " + std::to_string(cols_));
  std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
}

void Fern::validate(int feature_dim) const {
  if (feature_indices.empty() || depth() > kMaxFernDepth) throw ConfigError("fern depth out of range");
  if (thresholds.size() != feature_indices.size()) throw ConfigError("fern needs one threshold per feature");
  if (bin_values.size() != (std::size_t{1} << depth())) throw ConfigError("fern needs 2^S bin values");
  for (int d : feature_indices)
    if (d < 0 || d >= feature_dim) throw ConfigError("fern feature index out of range");
  for (double t : thresholds)
    if (!std::isfinite(t)) throw ConfigError("non-finite fern threshold");
  for (double v : bin_values)
    if (!std::isfinite(v)) throw ConfigError("non-finite fern bin value");
}

namespace {

int index_of(std::span<const int> dims, std::span<const double> thresholds, std::span<const float> x) {
  int bin = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const auto d = static_cast<std::size_t>(dims[k]);
    if (d >= x.size()) throw ConfigError("fern feature index exceeds feature vector length");
    if (static_cast<double>(x[d]) >= thresholds[k]) bin |= 1 << k;
  }
  return bin;
}

}  // namespace

int bin_index(const FernShape& shape, std::span<const float> x) {
  return index_of(shape.feature_indices, shape.thresholds, x);
}

int bin_index(const Fern& fern, std::span<const float> x) {
  return index_of(fern.feature_indices, fern.thresholds, x);
}

double fern_predict(const Fern& fern, std::span<const float> x) {
  return fern.bin_values[static_cast<std::size_t>(bin_index(fern, x))];
}

Fern fit_bins(const FernShape& shape, std::span<const double> residuals, const FeatureMatrix& features,
              double beta) {
  if (residuals.empty()) throw ConfigError("fit_bins needs at least one sample");
  if (residuals.size() != features.rows()) throw ConfigError("residual count differs from feature rows");
  if (!(beta >= 0.0)) throw ConfigError("bin shrinkage must be non-negative");
  if (shape.depth() < 1 || shape.depth() > kMaxFernDepth) throw ConfigError("fern depth out of range");

  const std::size_t bins = std::size_t{1} << shape.depth();
  std::vector<double> sum(bins, 0.0);
  std::vector<double> count(bins, 0.0);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const auto b = static_cast<std::size_t>(bin_index(shape, features.row(i)));
    sum[b] += residuals[i];
    count[b] += 1.0;
  }
  Fern fern{shape.feature_indices, shape.thresholds, std::vector<double>(bins, 0.0)};
  for (std::size_t b = 0; b < bins; ++b)
    if (count[b] > 0.0) fern.bin_values[b] = sum[b] / (count[b] + beta);
  return fern;
}

std::vector<FeatureRange> feature_ranges(const FeatureMatrix& features) {
  std::vector<FeatureRange> ranges(features.cols());
  if (features.rows() == 0) return ranges;
  for (std::size_t d = 0; d < features.cols(); ++d) ranges[d] = {features.at(0, d), features.at(0, d)};
  for (std::size_t i = 1; i < features.rows(); ++i) {
    const auto r = features.row(i);
    for (std::size_t d = 0; d < r.size(); ++d) {
      ranges[d].min = std::min<double>(ranges[d].min, r[d]);
      ranges[d].max = std::max<double>(ranges[d].max, r[d]);
    }
  }
  return ranges;
}

std::vector<FernShape> sample_pool(const FernPool& pool, int depth, std::span<const FeatureRange> ranges) {
  if (pool.candidates < 1) throw ConfigError("fern pool needs at least one candidate");
  if (depth < 1 || depth > kMaxFernDepth) throw ConfigError("fern depth must lie in [1, 16]");
  if (depth > pool.feature_dim)
    throw ConfigError("fern depth " + std::to_string(depth) + " exceeds feature dimension " +
                      std::to_string(pool.feature_dim));
  if (ranges.size() != static_cast<std::size_t>(pool.feature_dim))
    throw ConfigError("need one feature range per dimension");
  for (const FeatureRange& r : ranges)
    if (!(r.min <= r.max)) throw ConfigError("feature range has min > max");

  Rng rng(pool.seed);
  std::vector<FernShape> shapes(static_cast<std::size_t>(pool.candidates));
  for (FernShape& s : shapes) {
    s.feature_indices.reserve(static_cast<std::size_t>(depth));
    while (s.depth() < depth) {
      const int d = static_cast<int>(rng.below(static_cast<std::size_t>(pool.feature_dim)));
      if (std::find(s.feature_indices.begin(), s.feature_indices.end(), d) == s.feature_indices.end())
        s.feature_indices.push_back(d);
    }
    for (int d : s.feature_indices) {
      const FeatureRange& r = ranges[static_cast<std::size_t>(d)];
      s.thresholds.push_back(r.min == r.max ? r.min : rng.uniform(r.min, r.max));
    }
  }
  return shapes;
}

}  // namespace autocrop
