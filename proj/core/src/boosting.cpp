#include "autocrop/boosting.hpp"

#include <cmath>
#include <limits>

#include "autocrop/error.hpp"
#include "autocrop/parallel.hpp"
#include "autocrop/random.hpp"

namespace autocrop {

void BoostParams::validate() const {
  if (iterations < 1) throw ConfigError("boosting needs at least one iteration (M >= 1)");
  if (depth < 1 || depth > kMaxFernDepth) throw ConfigError("fern depth S must lie in [1, 16]");
  if (candidates < 1) throw ConfigError("candidate pool size Q must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("bin shrinkage beta must be non-negative");
}

double PrimitiveRegressor::predict(std::span<const float> x) const {
  double sum = 0.0;
  for (const Fern& f : ferns) sum += fern_predict(f, x);
  return sum;
}

std::uint64_t candidate_seed(std::uint64_t seed, int iteration) noexcept {
  return mix_seed(seed, 0xb0057ULL, static_cast<std::uint64_t>(iteration));
}

namespace {

struct Candidate {
  Fern fern;
  std::vector<int> bins;
  double sse = std::numeric_limits<double>::infinity();
};

}  // namespace

BoostResult boost_fit(const FeatureMatrix& features, std::span<const double> targets, const BoostParams& params) {
  params.validate();
  const std::size_t n = targets.size();
  if (n == 0) throw ConfigError("boosting needs at least one sample");
  if (features.rows() != n) throw ConfigError("feature rows differ from target count");
  for (double y : targets)
    if (!std::isfinite(y)) throw ConfigError("non-finite regression target");

  BoostResult result;
  result.regressor.budget = params.iterations;

  double mean = 0.0;
  for (double y : targets) mean += y;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double y : targets) spread += (y - mean) * (y - mean);

  std::vector<double> g(n, 0.0);
  std::vector<double> residual(n);
  double sse = 0.0;
  for (double y : targets) sse += y * y;
  result.trace.initial_sse = sse;

  const auto ranges = feature_ranges(features);
  const int dim = static_cast<int>(features.cols());
  std::vector<Candidate> pool(static_cast<std::size_t>(params.candidates));

  for (int m = 1; m <= params.iterations; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - g[i];
    const auto shapes = sample_pool({params.candidates, candidate_seed(params.seed, m), dim}, params.depth, ranges);

    parallel_for(shapes.size(), [&](std::size_t q) {
      Candidate& c = pool[q];
      c.fern = fit_bins(shapes[q], residual, features, params.beta);
      c.bins.resize(n);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        c.bins[i] = bin_index(shapes[q], features.row(i));
        const double d = residual[i] - c.fern.bin_values[static_cast<std::size_t>(c.bins[i])];
        s += d * d;
      }
      c.sse = s;
    });

    std::size_t best = 0;
    for (std::size_t q = 1; q < pool.size(); ++q)
      if (pool[q].sse < pool[best].sse) best = q;
    if (!(pool[best].sse < sse)) break;

    const Candidate& winner = pool[best];
    for (std::size_t i = 0; i < n; ++i) g[i] += winner.fern.bin_values[static_cast<std::size_t>(winner.bins[i])];
    sse = winner.sse;
    result.regressor.ferns.push_back(winner.fern);
    result.trace.sse.push_back(sse);
    result.trace.selected.push_back(static_cast<int>(best));
  }

  result.trace.relative_error = spread > 0.0 ? sse / spread : 0.0;
  return result;
}

}  // namespace autocrop
