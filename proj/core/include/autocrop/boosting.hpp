#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autocrop/ferns.hpp"

namespace autocrop {

struct BoostParams {
  int iterations = 20;   ///< M, the fern budget
  int depth = 4;         ///< S, comparisons per fern
  int candidates = 64;   ///< Q, ferns sampled per iteration
  double beta = 50.0;    ///< bin shrinkage; large values keep single ferns weak
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sum of up to M ferns.
struct PrimitiveRegressor {
  std::vector<Fern> ferns;
  int budget = 0;

  double predict(std::span<const float> x) const;
  friend bool operator==(const PrimitiveRegressor&, const PrimitiveRegressor&) = default;
};

struct BoostingTrace {
  double initial_sse = 0.0;       ///< sum of squared targets (g = 0)
  std::vector<double> sse;        ///< training SSE after each accepted fern
  std::vector<int> selected;      ///< winning candidate index per accepted fern
  double relative_error = 0.0;    ///< final SSE / SSE of the mean prediction; 0 for constant targets
};

struct BoostResult {
  PrimitiveRegressor regressor;
  BoostingTrace trace;
};

/// Seed of the candidate pool sampled at (1-based) iteration m.
std::uint64_t candidate_seed(std::uint64_t seed, int iteration) noexcept;

/// Least-squares gradient boosting. Starting from g = 0, each iteration
/// samples a candidate pool, fits every candidate's bins to the current
/// residuals, and keeps the candidate with the lowest SSE (lowest index on
/// ties). Stops early once the best candidate no longer strictly lowers the
/// training SSE.
BoostResult boost_fit(const FeatureMatrix& features, std::span<const double> targets, const BoostParams& params);

inline double boost_predict(const PrimitiveRegressor& p, std::span<const float> x) { return p.predict(x); }

}  // namespace autocrop
