#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "autocrop/boosting.hpp"
#include "autocrop/error.hpp"
#include "autocrop/ferns.hpp"
#include "oracles.hpp"

namespace autocrop {
namespace {

std::vector<std::vector<float>> random_rows(std::size_t n, std::size_t f, std::mt19937& rng) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<std::vector<float>> rows(n, std::vector<float>(f));
  for (auto& r : rows)
    for (float& v : r) v = u(rng);
  return rows;
}

TEST(BinIndex, HandCases) {
  const std::vector<float> x{0.0f, 0.7f, -3.0f};
  EXPECT_EQ(bin_index(FernShape{{1}, {0.5}}, x), 1);
  EXPECT_EQ(bin_index(FernShape{{1, 2}, {0.9, 0.0}}, x), 0);
  // Equality counts as a set bit.
  EXPECT_EQ(bin_index(FernShape{{0}, {0.0}}, x), 1);
}

TEST(BinIndex, MatchesBitOracle) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> dim(0, 9);
  std::uniform_real_distribution<double> thr(-1.0, 1.0);
  const auto rows = random_rows(100, 10, rng);
  for (int s = 1; s <= 5; ++s) {
    FernShape shape;
    for (int k = 0; k < s; ++k) {
      shape.feature_indices.push_back(dim(rng));
      shape.thresholds.push_back(thr(rng));
    }
    for (const auto& x : rows)
      ASSERT_EQ(bin_index(shape, x), oracle::fern_bin_naive(shape.feature_indices, shape.thresholds, x));
  }
}

TEST(FernPredict, Lookup) {
  const Fern zero{{0, 1}, {0.0, 0.0}, {0, 0, 0, 0}};
  std::mt19937 rng(2);
  for (const auto& x : random_rows(20, 2, rng)) EXPECT_EQ(fern_predict(zero, x), 0.0);
  const Fern one{{0}, {0.5}, {2.0, -1.0}};
  EXPECT_EQ(fern_predict(one, std::vector<float>{0.6f}), -1.0);
  EXPECT_EQ(fern_predict(one, std::vector<float>{0.4f}), 2.0);
}

TEST(FitBins, ClosedFormCases) {
  const FeatureMatrix same = FeatureMatrix::from_rows({{1.0f}, {1.0f}, {1.0f}});
  const Fern c = fit_bins({{0}, {0.5}}, std::vector<double>{0.3, 0.3, 0.3}, same, 0.0);
  EXPECT_DOUBLE_EQ(c.bin_values[1], 0.3);
  EXPECT_DOUBLE_EQ(c.bin_values[0], 0.0);

  const FeatureMatrix two = FeatureMatrix::from_rows({{1.0f}, {1.0f}});
  EXPECT_DOUBLE_EQ(fit_bins({{0}, {0.5}}, std::vector<double>{1.0, 3.0}, two, 0.0).bin_values[1], 2.0);

  const FeatureMatrix one = FeatureMatrix::from_rows({{1.0f}});
  EXPECT_DOUBLE_EQ(fit_bins({{0}, {0.5}}, std::vector<double>{1.0}, one, 1.0).bin_values[1], 0.5);
}

TEST(FitBins, ZeroBetaMatchesLeastSquaresOracle) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    const auto rows = random_rows(n, 6, rng);
    std::vector<double> e(n);
    for (double& v : e) v = g(rng);
    FernShape shape{{std::uniform_int_distribution<int>(0, 5)(rng), std::uniform_int_distribution<int>(0, 5)(rng)},
                    {0.1 * trial / 30.0, -0.2}};
    const Fern fern = fit_bins(shape, e, FeatureMatrix::from_rows(rows), 0.0);
    const auto want = oracle::bin_means_naive(shape.feature_indices, shape.thresholds, rows, e);
    ASSERT_EQ(fern.bin_values.size(), want.size());
    for (std::size_t b = 0; b < want.size(); ++b) ASSERT_NEAR(fern.bin_values[b], want[b], 1e-12);
  }
}

TEST(FitBins, LargerBetaShrinksEveryBin) {
  std::mt19937 rng(4);
  const auto rows = random_rows(40, 4, rng);
  std::vector<double> e(40);
  std::normal_distribution<double> g(0.0, 2.0);
  for (double& v : e) v = g(rng);
  const FeatureMatrix fm = FeatureMatrix::from_rows(rows);
  const FernShape shape{{0, 1, 2}, {0.0, 0.1, -0.1}};
  std::vector<double> prev = fit_bins(shape, e, fm, 0.0).bin_values;
  for (double beta : {0.5, 1.0, 5.0, 50.0}) {
    const std::vector<double> cur = fit_bins(shape, e, fm, beta).bin_values;
    for (std::size_t b = 0; b < cur.size(); ++b) ASSERT_LE(std::abs(cur[b]), std::abs(prev[b]) + 1e-15);
    prev = cur;
  }
}

std::vector<FeatureRange> unit_ranges(int f) { return std::vector<FeatureRange>(f, FeatureRange{0.0, 1.0}); }

TEST(SamplePool, DeterministicAndWellFormed) {
  const FernPool pool{64, 99, 50};
  const auto ranges = unit_ranges(50);
  const auto a = sample_pool(pool, 4, ranges);
  EXPECT_EQ(a, sample_pool(pool, 4, ranges));
  EXPECT_NE(a, sample_pool(FernPool{64, 100, 50}, 4, ranges));
  ASSERT_EQ(a.size(), 64u);
  for (const FernShape& s : a) {
    ASSERT_EQ(s.depth(), 4);
    ASSERT_EQ(std::set<int>(s.feature_indices.begin(), s.feature_indices.end()).size(), 4u);
    for (double t : s.thresholds) {
      ASSERT_GE(t, 0.0);
      ASSERT_LT(t, 1.0);
    }
  }
}

TEST(SamplePool, FullDepthUsesEveryDimension) {
  const auto pool = sample_pool(FernPool{20, 5, 6}, 6, unit_ranges(6));
  for (const FernShape& s : pool) {
    std::vector<int> d = s.feature_indices;
    std::sort(d.begin(), d.end());
    ASSERT_EQ(d, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  }
  EXPECT_THROW(sample_pool(FernPool{1, 5, 6}, 7, unit_ranges(6)), ConfigError);
}

TEST(SamplePool, DimensionFrequencyIsUniform) {
  const auto pool = sample_pool(FernPool{1000, 2024, 10}, 1, unit_ranges(10));
  std::vector<int> counts(10, 0);
  for (const FernShape& s : pool) ++counts[s.feature_indices[0]];
  double chi2 = 0.0;
  for (int c : counts) {
    EXPECT_NEAR(c / 1000.0, 0.1, 0.03);
    chi2 += (c - 100.0) * (c - 100.0) / 100.0;
  }
  // 99.9th percentile of chi-square with 9 degrees of freedom.
  EXPECT_LT(chi2, 27.88);
}

TEST(SamplePool, DegenerateRangeUsesItsValue) {
  const std::vector<FeatureRange> r{{0.25, 0.25}};
  for (const FernShape& s : sample_pool(FernPool{5, 1, 1}, 1, r)) EXPECT_EQ(s.thresholds[0], 0.25);
}

BoostParams small_params(std::uint64_t seed, int m, int s, double beta) {
  BoostParams p;
  p.iterations = m;
  p.depth = s;
  p.candidates = 8;
  p.beta = beta;
  p.seed = seed;
  return p;
}

TEST(Boost, ZeroTargetsStayEmpty) {
  std::mt19937 rng(5);
  const auto rows = random_rows(10, 4, rng);
  const BoostResult r = boost_fit(FeatureMatrix::from_rows(rows), std::vector<double>(10, 0.0), small_params(1, 4, 2, 1.0));
  EXPECT_DOUBLE_EQ(r.trace.initial_sse, 0.0);
  EXPECT_DOUBLE_EQ(r.trace.relative_error, 0.0);
  for (const auto& x : rows) EXPECT_EQ(r.regressor.predict(x), 0.0);
}

TEST(Boost, SingleBinConstantTargetIsExact) {
  // Every feature is 2 and every threshold lies in [2, 2], so all samples land in the top bin.
  const FeatureMatrix fm = FeatureMatrix::from_rows(std::vector<FeatureVector>(6, FeatureVector(3, 2.0f)));
  const BoostResult r = boost_fit(fm, std::vector<double>(6, 0.7), small_params(3, 1, 2, 0.0));
  ASSERT_EQ(r.regressor.ferns.size(), 1u);
  EXPECT_DOUBLE_EQ(r.regressor.predict(fm.row(0)), 0.7);
  EXPECT_NEAR(r.trace.sse.back(), 0.0, 1e-24);
}

TEST(Boost, MatchesReplayOracle) {
  std::mt19937 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 64)(rng);
    const int m = std::uniform_int_distribution<int>(1, 4)(rng);
    const int s = std::uniform_int_distribution<int>(1, 2)(rng);
    const double beta = trial % 3 == 0 ? 0.0 : 1.0;
    const auto rows = random_rows(n, 12, rng);
    std::vector<double> y(n);
    for (double& v : y) v = g(rng);
    const BoostParams p = small_params(1000 + trial, m, s, beta);
    const BoostResult got = boost_fit(FeatureMatrix::from_rows(rows), y, p);
    const oracle::ReplayResult want = oracle::boost_replay(rows, y, p);
    ASSERT_EQ(got.trace.selected, want.selected);
    ASSERT_EQ(got.regressor.ferns.size(), want.bins.size());
    for (std::size_t k = 0; k < want.bins.size(); ++k) {
      ASSERT_EQ(got.regressor.ferns[k].feature_indices, want.dims[k]);
      ASSERT_EQ(got.regressor.ferns[k].bin_values.size(), want.bins[k].size());
      for (std::size_t b = 0; b < want.bins[k].size(); ++b)
        ASSERT_NEAR(got.regressor.ferns[k].bin_values[b], want.bins[k][b], 1e-12);
      ASSERT_NEAR(got.trace.sse[k], want.sse[k], 1e-9);
    }
  }
}

TEST(Boost, RelativeErrorBelowOneAndSseDecreasing) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = random_rows(80, 20, rng);
    std::vector<double> y(80);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = rows[i][3] + 0.5 * rows[i][7] + 0.3 * g(rng) + 2.0;
    const BoostResult r = boost_fit(FeatureMatrix::from_rows(rows), y, small_params(trial, 10, 3, 1.0));
    ASSERT_FALSE(r.regressor.ferns.empty());
    ASSERT_LT(r.trace.relative_error, 1.0);
    double prev = r.trace.initial_sse;
    for (double s : r.trace.sse) {
      ASSERT_LT(s, prev);
      prev = s;
    }
  }
}

TEST(Boost, DefaultShrinkageStillBeatsTheMeanWithOffsetTargets) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(20, 200)(rng);
    const auto rows = random_rows(n, 32, rng);
    const double offset = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = offset + std::tanh(2.0 * rows[i][trial % 32]) + 0.5 * g(rng);
    BoostParams p;
    p.iterations = 10;
    p.seed = trial;
    const BoostResult r = boost_fit(FeatureMatrix::from_rows(rows), y, p);
    ASSERT_FALSE(r.regressor.ferns.empty());
    ASSERT_LT(r.trace.relative_error, 1.0) << "offset " << offset << ", n " << n;
  }
}

TEST(Boost, PredictionIsSumOfFerns) {
  std::mt19937 rng(8);
  const auto rows = random_rows(50, 8, rng);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(3.0 * rows[i][0]) + rows[i][5];
  const BoostResult r = boost_fit(FeatureMatrix::from_rows(rows), y, small_params(9, 5, 2, 1.0));
  ASSERT_EQ(r.regressor.ferns.size(), 5u);
  for (const auto& x : random_rows(30, 8, rng)) {
    double sum = 0.0;
    for (const Fern& f : r.regressor.ferns) sum += fern_predict(f, x);
    ASSERT_NEAR(boost_predict(r.regressor, x), sum, 1e-12);
  }
  EXPECT_EQ(PrimitiveRegressor{}.predict(rows[0]), 0.0);
  PrimitiveRegressor single{{r.regressor.ferns[0]}, 1};
  EXPECT_EQ(single.predict(rows[1]), fern_predict(r.regressor.ferns[0], rows[1]));
}

TEST(Boost, DeterministicUnderSeedAndThreads) {
  std::mt19937 rng(10);
  const auto rows = random_rows(60, 30, rng);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = rows[i][1] * rows[i][2];
  const FeatureMatrix fm = FeatureMatrix::from_rows(rows);
  const BoostResult a = boost_fit(fm, y, small_params(4, 6, 4, 1.0));
  EXPECT_EQ(a.regressor, boost_fit(fm, y, small_params(4, 6, 4, 1.0)).regressor);
}

TEST(Boost, RejectsBadInput) {
  EXPECT_THROW(boost_fit(FeatureMatrix{}, std::vector<double>{}, small_params(1, 1, 1, 1.0)), ConfigError);
  BoostParams bad = small_params(1, 1, 1, 1.0);
  bad.depth = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small_params(1, 1, 1, -1.0);
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace autocrop
