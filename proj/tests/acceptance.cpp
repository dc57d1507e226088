// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Criteria 6-10 train full cascades on the 500-image
// synthetic benchmark and take several minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "autocrop/cascade.hpp"
#include "autocrop/data.hpp"
#include "autocrop/harness.hpp"
#include "autocrop/parallel.hpp"
#include "cli.hpp"
#include "oracles.hpp"

using namespace autocrop;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  std::printf("criterion %2d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_1() {
  const CropRegion a{0.0, 0.0, 0.5, 0.5};
  const CropRegion p{0.1, 0.2, 0.6, 0.7};
  const CropRegion q{0.2, 0.3, 0.7, 0.8};
  struct Case {
    double got, want;
  };
  const std::vector<Case> cases{
      {iou(a, a), 1.0},
      {bde(a, a), 0.0},
      {iou(a, {0.25, 0.25, 0.75, 0.75}), 0.0625 / 0.4375},
      {iou(a, {0.6, 0.6, 0.9, 0.9}), 0.0},
      {bde({0, 0, 1, 1}, {0, 0, 1, 0.5}), 0.0625},
      {bde(p, q), 0.01},
      {bde(p, q, BdeMode::kAbsolute), 0.1},
  };
  double worst = 0.0;
  for (const Case& c : cases) worst = std::max(worst, std::abs(c.got - c.want));
  report(1, worst <= 1e-9, "metric exactness", fmt("%.0f hand cases, max |error| %.3g", static_cast<double>(cases.size()), worst));
}

void criterion_2() {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> side(4, 40);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    FeatureMaps m(kConvKernels, side(rng), side(rng));
    for (float& v : m.values) v = u(rng);
    if (spp(m).size() == 928u) ++ok;
  }
  report(2, ok == 100, "feature dimension", fmt("%.0f/100 random sizes give 928 values", ok));
}

void criterion_3() {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int c = std::uniform_int_distribution<int>(1, 3)(rng);
    FeatureMaps in(c, std::uniform_int_distribution<int>(1, 16)(rng), std::uniform_int_distribution<int>(1, 16)(rng));
    for (float& v : in.values) v = u(rng);
    ConvLayer layer;
    layer.in_channels = c;
    layer.kernels.resize(static_cast<std::size_t>(kConvKernels) * c * 25);
    layer.biases.resize(kConvKernels);
    for (float& v : layer.kernels) v = u(rng);
    for (float& v : layer.biases) v = u(rng);
    const FeatureMaps got = conv2d_same(in, layer);
    const FeatureMaps want = oracle::conv_naive(in, layer);
    if (got.values.size() != want.values.size()) {
      worst = INFINITY;
      break;
    }
    for (std::size_t i = 0; i < got.values.size(); ++i)
      worst = std::max(worst, static_cast<double>(std::abs(got.values[i] - want.values[i])));
  }
  report(3, worst <= 1e-6, "convolution oracle", fmt("50 inputs up to 16x16x3, max |error| %.3g", worst));
}

std::vector<std::vector<float>> random_rows(std::size_t n, std::size_t f, std::mt19937& rng) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<std::vector<float>> rows(n, std::vector<float>(f));
  for (auto& r : rows)
    for (float& v : r) v = u(rng);
  return rows;
}

void criterion_4() {
  std::mt19937 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  int mismatches = 0;
  int problems = 0;
  for (int trial = 0; trial < 40; ++trial, ++problems) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 64)(rng);
    const auto rows = random_rows(n, 16, rng);
    std::vector<double> y(n);
    for (double& v : y) v = g(rng);
    BoostParams p;
    p.iterations = std::uniform_int_distribution<int>(1, 4)(rng);
    p.depth = std::uniform_int_distribution<int>(1, 2)(rng);
    p.candidates = 12;
    p.beta = trial % 2 ? 0.0 : 1.0;
    p.seed = 4000 + trial;
    const BoostResult got = boost_fit(FeatureMatrix::from_rows(rows), y, p);
    const oracle::ReplayResult want = oracle::boost_replay(rows, y, p);
    bool same = got.trace.selected == want.selected && got.regressor.ferns.size() == want.bins.size() &&
                got.trace.sse.size() == want.sse.size();
    for (std::size_t k = 0; same && k < want.bins.size(); ++k) {
      const Fern& f = got.regressor.ferns[k];
      same = f.feature_indices == want.dims[k] && f.bin_values.size() == want.bins[k].size() &&
             std::abs(got.trace.sse[k] - want.sse[k]) <= 1e-9;
      for (std::size_t b = 0; same && b < f.bin_values.size(); ++b) same = std::abs(f.bin_values[b] - want.bins[k][b]) <= 1e-12;
    }
    if (!same) ++mismatches;
  }
  double worst_bins = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    const auto rows = random_rows(n, 8, rng);
    std::vector<double> e(n);
    for (double& v : e) v = g(rng);
    const FernShape shape{{std::uniform_int_distribution<int>(0, 7)(rng), std::uniform_int_distribution<int>(0, 7)(rng)},
                          {std::uniform_real_distribution<double>(-0.5, 0.5)(rng), 0.0}};
    const Fern f = fit_bins(shape, e, FeatureMatrix::from_rows(rows), 0.0);
    const auto want = oracle::bin_means_naive(shape.feature_indices, shape.thresholds, rows, e);
    for (std::size_t b = 0; b < want.size(); ++b) worst_bins = std::max(worst_bins, std::abs(f.bin_values[b] - want[b]));
  }
  report(4, mismatches == 0 && worst_bins <= 1e-12, "fern/boosting oracle equivalence",
         fmt("%.0f/%.0f boosting replays identical, fit_bins max |error| %.3g", problems - mismatches, problems,
             worst_bins));
}

void criterion_5() {
  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_gamma = 0.0;
  int violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(20, 200)(rng);
    const auto rows = random_rows(n, 32, rng);
    std::vector<double> y(n);
    const int d = std::uniform_int_distribution<int>(0, 31)(rng);
    const double offset = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    for (std::size_t i = 0; i < n; ++i) y[i] = offset + std::tanh(2.0 * rows[i][d]) + 0.5 * g(rng);
    BoostParams p;  // default bin shrinkage and candidate pool
    p.iterations = 10;
    p.depth = std::uniform_int_distribution<int>(1, 5)(rng);
    p.seed = 500 + trial;
    const BoostResult r = boost_fit(FeatureMatrix::from_rows(rows), y, p);
    if (r.regressor.ferns.empty()) continue;
    worst_gamma = std::max(worst_gamma, r.trace.relative_error);
    if (!(r.trace.relative_error < 1.0)) ++violations;
    double prev = r.trace.initial_sse;
    for (double s : r.trace.sse) {
      if (!(s < prev)) ++violations;
      prev = s;
    }
  }
  report(5, violations == 0, "convergence precondition",
         fmt("20 problems, max gamma %.4f, %.0f violations", worst_gamma, violations));
}

// Shared state for the benchmark criteria.
struct Bench {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
  ExtractorConfig extractor;
  CascadeParams base;
};

CascadeModel train_timed(const Bench& b, const CascadeParams& p, const char* label) {
  const auto t0 = std::chrono::steady_clock::now();
  CascadeModel m = ccr_train(to_train_samples(b.train), p, b.extractor);
  std::printf("  trained %-10s %2d stages kept, %2zu evaluated, %.1f s\n", label, m.stage_count(), m.stats.size() - 1,
              seconds_since(t0));
  std::fflush(stdout);
  return m;
}

double max_window_drop(const std::vector<StageStats>& stats, int window) {
  double worst = 0.0;
  for (std::size_t r = 0; r < stats.size(); ++r)
    for (std::size_t s = r + 1; s < stats.size() && s < r + static_cast<std::size_t>(window); ++s)
      worst = std::max(worst, stats[r].validation_iou - stats[s].validation_iou);
  return worst;
}

void benchmark_criteria(const fs::path& work) {
  SynthSpec spec;  // 500 images, seed 2017, 30% test
  const auto t0 = std::chrono::steady_clock::now();
  synth_generate(spec, work / "synth");
  Bench b;
  b.train = load_dataset(load_annotations(work / "synth" / "train.csv"), work / "synth");
  b.test = load_dataset(load_annotations(work / "synth" / "test.csv"), work / "synth");
  b.extractor = ExtractorConfig::random(7, 128);
  b.base = CascadeParams{};  // T=30, S=4, M=20, lambda=0.8
  std::printf("  benchmark: %zu train / %zu test images, cap %d\n", b.train.size(), b.test.size(), b.extractor.cap);

  const auto t6 = std::chrono::steady_clock::now();
  const CascadeModel ccr = train_timed(b, b.base, "CCR");
  const auto ccr_curve = run_curve(ccr, b.test, b.base.stages);
  const double train6 = seconds_since(t6);
  const double gain = ccr_curve.back().mean_iou - ccr_curve.front().mean_iou;
  const double drop = max_window_drop(ccr.stats, 5);
  report(6, gain >= 0.15 && drop <= 0.02 && b.train.size() == 350 && train6 <= 1800.0, "end-to-end benchmark",
         fmt("test IoU %.4f -> %.4f (gain %.4f), worst 5-stage validation drop %.4f", ccr_curve.front().mean_iou,
             ccr_curve.back().mean_iou, gain, drop) +
             fmt(", %.0f s", train6));

  CascadeParams minus = b.base;
  minus.boost.iterations = 1;
  const CascadeModel ccr_minus = train_timed(b, minus, "CCR-");
  const auto minus_curve = run_curve(ccr_minus, b.test, 30);
  double best_early = 0.0;
  int best_stage = 0;
  for (int t = 0; t <= 10; ++t)
    if (ccr_curve[t].mean_iou > best_early) {
      best_early = ccr_curve[t].mean_iou;
      best_stage = t;
    }
  report(7, best_early >= minus_curve[30].mean_iou, "CCR vs CCR-",
         fmt("CCR best at stage %.0f = %.4f, CCR- at stage 30 = %.4f", best_stage, best_early,
             minus_curve[30].mean_iou));

  std::vector<double> finals{ccr_curve.back().mean_iou};
  for (InitialCrop policy : {InitialCrop::kHalf, InitialCrop::kQuarter}) {
    CascadeParams p = b.base;
    p.initial_crop = policy;
    const CascadeModel m = train_timed(b, p, ("init=" + to_string(policy)).c_str());
    finals.push_back(run_curve(m, b.test, 30).back().mean_iou);
  }
  const double spread = *std::max_element(finals.begin(), finals.end()) - *std::min_element(finals.begin(), finals.end());
  const bool full_best = finals[0] >= finals[1] && finals[0] >= finals[2];
  report(8, spread <= 0.08 && full_best, "initial-crop robustness",
         fmt("final IoU full %.4f, 0.5 %.4f, 0.25 %.4f; spread %.4f", finals[0], finals[1], finals[2], spread) +
             (full_best ? ", full frame highest" : ", full frame NOT highest"));

  // Criterion 9: persistence and run-to-run determinism.
  save_model(ccr, work / "run1.json");
  const CascadeModel loaded = load_model(work / "run1.json");
  int identical = 0;
  for (int i = 0; i < 10; ++i) {
    const Image& img = *b.test[static_cast<std::size_t>(i)].image;
    if (ccr_predict(loaded, img).trajectory == ccr_predict(ccr, img).trajectory) ++identical;
  }
  save_model(train_timed(b, b.base, "CCR again"), work / "run2.json");
  const bool same_bytes = read_file(work / "run1.json") == read_file(work / "run2.json");
  report(9, identical == 10 && same_bytes, "determinism and serialization",
         fmt("%.0f/10 reloaded trajectories bit-identical, repeated training ", identical) +
             (same_bytes ? "byte-identical" : "DIFFERS"));

  // Criterion 10: a 10-stage cascade at cap 256, predicted through the CLI on one thread.
  CascadeParams p10 = b.base;
  p10.stages = 10;
  p10.validation_fraction = 0.0;
  Bench b256 = b;
  b256.train.resize(60);
  b256.extractor = ExtractorConfig::random(7, 256);
  const CascadeModel m10 = train_timed(b256, p10, "T=10 @256");
  save_model(m10, work / "t10.json");
  SynthSpec big;
  big.image_count = 1;
  big.min_size = big.max_size = 640;
  save_ppm(synth_image(big, 0).image, work / "big.ppm");
  const std::string model_arg = (work / "t10.json").string();
  const std::string image_arg = (work / "big.ppm").string();
  const char* argv[] = {"autocrop", "predict", "--model", model_arg.c_str(), "--image", image_arg.c_str(),
                        "--threads", "1"};
  std::ostringstream out, err;
  const auto tp = std::chrono::steady_clock::now();
  const int code = cli::run(8, argv, out, err);
  const double predict_s = seconds_since(tp);
  report(10, code == 0 && m10.stage_count() == 10 && predict_s <= 30.0, "runtime sanity",
         fmt("T=%.0f cap 256 predict on 640x640 took %.3f s (exit %.0f)", m10.stage_count(), predict_s, code));
  std::printf("  benchmark criteria total %.0f s\n", seconds_since(t0));
}

}  // namespace

int main() {
  set_thread_count(1);
  const fs::path work = fs::temp_directory_path() / "autocrop_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::function<void()>> quick{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5};
  for (const auto& c : quick) c();
  try {
    benchmark_criteria(work);
  } catch (const std::exception& e) {
    std::printf("benchmark criteria aborted: %s\n", e.what());
    ++g_failures;
  }
  fs::remove_all(work);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
