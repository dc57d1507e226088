#include "autocrop/cascade.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "autocrop/error.hpp"
#include "autocrop/parallel.hpp"
#include "autocrop/random.hpp"

namespace autocrop {

double initial_crop_scale(InitialCrop policy) noexcept {
  switch (policy) {
    case InitialCrop::kHalf: return 0.5;
    case InitialCrop::kQuarter: return 0.25;
    default: return 1.0;
  }
}

std::string to_string(InitialCrop policy) {
  switch (policy) {
    case InitialCrop::kHalf: return "0.5";
    case InitialCrop::kQuarter: return "0.25";
    default: return "full";
  }
}

InitialCrop parse_initial_crop(std::string_view text) {
  if (text == "full" || text == "1.0" || text == "1") return InitialCrop::kFullFrame;
  if (text == "0.5") return InitialCrop::kHalf;
  if (text == "0.25") return InitialCrop::kQuarter;
  throw ConfigError("unknown initial crop policy '" + std::string(text) + "' (expected full, 0.5 or 0.25)");
}

CropRegion initial_region(InitialCrop policy, ImageDims dims) {
  const CropRegion full = full_frame(dims);
  if (policy == InitialCrop::kFullFrame) return full;
  const double s = initial_crop_scale(policy);
  const double cx = 0.5 * full.x2;
  const double cy = 0.5 * full.y2;
  const double hw = 0.5 * s * full.x2;
  const double hh = 0.5 * s * full.y2;
  return {cx - hw, cy - hh, cx + hw, cy + hh};
}

void CascadeParams::validate() const {
  if (stages < 0) throw ConfigError("stage count T must be non-negative");
  boost.validate();
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw ConfigError("shrinkage lambda must lie in (0, 1]");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation fraction must lie in [0, 1)");
  if (patience < 1) throw ConfigError("patience must be at least 1");
}

void CascadeModel::validate() const {
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw ConfigError("shrinkage lambda must lie in (0, 1]");
  extractor.validate();
  const int dim = extractor.feature_dim();
  for (const CascadeStage& s : stages)
    for (const PrimitiveRegressor& r : s.regressors)
      for (const Fern& f : r.ferns) f.validate(dim);
}

CropRegion apply_stage(const CascadeStage& stage, std::span<const float> features, const CropRegion& state,
                       double shrinkage) {
  CropRegion next = state;
  for (int j = 0; j < 4; ++j) next.coord(j) += shrinkage * stage.regressors[j].predict(features);
  return next;
}

namespace {

struct Track {
  const TrainSample* sample;
  CropRegion state;
};

double mean_iou(const std::vector<Track>& tracks) {
  if (tracks.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const Track& t : tracks) sum += iou(clamp_to_image(t.state, t.sample->image->dims()), t.sample->target);
  return sum / static_cast<double>(tracks.size());
}

FeatureMatrix extract_all(const std::vector<Track>& tracks, const ExtractorConfig& cfg) {
  FeatureMatrix x(tracks.size(), static_cast<std::size_t>(cfg.feature_dim()));
  parallel_for(tracks.size(), [&](std::size_t i) {
    const Image& img = *tracks[i].sample->image;
    x.set_row(i, extract_features(img, clamp_to_image(tracks[i].state, img.dims()), cfg));
  });
  return x;
}

void advance(std::vector<Track>& tracks, const FeatureMatrix& x, const CascadeStage& stage, double shrinkage) {
  for (std::size_t i = 0; i < tracks.size(); ++i) tracks[i].state = apply_stage(stage, x.row(i), tracks[i].state, shrinkage);
}

}  // namespace

CascadeModel ccr_train(std::span<const TrainSample> samples, const CascadeParams& params,
                       const ExtractorConfig& extractor, const StageCallback& on_stage) {
  params.validate();
  extractor.validate();
  if (samples.empty()) throw ConfigError("cascade training needs samples");
  if (samples.size() < 2) throw ConfigError("cascade training needs at least two samples");
  for (const TrainSample& s : samples) {
    if (!s.image || s.image->empty()) throw ConfigError("training sample without image");
    if (!is_canonical(s.target)) throw DegenerateRegionError("training target is degenerate");
  }

  // Seeded split into fitting and validation tracks.
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(params.seed, 0x5b117ULL));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::size_t n_val = static_cast<std::size_t>(std::floor(params.validation_fraction * static_cast<double>(samples.size())));
  if (n_val >= samples.size()) n_val = 0;

  std::vector<Track> fit;
  std::vector<Track> val;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const TrainSample& s = samples[order[k]];
    Track t{&s, initial_region(params.initial_crop, s.image->dims())};
    (k < n_val ? val : fit).push_back(t);
  }

  CascadeModel model;
  model.shrinkage = params.shrinkage;
  model.extractor = extractor;
  model.initial_crop = params.initial_crop;
  model.params = params;

  StageStats s0;
  s0.train_iou = mean_iou(fit);
  s0.validation_iou = mean_iou(val);
  model.stats.push_back(s0);
  if (on_stage) on_stage(s0);

  double best_val = s0.validation_iou;
  std::size_t best_stage = 0;
  int stale = 0;

  std::vector<double> residual(fit.size());
  for (int t = 1; t <= params.stages; ++t) {
    const FeatureMatrix x = extract_all(fit, extractor);
    CascadeStage stage;
    StageStats st;
    st.stage = t;
    for (int j = 0; j < 4; ++j) {
      for (std::size_t i = 0; i < fit.size(); ++i) residual[i] = fit[i].sample->target.coord(j) - fit[i].state.coord(j);
      BoostParams bp = params.boost;
      bp.seed = mix_seed(params.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
      BoostResult r = boost_fit(x, residual, bp);
      st.relative_error[j] = r.trace.relative_error;
      st.ferns[j] = static_cast<int>(r.regressor.ferns.size());
      stage.regressors[j] = std::move(r.regressor);
    }
    advance(fit, x, stage, params.shrinkage);
    if (!val.empty()) advance(val, extract_all(val, extractor), stage, params.shrinkage);

    st.train_iou = mean_iou(fit);
    st.validation_iou = mean_iou(val);
    model.stages.push_back(std::move(stage));
    model.stats.push_back(st);
    if (on_stage) on_stage(st);

    if (val.empty()) {
      best_stage = static_cast<std::size_t>(t);
      continue;
    }
    if (st.validation_iou > best_val) {
      best_val = st.validation_iou;
      best_stage = static_cast<std::size_t>(t);
      stale = 0;
    } else if (++stale >= params.patience) {
      break;
    }
  }
  model.stages.resize(best_stage);
  return model;
}

Prediction ccr_predict(const CascadeModel& model, const Image& img) {
  using clock = std::chrono::steady_clock;
  Prediction p;
  CropRegion state = initial_region(model.initial_crop, img.dims());
  p.trajectory.push_back(state);
  for (const CascadeStage& stage : model.stages) {
    const auto t0 = clock::now();
    const FeatureVector x = extract_features(img, clamp_to_image(state, img.dims()), model.extractor);
    state = apply_stage(stage, x, state, model.shrinkage);
    p.trajectory.push_back(state);
    p.stage_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
  }
  p.region = clamp_to_image(state, img.dims());
  return p;
}

}  // namespace autocrop
