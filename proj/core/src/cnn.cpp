#include "autocrop/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "autocrop/error.hpp"
#include "autocrop/random.hpp"

namespace autocrop {

FeatureMaps::FeatureMaps(int c, int h, int w)
    : channels(c), height(h), width(w), values(static_cast<std::size_t>(c) * h * w, 0.0f) {}

FeatureMaps FeatureMaps::from_image(const Image& img) {
  FeatureMaps m(kImageChannels, img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < kImageChannels; ++c) m.at(c, y, x) = img.at(x, y, c);
  return m;
}

void ConvLayer::validate() const {
  if (in_channels < 1) throw ConfigError("conv layer needs at least one input channel");
  const std::size_t expect = static_cast<std::size_t>(kConvKernels) * in_channels * kKernelSize * kKernelSize;
  if (kernels.size() != expect)
    throw ConfigError("conv layer has " + std::to_string(kernels.size()) + " kernel weights, expected " +
                      std::to_string(expect));
  if (biases.size() != kConvKernels) throw ConfigError("conv layer needs 32 biases");
  for (float v : kernels)
    if (!std::isfinite(v)) throw ConfigError("non-finite conv weight");
  for (float v : biases)
    if (!std::isfinite(v)) throw ConfigError("non-finite conv bias");
}

ExtractorConfig ExtractorConfig::random(std::uint64_t seed, int cap) {
  ExtractorConfig cfg;
  cfg.cap = cap;
  cfg.weight_seed = seed;
  int in = kImageChannels;
  for (int l = 0; l < kConvLayers; ++l) {
    ConvLayer layer;
    layer.in_channels = in;
    const int fan_in = in * kKernelSize * kKernelSize;
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Rng rng(mix_seed(seed, 1, static_cast<std::uint64_t>(l)));
    layer.kernels.resize(static_cast<std::size_t>(kConvKernels) * fan_in);
    for (float& w : layer.kernels) w = static_cast<float>(rng.uniform(-a, a));
    layer.biases.assign(kConvKernels, 0.0f);
    cfg.layers.push_back(std::move(layer));
    in = kConvKernels;
  }
  ClassifierHead head;
  const int dim = cfg.feature_dim();
  const double a = 1.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(mix_seed(seed, 2));
  head.weights.resize(static_cast<std::size_t>(2) * dim);
  for (float& w : head.weights) w = static_cast<float>(rng.uniform(-a, a));
  cfg.classifier = std::move(head);
  cfg.validate();
  return cfg;
}

int ExtractorConfig::feature_dim() const noexcept {
  int cells = 0;
  for (int n : spp_levels) cells += n * n;
  return cells * kConvKernels;
}

void ExtractorConfig::validate() const {
  if (layers.size() != kConvLayers) throw ConfigError("extractor needs exactly 5 conv layers");
  int in = kImageChannels;
  for (const ConvLayer& layer : layers) {
    if (layer.in_channels != in)
      throw ConfigError("conv layer expects " + std::to_string(layer.in_channels) + " input channels, previous layer yields " +
                        std::to_string(in));
    layer.validate();
    in = kConvKernels;
  }
  if (spp_levels.empty()) throw ConfigError("spp_levels must not be empty");
  for (int n : spp_levels)
    if (n < 1 || n > 4) throw ConfigError("spp level must lie in [1, 4]");
  if (cap < 32) throw ConfigError("cap must be at least 32");
  if (classifier) {
    if (classifier->weights.size() != static_cast<std::size_t>(2) * feature_dim())
      throw ConfigError("classifier weights must be 2 x feature_dim");
  }
}

FeatureMaps conv2d_same(const FeatureMaps& input, const ConvLayer& layer) {
  if (input.channels != layer.in_channels)
    throw ConfigError("conv input has " + std::to_string(input.channels) + " channels, layer expects " +
                      std::to_string(layer.in_channels));
  const int h = input.height;
  const int w = input.width;
  const int hp = h + 2 * kConvPadding;
  const int wp = w + 2 * kConvPadding;

  std::vector<double> padded(static_cast<std::size_t>(input.channels) * hp * wp, 0.0);
  for (int c = 0; c < input.channels; ++c)
    for (int y = 0; y < h; ++y) {
      const float* src = &input.values[(static_cast<std::size_t>(c) * h + y) * w];
      double* dst = &padded[(static_cast<std::size_t>(c) * hp + y + kConvPadding) * wp + kConvPadding];
      for (int x = 0; x < w; ++x) dst[x] = src[x];
    }

  FeatureMaps out(kConvKernels, h, w);
  std::vector<double> acc(static_cast<std::size_t>(w));
  for (int k = 0; k < kConvKernels; ++k) {
    const float* kernel = &layer.kernels[static_cast<std::size_t>(k) * input.channels * kKernelSize * kKernelSize];
    for (int y = 0; y < h; ++y) {
      std::fill(acc.begin(), acc.end(), static_cast<double>(layer.biases[k]));
      double* __restrict a = acc.data();
      for (int c = 0; c < input.channels; ++c)
        for (int dy = 0; dy < kKernelSize; ++dy) {
          const double* row = &padded[(static_cast<std::size_t>(c) * hp + y + dy) * wp];
          const float* taps = kernel + (c * kKernelSize + dy) * kKernelSize;
          for (int dx = 0; dx < kKernelSize; ++dx) {
            const double wt = taps[dx];
            const double* __restrict r = row + dx;
            for (int x = 0; x < w; ++x) a[x] += wt * r[x];
          }
        }
      float* dst = &out.values[(static_cast<std::size_t>(k) * h + y) * w];
      for (int x = 0; x < w; ++x) dst[x] = static_cast<float>(a[x]);
    }
  }
  return out;
}

FeatureMaps relu(FeatureMaps maps) {
  for (float& v : maps.values) v = std::max(v, 0.0f);
  return maps;
}

FeatureMaps maxpool2(const FeatureMaps& input) {
  if (input.height < 2 || input.width < 2)
    throw ConfigError("max pooling needs maps of at least 2x2, got " + std::to_string(input.height) + "x" +
                      std::to_string(input.width));
  FeatureMaps out(input.channels, input.height / 2, input.width / 2);
  for (int c = 0; c < input.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(c, y, x) = std::max(std::max(input.at(c, 2 * y, 2 * x), input.at(c, 2 * y, 2 * x + 1)),
                                   std::max(input.at(c, 2 * y + 1, 2 * x), input.at(c, 2 * y + 1, 2 * x + 1)));
  return out;
}

FeatureVector spp(const FeatureMaps& input, std::span<const int> levels) {
  int finest = 0;
  for (int n : levels) finest = std::max(finest, n);
  if (input.height < finest || input.width < finest)
    throw ConfigError("spatial pyramid pooling needs maps of at least " + std::to_string(finest) + "x" +
                      std::to_string(finest));
  FeatureVector out;
  std::size_t cells = 0;
  for (int n : levels) cells += static_cast<std::size_t>(n) * n;
  out.reserve(cells * input.channels);
  for (int n : levels)
    for (int c = 0; c < input.channels; ++c)
      for (int i = 0; i < n; ++i) {
        const int y0 = i * input.height / n;
        const int y1 = (i + 1) * input.height / n;
        for (int j = 0; j < n; ++j) {
          const int x0 = j * input.width / n;
          const int x1 = (j + 1) * input.width / n;
          float m = -std::numeric_limits<float>::infinity();
          for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) m = std::max(m, input.at(c, y, x));
          out.push_back(m);
        }
      }
  return out;
}

FeatureMaps forward_maps(const Image& input, const ExtractorConfig& cfg) {
  FeatureMaps maps = FeatureMaps::from_image(input);
  for (int l = 0; l < kConvLayers; ++l) {
    maps = relu(conv2d_same(maps, cfg.layers[l]));
    if (l < kPooledLayers) maps = maxpool2(maps);
  }
  return maps;
}

namespace {

int scaled_side(int side, int longest, int cap) {
  if (longest <= cap) return side;
  return std::max(1, static_cast<int>(std::floor(side * static_cast<double>(cap) / longest + 0.5)));
}

// Widens one axis of `window` to `target` source pixels, centered, shifted
// inside [0, extent).
void widen(int& lo, int& hi, int extent, int target) {
  target = std::min(target, extent);
  if (hi - lo >= target) return;
  const int need = target - (hi - lo);
  lo -= need / 2;
  hi += need - need / 2;
  if (lo < 0) {
    hi -= lo;
    lo = 0;
  }
  if (hi > extent) {
    lo -= hi - extent;
    hi = extent;
  }
}

}  // namespace

FeatureVector extract_features(const Image& img, const CropRegion& c, const ExtractorConfig& cfg,
                               ExtractionReport* report) {
  PixelRect window = denormalize(c, img.dims());
  bool padded = false;

  // Widen windows whose capped size would not survive four poolings.
  for (int iter = 0; iter < 4; ++iter) {
    const int longest = std::max(window.width(), window.height());
    const int sw = scaled_side(window.width(), longest, cfg.cap);
    const int sh = scaled_side(window.height(), longest, cfg.cap);
    if (sw >= kMinViableSide && sh >= kMinViableSide) break;
    const double f = longest > cfg.cap ? static_cast<double>(cfg.cap) / longest : 1.0;
    const int need = static_cast<int>(std::ceil(kMinViableSide / f));
    const PixelRect before = window;
    if (sw < kMinViableSide) widen(window.x1, window.x2, img.width(), need);
    if (sh < kMinViableSide) widen(window.y1, window.y2, img.height(), need);
    if (window == before) break;
    padded = true;
  }

  Image input = downscale_cap(crop_window(img, window), cfg.cap);
  if (input.width() < kMinViableSide || input.height() < kMinViableSide) {
    input = pad_to(input, kMinViableSide, kMinViableSide);
    padded = true;
  }
  if (report) {
    report->window = window;
    report->input_width = input.width();
    report->input_height = input.height();
    report->padded = padded;
  }
  return spp(forward_maps(input, cfg), cfg.spp_levels);
}

std::array<double, 2> softmax2(double z0, double z1) noexcept {
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m);
  const double e1 = std::exp(z1 - m);
  const double s = e0 + e1;
  return {e0 / s, e1 / s};
}

Classification classify(std::span<const float> features, const ExtractorConfig& cfg) {
  if (!cfg.classifier) throw ConfigError("extractor config has no classifier head");
  const ClassifierHead& head = *cfg.classifier;
  const std::size_t dim = head.weights.size() / 2;
  if (features.size() != dim)
    throw ConfigError("classifier expects " + std::to_string(dim) + " features, got " +
                      std::to_string(features.size()));
  std::array<double, 2> z{head.biases[0], head.biases[1]};
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < dim; ++i) z[k] += static_cast<double>(head.weights[k * dim + i]) * features[i];
  Classification out;
  out.probabilities = softmax2(z[0], z[1]);
  out.label = out.probabilities[1] > out.probabilities[0] ? QualityClass::kHigh : QualityClass::kLow;
  return out;
}

}  // namespace autocrop
