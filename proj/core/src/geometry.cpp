#include "autocrop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "autocrop/error.hpp"

namespace autocrop {

double CropRegion::coord(int j) const noexcept {
  switch (j) {
    case 0: return x1;
    case 1: return y1;
    case 2: return x2;
    default: return y2;
  }
}

double& CropRegion::coord(int j) noexcept {
  switch (j) {
    case 0: return x1;
    case 1: return y1;
    case 2: return x2;
    default: return y2;
  }
}

CropRegion canonicalize(CropRegion c) noexcept {
  if (c.x1 > c.x2) std::swap(c.x1, c.x2);
  if (c.y1 > c.y2) std::swap(c.y1, c.y2);
  return c;
}

bool is_canonical(const CropRegion& c) noexcept {
  for (double v : c.as_array())
    if (!std::isfinite(v)) return false;
  return c.x1 < c.x2 && c.y1 < c.y2;
}

namespace {

void require_valid(ImageDims dims) {
  if (!dims.valid())
    throw ConfigError("invalid image dimensions " + std::to_string(dims.width) + "x" +
                      std::to_string(dims.height));
}

// Widens [lo, hi) to `target` pixels about its center, then shifts it back
// inside [0, extent).
void widen_axis(int& lo, int& hi, int extent, int target) {
  if (hi - lo < target) {
    const int need = target - (hi - lo);
    lo -= need / 2;
    hi += need - need / 2;
  }
  if (lo < 0) {
    hi -= lo;
    lo = 0;
  }
  if (hi > extent) {
    lo -= hi - extent;
    hi = extent;
  }
  lo = std::max(lo, 0);
}

void widen_axis(double& lo, double& hi, double extent, double target) {
  if (hi - lo < target) {
    const double center = 0.5 * (lo + hi);
    lo = center - 0.5 * target;
    hi = center + 0.5 * target;
  }
  if (lo < 0.0) {
    hi -= lo;
    lo = 0.0;
  }
  if (hi > extent) {
    lo -= hi - extent;
    hi = extent;
  }
  lo = std::max(lo, 0.0);
}

}  // namespace

CropRegion full_frame(ImageDims dims) {
  require_valid(dims);
  const double m = dims.max_side();
  return {0.0, 0.0, dims.width / m, dims.height / m};
}

CropRegion normalize(const std::array<double, 4>& rect_px, ImageDims dims) {
  require_valid(dims);
  for (double v : rect_px)
    if (!std::isfinite(v)) throw ConfigError("non-finite pixel coordinate");
  const double m = dims.max_side();
  CropRegion c = canonicalize({rect_px[0] / m, rect_px[1] / m, rect_px[2] / m, rect_px[3] / m});
  if (!(c.x1 < c.x2 && c.y1 < c.y2)) throw DegenerateRegionError("crop region has zero area");
  return c;
}

CropRegion normalize(const PixelRect& rect, ImageDims dims) {
  return normalize(std::array<double, 4>{static_cast<double>(rect.x1), static_cast<double>(rect.y1),
                    static_cast<double>(rect.x2), static_cast<double>(rect.y2)},
                   dims);
}

PixelRect denormalize(const CropRegion& region, ImageDims dims) {
  require_valid(dims);
  const CropRegion c = canonicalize(region);
  const double m = dims.max_side();
  auto to_px = [m](double v, int hi) {
    if (!std::isfinite(v)) return v > 0 ? hi : 0;
    const double r = std::floor(v * m + 0.5);
    return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(hi)));
  };
  PixelRect r{to_px(c.x1, dims.width), to_px(c.y1, dims.height), to_px(c.x2, dims.width),
              to_px(c.y2, dims.height)};
  auto target = [](int extent) { return extent >= kMinCropSide ? kMinCropSide : 1; };
  widen_axis(r.x1, r.x2, dims.width, target(dims.width));
  widen_axis(r.y1, r.y2, dims.height, target(dims.height));
  return r;
}

CropRegion clamp_to_image(const CropRegion& raw, ImageDims dims) {
  require_valid(dims);
  const double m = dims.max_side();
  const double w = dims.width / m;
  const double h = dims.height / m;
  CropRegion c = canonicalize(raw);
  auto clean = [](double v, double hi) { return std::isfinite(v) ? std::clamp(v, 0.0, hi) : (v > 0 ? hi : 0.0); };
  c.x1 = clean(c.x1, w);
  c.x2 = clean(c.x2, w);
  c.y1 = clean(c.y1, h);
  c.y2 = clean(c.y2, h);
  auto target = [m](int extent) {
    return (extent >= kMinCropSide ? kMinCropSide : 1) / m;
  };
  widen_axis(c.x1, c.x2, w, target(dims.width));
  widen_axis(c.y1, c.y2, h, target(dims.height));
  return c;
}

double iou(const CropRegion& a, const CropRegion& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::min(1.0, inter / uni);
}

double bde(const CropRegion& p, const CropRegion& m, BdeMode mode) noexcept {
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double d = p.coord(j) - m.coord(j);
    sum += mode == BdeMode::kSquared ? d * d : std::abs(d);
  }
  return sum / 4.0;
}

}  // namespace autocrop
