#pragma once

#include <array>

namespace autocrop {

/// Pixel dimensions of an image. Both sides are at least one pixel.
struct ImageDims {
  int width = 0;
  int height = 0;

  int max_side() const noexcept { return width > height ? width : height; }
  bool valid() const noexcept { return width >= 1 && height >= 1; }
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Integer pixel rectangle, half-open: columns [x1, x2), rows [y1, y2).
struct PixelRect {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const noexcept { return x2 - x1; }
  int height() const noexcept { return y2 - y1; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Crop rectangle in normalized units: pixel coordinates divided by the
/// longer image side, shared by both axes. Coordinate j in [0, 4) addresses
/// (x1, y1, x2, y2) in that order.
struct CropRegion {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  double coord(int j) const noexcept;
  double& coord(int j) noexcept;
  std::array<double, 4> as_array() const noexcept { return {x1, y1, x2, y2}; }

  friend bool operator==(const CropRegion&, const CropRegion&) = default;
};

/// Smallest crop side produced by denormalize on axes long enough to hold it.
inline constexpr int kMinCropSide = 8;

/// Swaps inverted coordinate pairs so that x1 <= x2 and y1 <= y2.
CropRegion canonicalize(CropRegion c) noexcept;

/// True when every coordinate is finite and x1 < x2, y1 < y2.
bool is_canonical(const CropRegion& c) noexcept;

/// Region covering the whole image: (0, 0, W/m, H/m) with m = max(W, H).
CropRegion full_frame(ImageDims dims);

/// Pixel rectangle -> normalized region. Inverted inputs are repaired by
/// swapping. Throws DegenerateRegionError on zero area and ConfigError on
/// invalid dims or non-finite input.
CropRegion normalize(const std::array<double, 4>& rect_px, ImageDims dims);
CropRegion normalize(const PixelRect& rect, ImageDims dims);

/// Normalized region -> pixel window inside the image. Coordinates are
/// rounded half-up and clamped; on every axis at least kMinCropSide long the
/// window is widened symmetrically to kMinCropSide pixels and shifted back
/// inside the image. Never fails.
PixelRect denormalize(const CropRegion& c, ImageDims dims);

/// Canonicalizes a raw cascade state and clamps it into the image, widening
/// collapsed axes the same way denormalize does. Always returns a canonical
/// region.
CropRegion clamp_to_image(const CropRegion& raw, ImageDims dims);

/// Intersection over union of two continuous rectangles; 0 when disjoint.
double iou(const CropRegion& a, const CropRegion& b) noexcept;

enum class BdeMode {
  kSquared,   ///< sum of squared edge displacements / 4
  kAbsolute,  ///< sum of absolute edge displacements / 4
};

/// Boundary displacement error between a predicted and a reference region.
double bde(const CropRegion& p, const CropRegion& m, BdeMode mode = BdeMode::kSquared) noexcept;

}  // namespace autocrop
