#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autocrop/geometry.hpp"

namespace autocrop {

inline constexpr int kImageChannels = 3;

/// RGB raster, row-major interleaved, values in [0, 1].
class Image {
 public:
  Image() = default;
  /// Black image. Throws ConfigError on non-positive dimensions.
  Image(int width, int height);
  /// Adopts `rgb`, which must hold width*height*3 values.
  Image(int width, int height, std::vector<float> rgb);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  ImageDims dims() const noexcept { return {width_, height_}; }
  bool empty() const noexcept { return pixels_.empty(); }

  float at(int x, int y, int c) const noexcept {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * kImageChannels + c];
  }
  float& at(int x, int y, int c) noexcept {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * kImageChannels + c];
  }

  std::span<const float> pixels() const noexcept { return pixels_; }
  std::span<float> pixels() noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> pixels_;
};

/// Binary PPM (P6, maxval 255). Throws ParseError with the failing byte
/// offset on anything else.
Image decode_ppm(std::string_view bytes);
std::string encode_ppm(const Image& img);

Image load_ppm(const std::filesystem::path& path);
void save_ppm(const Image& img, const std::filesystem::path& path);

/// Copies a pixel window. The window must lie inside the image.
Image crop_window(const Image& img, const PixelRect& window);

/// Copies the window denormalize(c, img.dims()).
Image crop_extract(const Image& img, const CropRegion& c);

/// Box-filter downscale so the longer side equals `cap`; identity when the
/// image already fits. Aspect ratio is preserved up to rounding of the
/// shorter side. Throws ConfigError when cap < 32.
Image downscale_cap(const Image& img, int cap);

/// Mirrors columns.
Image hflip(const Image& img);

/// Zero-pads to at least min_width x min_height, keeping the content centered.
Image pad_to(const Image& img, int min_width, int min_height);

}  // namespace autocrop
