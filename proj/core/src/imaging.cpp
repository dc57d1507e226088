#include "autocrop/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "autocrop/error.hpp"

namespace autocrop {

Image::Image(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ConfigError("image dimensions must be positive");
  pixels_.assign(static_cast<std::size_t>(width) * height * kImageChannels, 0.0f);
}

Image::Image(int width, int height, std::vector<float> rgb)
    : width_(width), height_(height), pixels_(std::move(rgb)) {
  if (width < 1 || height < 1) throw ConfigError("image dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height * kImageChannels)
    throw ConfigError("pixel buffer size does not match image dimensions");
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const unsigned char c = static_cast<unsigned char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1 << 24)) throw ParseError(std::string("PPM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PPM header: expected ") + what, start);
    return static_cast<int>(v);
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_ppm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a PNM file", 0);
  if (bytes[1] != '6')
    throw ParseError(std::string("unsupported PNM variant P") + bytes[1] + ", only P6 is accepted", 1);
  HeaderReader reader(bytes);
  reader.advance(2);
  const std::size_t width_at = reader.pos();
  const int width = reader.read_uint("width");
  const int height = reader.read_uint("height");
  if (width < 1 || height < 1) throw ParseError("PPM dimensions must be positive", width_at);
  const std::size_t maxval_at = reader.pos();
  const int maxval = reader.read_uint("maxval");
  if (maxval != 255)
    throw ParseError("unsupported PPM maxval " + std::to_string(maxval) + ", expected 255", maxval_at);
  if (reader.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos()])))
    throw ParseError("PPM header must end with a single whitespace byte", reader.pos());
  reader.advance(1);

  const std::size_t need = static_cast<std::size_t>(width) * height * kImageChannels;
  const std::size_t start = reader.pos();
  if (bytes.size() - start < need)
    throw ParseError("truncated PPM payload: expected " + std::to_string(need) + " bytes, found " +
                         std::to_string(bytes.size() - start),
                     bytes.size());
  std::vector<float> rgb(need);
  for (std::size_t i = 0; i < need; ++i)
    rgb[i] = static_cast<float>(static_cast<unsigned char>(bytes[start + i])) / 255.0f;
  return Image(width, height, std::move(rgb));
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  const auto px = img.pixels();
  out.reserve(out.size() + px.size());
  for (float v : px) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
  }
  return out;
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path.string());
  const std::string bytes = encode_ppm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Image crop_window(const Image& img, const PixelRect& w) {
  if (w.x1 < 0 || w.y1 < 0 || w.x2 > img.width() || w.y2 > img.height() || w.width() < 1 ||
      w.height() < 1)
    throw ConfigError("crop window outside image");
  Image out(w.width(), w.height());
  const std::size_t row = static_cast<std::size_t>(w.width()) * kImageChannels;
  for (int y = 0; y < w.height(); ++y) {
    const float* src = &img.pixels()[(static_cast<std::size_t>(w.y1 + y) * img.width() + w.x1) * kImageChannels];
    std::copy(src, src + row, &out.pixels()[static_cast<std::size_t>(y) * row]);
  }
  return out;
}

Image crop_extract(const Image& img, const CropRegion& c) {
  return crop_window(img, denormalize(c, img.dims()));
}

namespace {

struct Tap {
  int index;
  double weight;
};

// Source taps for each output cell of a box filter mapping `src` cells onto
// `dst` cells. Weights of one cell sum to src/dst.
std::vector<std::vector<Tap>> box_taps(int src, int dst) {
  std::vector<std::vector<Tap>> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int o = 0; o < dst; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int i = static_cast<int>(std::floor(lo)); i < src && i < hi; ++i) {
      const double w = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
      if (w > 0.0) taps[o].push_back({i, w});
    }
  }
  return taps;
}

}  // namespace

Image downscale_cap(const Image& img, int cap) {
  if (cap < 32) throw ConfigError("downscale cap must be at least 32");
  const int longest = img.dims().max_side();
  if (longest <= cap) return img;
  const double f = static_cast<double>(cap) / longest;
  const int ow = img.width() >= img.height() ? cap : std::max(1, static_cast<int>(std::floor(img.width() * f + 0.5)));
  const int oh = img.height() > img.width() ? cap : std::max(1, static_cast<int>(std::floor(img.height() * f + 0.5)));

  const auto xt = box_taps(img.width(), ow);
  const auto yt = box_taps(img.height(), oh);
  const double sx = static_cast<double>(img.width()) / ow;
  const double sy = static_cast<double>(img.height()) / oh;

  // Horizontal pass into a double buffer, then vertical.
  std::vector<double> tmp(static_cast<std::size_t>(img.height()) * ow * kImageChannels);
  for (int y = 0; y < img.height(); ++y)
    for (int ox = 0; ox < ow; ++ox)
      for (int c = 0; c < kImageChannels; ++c) {
        double acc = 0.0;
        for (const Tap& t : xt[ox]) acc += t.weight * img.at(t.index, y, c);
        tmp[(static_cast<std::size_t>(y) * ow + ox) * kImageChannels + c] = acc / sx;
      }
  Image out(ow, oh);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int c = 0; c < kImageChannels; ++c) {
        double acc = 0.0;
        for (const Tap& t : yt[oy]) acc += t.weight * tmp[(static_cast<std::size_t>(t.index) * ow + ox) * kImageChannels + c];
        out.at(ox, oy, c) = static_cast<float>(acc / sy);
      }
  return out;
}

Image hflip(const Image& img) {
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < kImageChannels; ++c) out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
  return out;
}

Image pad_to(const Image& img, int min_width, int min_height) {
  const int w = std::max(img.width(), min_width);
  const int h = std::max(img.height(), min_height);
  if (w == img.width() && h == img.height()) return img;
  Image out(w, h);
  const int ox = (w - img.width()) / 2;
  const int oy = (h - img.height()) / 2;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < kImageChannels; ++c) out.at(x + ox, y + oy, c) = img.at(x, y, c);
  return out;
}

}  // namespace autocrop
