#include "cdcnet/data/pnm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace cdcnet {

namespace {

constexpr std::size_t kMaxExtent = 1u << 15;

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<unsigned char>& b) : b_(b) {}

  void expect_magic(const char* magic) {
    if (b_.size() < 2 || b_[0] != magic[0] || b_[1] != magic[1]) {
      throw DataError(std::string("netpbm: expected magic '") + magic + "' at byte 0");
    }
    pos_ = 2;
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < b_.size() && b_[pos_] >= '0' && b_[pos_] <= '9') {
      v = v * 10 + (b_[pos_] - '0');
      if (v > kMaxExtent * kMaxExtent) throw DataError(std::string("netpbm: ") + what + " overflows at byte " + std::to_string(start));
      ++pos_;
    }
    if (pos_ == start) throw DataError(std::string("netpbm: malformed header, expected ") + what + " at byte " + std::to_string(start));
    return v;
  }

  /// Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) {
      throw DataError("netpbm: malformed header, expected whitespace at byte " + std::to_string(pos_));
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

Tensor<float> decode(const std::vector<unsigned char>& bytes, const char* magic, std::size_t channels) {
  HeaderReader r(bytes);
  r.expect_magic(magic);
  const std::size_t w = r.number("width"), h = r.number("height"), maxval = r.number("maxval");
  if (w == 0 || h == 0 || w > kMaxExtent || h > kMaxExtent) {
    throw DataError("netpbm: dimensions " + std::to_string(w) + "x" + std::to_string(h) + " out of range");
  }
  if (maxval != 255) throw DataError("netpbm: only maxval 255 is supported, got " + std::to_string(maxval));
  const std::size_t start = r.raster_start();
  const std::size_t need = w * h * channels;
  if (bytes.size() < start + need) {
    throw DataError("netpbm: truncated raster, expected " + std::to_string(need) + " bytes at byte " +
                    std::to_string(start) + ", file has " + std::to_string(bytes.size()));
  }
  Tensor<float> out(Shape{1, channels, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c) {
        out[(c * h + y) * w + x] = static_cast<float>(bytes[start + (y * w + x) * channels + c]) / 255.0f;
      }
  return out;
}

std::vector<unsigned char> encode(const Tensor<float>& t, const char* magic, std::size_t channels) {
  const Shape s = t.shape();
  if (s.n != 1 || s.c != channels) {
    throw ShapeError(std::string("netpbm: ") + magic + " needs shape [1," + std::to_string(channels) + ",H,W], got " + s.str());
  }
  const std::string header = std::string(magic) + "\n" + std::to_string(s.w) + " " + std::to_string(s.h) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + s.numel());
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x)
      for (std::size_t c = 0; c < channels; ++c) {
        const float v = std::clamp(t[(c * s.h + y) * s.w + x], 0.0f, 1.0f);
        out.push_back(static_cast<unsigned char>(std::lround(v * 255.0f)));
      }
  return out;
}

}  // namespace

Tensor<float> decode_ppm(const std::vector<unsigned char>& bytes) { return decode(bytes, "P6", 3); }
Tensor<float> decode_pgm(const std::vector<unsigned char>& bytes) { return decode(bytes, "P5", 1); }
std::vector<unsigned char> encode_ppm(const Tensor<float>& rgb) { return encode(rgb, "P6", 3); }
std::vector<unsigned char> encode_pgm(const Tensor<float>& gray) { return encode(gray, "P5", 1); }

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

Tensor<float> load_ppm(const std::string& path) { return decode_ppm(read_file(path)); }
Tensor<float> load_pgm(const std::string& path) { return decode_pgm(read_file(path)); }
void save_ppm(const Tensor<float>& rgb, const std::string& path) { write_file(path, encode_ppm(rgb)); }
void save_pgm(const Tensor<float>& gray, const std::string& path) { write_file(path, encode_pgm(gray)); }

}  // namespace cdcnet
