#include "statrob/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>

#include "statrob/errors.hpp"
#include "statrob/rng.hpp"

namespace statrob {

GrayImage make_image(int width, int height, std::uint8_t fill) {
  if (width < 1 || height < 1)
    throw InvalidInput("image dimensions must be positive");
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

namespace {

class PgmCursor {
 public:
  explicit PgmCursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool eof() const { return pos_ >= bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }
  std::uint8_t take() { return bytes_[pos_++]; }

  void skip_space_and_comments() {
    while (!eof()) {
      const std::uint8_t c = peek();
      if (c == '#') {
        while (!eof() && take() != '\n') {
        }
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  // Reads a nonnegative decimal integer token.
  long read_int(const char* what) {
    skip_space_and_comments();
    if (eof()) throw ParseError(std::string("unexpected end of file reading ") + what, pos_);
    if (!std::isdigit(peek()))
      throw ParseError(std::string("expected digit for ") + what, pos_);
    long value = 0;
    while (!eof() && std::isdigit(peek())) {
      value = value * 10 + (take() - '0');
      if (value > 1000000000L)
        throw ParseError(std::string(what) + " out of range", pos_);
    }
    return value;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes) {
  PgmCursor cur(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("not a PGM file (expected P2 or P5 magic)", 0);
  const bool binary = bytes[1] == '5';
  cur.take();
  cur.take();

  const long width = cur.read_int("width");
  const long height = cur.read_int("height");
  const long maxval = cur.read_int("maxval");
  if (width < 1 || height < 1)
    throw ParseError("dimensions must be positive", cur.pos());
  if (maxval < 1) throw ParseError("maxval must be positive", cur.pos());
  if (maxval > 255)
    throw Unsupported("PGM maxval " + std::to_string(maxval) +
                      " not supported (must be <= 255)");

  GrayImage img = make_image(static_cast<int>(width), static_cast<int>(height));
  const std::size_t count = img.pixels.size();
  if (binary) {
    if (cur.eof() || !std::isspace(cur.peek()))
      throw ParseError("expected single whitespace after maxval", cur.pos());
    cur.take();
    for (std::size_t i = 0; i < count; ++i) {
      if (cur.eof())
        throw ParseError("pixel payload truncated", cur.pos());
      const std::uint8_t v = cur.take();
      if (v > maxval)
        throw ParseError("pixel value exceeds maxval", cur.pos() - 1);
      img.pixels[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = cur.read_int("pixel");
      if (v > maxval) throw ParseError("pixel value exceeds maxval", cur.pos());
      img.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5 " + std::to_string(image.width) + " " +
                             std::to_string(image.height) + " 255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void save_pgm(const GrayImage& image, const std::string& path) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

GroundTruth ground_truth_from_image(const GrayImage& raw, int scale,
                                    int disparity_levels) {
  if (scale < 1) throw InvalidInput("ground truth scale must be >= 1");
  if (disparity_levels < 1) throw InvalidInput("disparity_levels must be >= 1");
  GroundTruth gt;
  gt.width = raw.width;
  gt.height = raw.height;
  gt.scale = scale;
  gt.disparities.resize(raw.pixels.size());
  gt.valid.resize(raw.pixels.size());
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    const int v = raw.pixels[i];
    if (v == 0) {
      gt.disparities[i] = 0;
      gt.valid[i] = 0;
      continue;
    }
    int d = static_cast<int>(std::llround(static_cast<double>(v) / scale));
    if (d > disparity_levels - 1) {
      d = disparity_levels - 1;
      ++gt.clamped;
    }
    gt.disparities[i] = d;
    gt.valid[i] = 1;
  }
  return gt;
}

GroundTruth load_ground_truth(const std::string& path, int scale,
                              int disparity_levels) {
  return ground_truth_from_image(load_pgm(path), scale, disparity_levels);
}

GrayImage add_gaussian_noise(const GrayImage& image, double sigma,
                             std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidInput("noise sigma must be >= 0");
  GrayImage out = image;
  std::mt19937_64 rng(splitmix64(seed));
  for (auto& p : out.pixels) {
    const double z = sigma * standard_normal(rng);
    const long v = std::lround(static_cast<double>(p) + z);
    p = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
  }
  return out;
}

Stereogram make_random_dot_stereogram(const StereogramSpec& spec) {
  const int w = spec.width, h = spec.height, d = spec.region_shift;
  if (w < 1 || h < 1) throw InvalidInput("stereogram dimensions must be positive");
  if (spec.disparity_levels < 2 || spec.disparity_levels > w)
    throw InvalidInput("need 2 <= disparity_levels <= width");
  if (d < 0 || d >= spec.disparity_levels)
    throw InvalidInput("region shift must lie in [0, disparity_levels)");
  if (spec.region_row < 0 || spec.region_col < 0 || spec.region_height < 1 ||
      spec.region_width < 1 || spec.region_row + spec.region_height > h ||
      spec.region_col + spec.region_width > w)
    throw InvalidInput("region rectangle out of image bounds");
  if (spec.region_col < d)
    throw InvalidInput("region must start at column >= shift");

  std::mt19937_64 rng(splitmix64(spec.seed));
  const auto noise_bit = [&rng]() -> std::uint8_t {
    return (rng() >> 63) ? 255 : 0;
  };

  Stereogram s;
  s.left = make_image(w, h);
  for (auto& p : s.left.pixels) p = noise_bit();

  const int r0 = spec.region_row, r1 = spec.region_row + spec.region_height;
  const int c0 = spec.region_col, c1 = spec.region_col + spec.region_width;

  // Background at disparity 0, foreground rectangle shifted left by d in the
  // right view. Revealed columns behind the rectangle get fresh texture so
  // the zero-disparity match does not leak through the foreground.
  s.right = s.left;
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) s.right.at(r, c - d) = s.left.at(r, c);
  for (int r = r0; r < r1; ++r)
    for (int c = std::max(c0, c1 - d); c < c1; ++c) s.right.at(r, c) = noise_bit();

  GroundTruth gt;
  gt.width = w;
  gt.height = h;
  gt.scale = 1;
  gt.disparities.assign(static_cast<std::size_t>(w) * h, 0);
  gt.valid.assign(static_cast<std::size_t>(w) * h, 1);
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c)
      gt.disparities[static_cast<std::size_t>(r) * w + c] = d;
    // Background strip occluded by the shifted rectangle.
    for (int c = c0 - d; c < c0; ++c)
      gt.valid[static_cast<std::size_t>(r) * w + c] = 0;
  }
  s.truth = std::move(gt);
  return s;
}

}  // namespace statrob
