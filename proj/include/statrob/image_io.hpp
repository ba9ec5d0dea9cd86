#ifndef STATROB_IMAGE_IO_HPP
#define STATROB_IMAGE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace statrob {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, intensities 0-255

  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
  std::uint8_t& at(int row, int col) {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

GrayImage make_image(int width, int height, std::uint8_t fill = 0);

struct GroundTruth {
  int width = 0;
  int height = 0;
  std::vector<int> disparities;    // row-major
  std::vector<std::uint8_t> valid;  // 1 = valid; raw value 0 loads as invalid
  int scale = 1;
  int clamped = 0;  // disparities above D-1 clamped on load

  int at(int row, int col) const {
    return disparities[static_cast<std::size_t>(row) * width + col];
  }
  bool is_valid(int row, int col) const {
    return valid[static_cast<std::size_t>(row) * width + col] != 0;
  }
};

// Parses binary (P5) and ASCII (P2) PGM with maxval <= 255. Comments are
// skipped. Malformed input raises ParseError carrying the byte offset;
// maxval > 255 raises Unsupported.
GrayImage load_pgm(const std::string& path);
GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes);

// Bit-exact P5 writer: "P5 <w> <h> <maxval>\n" followed by raw rows.
void save_pgm(const GrayImage& image, const std::string& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);

// Middlebury-style scaled disparity image: disparity = round(raw / scale),
// raw 0 marks an invalid pixel, values above D-1 are clamped and counted.
GroundTruth load_ground_truth(const std::string& path, int scale,
                              int disparity_levels);
GroundTruth ground_truth_from_image(const GrayImage& raw, int scale,
                                    int disparity_levels);

// Independent N(0, sigma^2) per pixel, rounded to nearest and clamped to
// [0, 255]. Deterministic per seed.
GrayImage add_gaussian_noise(const GrayImage& image, double sigma,
                             std::uint64_t seed);

struct Stereogram {
  GrayImage left;
  GrayImage right;
  GroundTruth truth;
};

struct StereogramSpec {
  int width = 32;
  int height = 32;
  int disparity_levels = 16;
  int region_shift = 3;   // disparity of the shifted rectangle
  int region_row = 8;     // top-left of the rectangle
  int region_col = 8;
  int region_height = 16;
  int region_width = 16;
  std::uint64_t seed = 1;
};

// Random binary-noise stereo pair: a rectangular foreground region shifted
// by a known disparity over a zero-disparity background. Ground truth is
// exact by construction; occluded background columns are marked invalid.
Stereogram make_random_dot_stereogram(const StereogramSpec& spec);

}  // namespace statrob

#endif
