#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "agnostic/tensor.hpp"

namespace agnostic {

// 8-bit grayscale raster.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, height * width
};

// Malformed input file; the message names the file and, where it applies,
// the line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

// [H, W] or [1, H, W] values in [0, 1] -> round(255 v), clamped.
GrayImage to_gray(const Tensor& t);
// -> [1, H, W] with v = p / 255.
Tensor image_from_gray(const GrayImage& image);
// -> [H, W] with v = p / 255.
Tensor plane_from_gray(const GrayImage& image);

}  // namespace agnostic
