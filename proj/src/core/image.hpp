#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace densesr {

// 2-D grayscale image, row-major, values normalized to [0,1].
struct GrayImage {
  int64_t width = 0;
  int64_t height = 0;
  std::vector<double> pixels;
  int bit_depth = 8;  // source quantization, 8 or 16

  GrayImage() = default;
  GrayImage(int64_t w, int64_t h, double fill = 0.0, int depth = 8)
      : width(w), height(h), pixels(static_cast<size_t>(w * h), fill), bit_depth(depth) {}

  double& at(int64_t row, int64_t col) { return pixels[static_cast<size_t>(row * width + col)]; }
  double at(int64_t row, int64_t col) const { return pixels[static_cast<size_t>(row * width + col)]; }
};

// Binary PGM (P5), maxval 255 or 65535. Values come back divided by maxval;
// writing quantizes round-half-up, so grid values round-trip exactly.
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& img, const std::string& path);

GrayImage flip_horizontal(const GrayImage& img);
GrayImage flip_vertical(const GrayImage& img);

// Sorted .pgm paths directly inside a directory.
std::vector<std::string> list_pgm_files(const std::string& dir);

}  // namespace densesr
