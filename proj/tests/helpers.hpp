#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "core/image.hpp"
#include "core/tensor.hpp"

namespace testutil {

// Deterministic synthetic grayscale content: smooth gradient + sinusoids +
// sharp-edged rectangles and disks, quantized to the 8-bit grid like a real
// capture would be.
inline densesr::GrayImage synth_image(int64_t width, int64_t height, uint64_t seed) {
  std::mt19937 rng(static_cast<uint32_t>(densesr::mix_seed(seed, 77)));
  auto u = [&rng](double lo, double hi) { return densesr::uniform_range(rng, lo, hi); };

  densesr::GrayImage img(width, height);
  const double gx = u(-0.4, 0.4) / static_cast<double>(width);
  const double gy = u(-0.4, 0.4) / static_cast<double>(height);
  const double base = u(0.3, 0.7);
  const double fx = u(2.0, 9.0), fy = u(2.0, 9.0), amp = u(0.05, 0.15);
  for (int64_t r = 0; r < height; ++r) {
    for (int64_t c = 0; c < width; ++c) {
      double v = base + gx * static_cast<double>(c) + gy * static_cast<double>(r);
      v += amp * std::sin(2.0 * 3.14159265358979323846 * (fx * c / width + fy * r / height));
      img.at(r, c) = v;
    }
  }

  const int rects = 6 + static_cast<int>(u(0, 5));
  for (int i = 0; i < rects; ++i) {
    const int64_t x0 = static_cast<int64_t>(u(0, static_cast<double>(width)));
    const int64_t y0 = static_cast<int64_t>(u(0, static_cast<double>(height)));
    const int64_t rw = static_cast<int64_t>(u(4, width / 3.0));
    const int64_t rh = static_cast<int64_t>(u(4, height / 3.0));
    const double level = u(0.05, 0.95);
    for (int64_t r = y0; r < std::min(height, y0 + rh); ++r) {
      for (int64_t c = x0; c < std::min(width, x0 + rw); ++c) img.at(r, c) = level;
    }
  }
  const int disks = 4 + static_cast<int>(u(0, 4));
  for (int i = 0; i < disks; ++i) {
    const double cx = u(0, static_cast<double>(width));
    const double cy = u(0, static_cast<double>(height));
    const double rad = u(3, width / 6.0);
    const double level = u(0.05, 0.95);
    const int64_t r0 = std::max<int64_t>(0, static_cast<int64_t>(cy - rad) - 1);
    const int64_t r1 = std::min(height, static_cast<int64_t>(cy + rad) + 2);
    for (int64_t r = r0; r < r1; ++r) {
      for (int64_t c = 0; c < width; ++c) {
        const double d = std::hypot(c - cx, r - cy);
        if (d <= rad) img.at(r, c) = level;
      }
    }
  }

  for (auto& v : img.pixels) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    v = std::floor(clamped * 255.0 + 0.5) / 255.0;  // land on the 8-bit grid
  }
  return img;
}

// Unique scratch directory under the system temp root.
inline std::string temp_dir(const std::string& tag) {
  auto path = std::filesystem::temp_directory_path() / ("densesr_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path.string();
}

}  // namespace testutil
