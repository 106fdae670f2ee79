#pragma once

#include <string>

#include "core/image.hpp"

namespace densesr {

enum class ResampleKind { kNearest, kBilinear, kBicubic };

struct ResampleMethod {
  ResampleKind kind = ResampleKind::kBicubic;
  double a = -0.5;        // bicubic sharpness (Catmull-Rom family)
  bool antialias = true;  // widen the kernel when downsampling

  static ResampleMethod nearest() { return {ResampleKind::kNearest, -0.5, true}; }
  static ResampleMethod bilinear() { return {ResampleKind::kBilinear, -0.5, true}; }
  static ResampleMethod bicubic() { return {ResampleKind::kBicubic, -0.5, true}; }
};

const char* resample_kind_name(ResampleKind kind);
ResampleKind resample_kind_from_name(const std::string& name);

// Short tag recorded in dataset manifests, e.g. "bicubic-a-0.5-aa".
std::string resample_tag(const ResampleMethod& method);

// Separable resize with pixel-center alignment: output pixel i samples
// source coordinate (i+0.5)*(in/out)-0.5. Borders are clamped, weights are
// normalized to unity, and the result is clamped to [0,1].
GrayImage resample(const GrayImage& img, int64_t out_w, int64_t out_h, const ResampleMethod& method);

// Fraction of HR pixels surviving a 1/scale downsample: 1/scale^2.
double retained_fraction(int64_t scale);

}  // namespace densesr
