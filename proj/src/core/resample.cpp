#include "core/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace densesr {

const char* resample_kind_name(ResampleKind kind) {
  switch (kind) {
    case ResampleKind::kNearest:
      return "nearest";
    case ResampleKind::kBilinear:
      return "bilinear";
    case ResampleKind::kBicubic:
      return "bicubic";
  }
  return "unknown";
}

ResampleKind resample_kind_from_name(const std::string& name) {
  if (name == "nearest") return ResampleKind::kNearest;
  if (name == "bilinear") return ResampleKind::kBilinear;
  if (name == "bicubic") return ResampleKind::kBicubic;
  throw ConfigError("unknown resample method '" + name + "'");
}

std::string resample_tag(const ResampleMethod& method) {
  std::string tag = resample_kind_name(method.kind);
  if (method.kind == ResampleKind::kBicubic) {
    tag += "-a" + std::to_string(method.a).substr(0, 4);
  }
  if (method.antialias) tag += "-aa";
  return tag;
}

namespace {

double cubic_kernel(double t, double a) {
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

double tent_kernel(double t) {
  t = std::abs(t);
  return t < 1.0 ? 1.0 - t : 0.0;
}

struct Contrib {
  int64_t first = 0;                // leftmost source index (pre-clamp)
  std::vector<double> weights;      // normalized
};

// Precomputed per-output-pixel source taps for one axis.
std::vector<Contrib> make_contribs(int64_t in, int64_t out, const ResampleMethod& method) {
  const double step = static_cast<double>(in) / static_cast<double>(out);
  const bool widen = method.antialias && step > 1.0;
  const double filterscale = widen ? step : 1.0;
  double support = 0.0;
  switch (method.kind) {
    case ResampleKind::kNearest:
      support = 0.0;
      break;
    case ResampleKind::kBilinear:
      support = 1.0 * filterscale;
      break;
    case ResampleKind::kBicubic:
      support = 2.0 * filterscale;
      break;
  }

  std::vector<Contrib> contribs(static_cast<size_t>(out));
  for (int64_t i = 0; i < out; ++i) {
    const double center = (static_cast<double>(i) + 0.5) * step - 0.5;
    Contrib& c = contribs[static_cast<size_t>(i)];
    if (method.kind == ResampleKind::kNearest) {
      c.first = static_cast<int64_t>(std::floor(center + 0.5));
      c.weights = {1.0};
      continue;
    }
    int64_t lo = static_cast<int64_t>(std::floor(center - support)) + 1;
    int64_t hi = static_cast<int64_t>(std::floor(center + support));
    if (hi < lo) hi = lo;
    c.first = lo;
    c.weights.resize(static_cast<size_t>(hi - lo + 1));
    double total = 0.0;
    for (int64_t j = lo; j <= hi; ++j) {
      const double t = (static_cast<double>(j) - center) / filterscale;
      const double w = method.kind == ResampleKind::kBilinear ? tent_kernel(t) : cubic_kernel(t, method.a);
      c.weights[static_cast<size_t>(j - lo)] = w;
      total += w;
    }
    if (total != 0.0) {
      for (double& w : c.weights) w /= total;
    }
  }
  return contribs;
}

int64_t clamp_index(int64_t v, int64_t n) { return std::clamp<int64_t>(v, 0, n - 1); }

}  // namespace

GrayImage resample(const GrayImage& img, int64_t out_w, int64_t out_h, const ResampleMethod& method) {
  if (out_w < 1 || out_h < 1) throw ConfigError("resample: output dims must be >= 1");

  const auto xc = make_contribs(img.width, out_w, method);
  const auto yc = make_contribs(img.height, out_h, method);

  // Horizontal pass, then vertical.
  std::vector<double> mid(static_cast<size_t>(img.height * out_w));
  for (int64_t r = 0; r < img.height; ++r) {
    const double* src = img.pixels.data() + r * img.width;
    double* dst = mid.data() + r * out_w;
    for (int64_t i = 0; i < out_w; ++i) {
      const Contrib& c = xc[static_cast<size_t>(i)];
      double acc = 0.0;
      for (size_t k = 0; k < c.weights.size(); ++k) {
        acc += c.weights[k] * src[clamp_index(c.first + static_cast<int64_t>(k), img.width)];
      }
      dst[i] = acc;
    }
  }

  GrayImage out(out_w, out_h, 0.0, img.bit_depth);
  for (int64_t i = 0; i < out_h; ++i) {
    const Contrib& c = yc[static_cast<size_t>(i)];
    for (int64_t j = 0; j < out_w; ++j) {
      double acc = 0.0;
      for (size_t k = 0; k < c.weights.size(); ++k) {
        acc += c.weights[k] * mid[static_cast<size_t>(clamp_index(c.first + static_cast<int64_t>(k), img.height) * out_w + j)];
      }
      out.at(i, j) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

double retained_fraction(int64_t scale) {
  if (scale < 1) throw ConfigError("retained_fraction: scale must be >= 1");
  return 1.0 / (static_cast<double>(scale) * static_cast<double>(scale));
}

}  // namespace densesr
