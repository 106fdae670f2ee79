#pragma once

#include <string>
#include <vector>

#include "core/image.hpp"

namespace densesr {

struct MetricConfig {
  double dynamic_range = 1.0;  // images are stored normalized
  int window = 11;             // SSIM Gaussian window side
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// 10*log10(L^2/MSE); +infinity when the images are identical.
double psnr(const GrayImage& x, const GrayImage& y, const MetricConfig& cfg = {});

// Mean SSIM over fully interior window positions, Gaussian-weighted moments.
double ssim(const GrayImage& x, const GrayImage& y, const MetricConfig& cfg = {});

struct EvalRow {
  std::string image_id;
  std::string method;
  int64_t scale = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MethodAggregate {
  std::string method;
  int64_t scale = 0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  int64_t count = 0;
};

// Per-method/per-scale arithmetic means, in first-appearance order.
std::vector<MethodAggregate> aggregate(const std::vector<EvalRow>& rows);

struct MethodDelta {
  std::string method_a;
  std::string method_b;
  double mean_psnr_delta = 0.0;
  double mean_ssim_delta = 0.0;
};

// Cross-scale mean deltas for every ordered method pair. All methods must
// cover the same scale set.
std::vector<MethodDelta> cross_deltas(const std::vector<MethodAggregate>& aggregates);

// CSV I/O. Row and aggregate files keep full double precision; the delta
// table is the display artifact and rounds PSNR to two decimals and SSIM to
// three.
void write_rows_csv(const std::vector<EvalRow>& rows, const std::string& path);
void write_aggregate_csv(const std::vector<MethodAggregate>& aggs, const std::string& path);
std::vector<MethodAggregate> read_aggregate_csv(const std::string& path);
void write_delta_csv(const std::vector<MethodDelta>& deltas, const std::string& path);

}  // namespace densesr
