#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/resample.hpp"

namespace densesr {

struct EvalConfig {
  int64_t scale = 2;
  std::optional<ResampleKind> baseline;  // set for interpolation baselines
  const Network<float>* model = nullptr; // set for model evaluation
  std::string method_name;               // row label; defaults from the method
  int64_t eval_patch = 0;                // 0 = whole images, else patch side
  int64_t threads = 1;
};

using EvalDiagnostic = std::function<void(const std::string& item, const std::string& message)>;

// Shared degradation path: every evaluation (and training pair) synthesizes
// LR with this exact call.
GrayImage degrade(const GrayImage& hr, int64_t scale);

// Upscales one LR image with either a baseline kernel or the model.
GrayImage upscale(const GrayImage& lr, int64_t out_w, int64_t out_h, const EvalConfig& cfg);

// Runs over every .pgm in hr_dir (sorted by filename): synthesize LR,
// upscale, score against the original. Per-image failures are reported via
// the diagnostic callback and skipped.
std::vector<EvalRow> evaluate_corpus(const std::string& hr_dir, const EvalConfig& cfg,
                                     const EvalDiagnostic& diag = nullptr);

}  // namespace densesr
