#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace densesr {

struct GradCheckResult {
  std::string op;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckOptions {
  double step = 1e-4;       // central-difference step
  double tolerance = 1e-5;  // max relative error allowed
};

// Loss builder: reconstructs the scalar loss from the current leaf values.
// The harness differentiates it analytically once, then component-by-
// component with central differences; both paths share only the forward
// code, so a broken backward rule cannot hide.
using LossBuilder = std::function<TensorPtr<double>(Tape<double>&)>;

double max_relative_error(const LossBuilder& build, const std::vector<TensorPtr<double>>& leaves,
                          double step);

// Every differentiable op plus a tiny end-to-end network
// (2 blocks, m=2, k=4, scale 2 on a 1x4x4 input).
std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& opts = {});

}  // namespace densesr
