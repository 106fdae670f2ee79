#include "core/gradcheck.hpp"

#include <cmath>

#include "core/network.hpp"
#include "core/nn_ops.hpp"
#include "core/optimizer.hpp"

namespace densesr {

double max_relative_error(const LossBuilder& build, const std::vector<TensorPtr<double>>& leaves,
                          double step) {
  for (const auto& leaf : leaves) {
    leaf->requires_grad = true;
    leaf->tracked = true;
    leaf->grad.clear();
  }
  {
    Tape<double> tape;
    auto loss = build(tape);
    tape.backward(loss);
  }

  auto eval = [&build]() {
    Tape<double> tape;
    return build(tape)->data[0];
  };

  double max_rel = 0.0;
  for (const auto& leaf : leaves) {
    for (size_t i = 0; i < leaf->data.size(); ++i) {
      const double saved = leaf->data[i];
      leaf->data[i] = saved + step;
      const double up = eval();
      leaf->data[i] = saved - step;
      const double down = eval();
      leaf->data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = leaf->grad.empty() ? 0.0 : leaf->grad[i];
      const double rel = std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

namespace {

TensorPtr<double> random_tensor(const Shape& shape, std::mt19937& rng, double lo = -2.0, double hi = 2.0) {
  auto t = tensor_create<double>(shape);
  for (auto& v : t->data) v = uniform_range(rng, lo, hi);
  return t;
}

// Keeps values away from the ReLU kink so the finite-difference step never
// crosses it.
TensorPtr<double> random_tensor_off_kink(const Shape& shape, std::mt19937& rng, double margin = 0.05) {
  auto t = random_tensor(shape, rng);
  for (auto& v : t->data) {
    if (std::abs(v) < margin) v = v < 0 ? v - margin : v + margin;
  }
  return t;
}

// Fixed random projection makes the scalar loss sensitive to every output
// component.
TensorPtr<double> projection(const Shape& shape, std::mt19937& rng) {
  auto t = tensor_create<double>(shape);
  for (auto& v : t->data) {
    const double mag = uniform_range(rng, 0.5, 1.5);
    v = uniform_unit(rng) < 0.5 ? -mag : mag;
  }
  return t;
}

GradCheckResult check(const std::string& op, const GradCheckOptions& opts, const LossBuilder& build,
                      const std::vector<TensorPtr<double>>& leaves) {
  GradCheckResult r;
  r.op = op;
  r.max_rel_err = max_relative_error(build, leaves, opts.step);
  r.pass = r.max_rel_err < opts.tolerance;
  return r;
}

struct CheckCase {
  LossBuilder build;
  std::vector<TensorPtr<double>> leaves;
};

// Composite graphs with interior ReLUs can place a preactivation within the
// finite-difference step of the kink, which makes the numeric derivative
// one-sided there. The check is only defined at generic points, so walk a
// deterministic seed sequence until one keeps clear of every kink. A broken
// backward rule fails at every seed and still surfaces.
GradCheckResult check_generic_point(const std::string& op, const GradCheckOptions& opts,
                                    const std::function<CheckCase(uint64_t)>& make_case,
                                    int max_attempts = 8) {
  GradCheckResult best;
  best.op = op;
  best.max_rel_err = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    CheckCase c = make_case(static_cast<uint64_t>(attempt));
    GradCheckResult r = check(op, opts, c.build, c.leaves);
    if (r.pass) return r;
    if (r.max_rel_err < best.max_rel_err) best = r;
  }
  return best;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& opts) {
  std::vector<GradCheckResult> results;
  std::mt19937 rng(20240917u);

  {
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({3, 4}, rng);
    auto proj = projection({3, 4}, rng);
    results.push_back(check("add", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, add(&t, a, b), proj));
    }, {a, b}));
  }
  {
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({3, 4}, rng);
    auto proj = projection({3, 4}, rng);
    results.push_back(check("mul", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, mul(&t, a, b), proj));
    }, {a, b}));
  }
  {
    auto a = random_tensor({2, 5}, rng);
    auto proj = projection({2, 5}, rng);
    results.push_back(check("scale", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, scale(&t, a, 0.73), proj));
    }, {a}));
  }
  {
    auto a = random_tensor_off_kink({4, 4}, rng);
    auto proj = projection({4, 4}, rng);
    results.push_back(check("relu", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, relu(&t, a), proj));
    }, {a}));
  }
  {
    auto a = random_tensor({4, 4}, rng);
    auto proj = projection({4, 4}, rng);
    results.push_back(check("sigmoid", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, sigmoid(&t, a), proj));
    }, {a}));
  }
  {
    auto a = random_tensor({3, 7}, rng);
    results.push_back(check("sum", opts, [&](Tape<double>& t) { return sum_all(&t, a); }, {a}));
  }
  {
    auto a = random_tensor({1, 3, 3}, rng);
    auto b = random_tensor({2, 3, 3}, rng);
    auto proj = projection({3, 3, 3}, rng);
    results.push_back(check("concat", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, concat_channels<double>(&t, {a, b}), proj));
    }, {a, b}));
  }
  {
    auto a = random_tensor({8, 3, 3}, rng);
    auto proj = projection({2, 6, 6}, rng);
    results.push_back(check("pixel_shuffle", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, pixel_shuffle(&t, a, 2), proj));
    }, {a}));
  }
  {
    Conv2dLayer<double> layer(2, 3);
    std::mt19937 wrng(7u);
    for (auto& v : layer.weight->data) v = uniform_range(wrng, -1.0, 1.0);
    for (auto& v : layer.bias->data) v = uniform_range(wrng, -0.5, 0.5);
    auto x = random_tensor({2, 5, 5}, rng);
    auto proj = projection({3, 5, 5}, rng);
    results.push_back(check("conv2d", opts, [&](Tape<double>& t) {
      return sum_all(&t, mul(&t, conv2d(&t, layer, x), proj));
    }, {x, layer.weight, layer.bias}));
  }
  {
    results.push_back(check_generic_point("dense_block", opts, [](uint64_t attempt) {
      auto block = std::make_shared<DenseBlock<double>>(DenseBlockConfig{2, 2, 2});
      std::mt19937 crng(static_cast<uint32_t>(mix_seed(11, attempt)));
      std::vector<TensorPtr<double>> leaves;
      for (auto& layer : block->layers) {
        for (auto& v : layer.weight->data) v = uniform_range(crng, -0.8, 0.8);
        for (auto& v : layer.bias->data) v = uniform_range(crng, 0.2, 0.6);
        leaves.push_back(layer.weight);
        leaves.push_back(layer.bias);
      }
      auto x = random_tensor({2, 4, 4}, crng, -1.0, 1.0);
      leaves.push_back(x);
      auto proj = projection({4, 4, 4}, crng);
      LossBuilder build = [block, x, proj](Tape<double>& t) {
        return sum_all(&t, mul(&t, dense_block_forward(&t, *block, x), proj));
      };
      return CheckCase{build, leaves};
    }));
  }
  {
    auto pred = random_tensor({3, 3}, rng);
    // Targets offset beyond the value range so no residual sits at the
    // |.| kink.
    auto target = random_tensor({3, 3}, rng, 3.0, 4.0);
    results.push_back(check("l1_loss", opts, [&](Tape<double>& t) {
      return l1_loss(&t, pred, target);
    }, {pred}));
  }
  {
    // Tiny end-to-end network: 2 blocks, m=2, k=4, scale 2, 1x4x4 input.
    results.push_back(check_generic_point("network", opts, [](uint64_t attempt) {
      auto net = std::make_shared<Network<double>>(build_network<double>(NetworkConfig::tiny(2), 3 + attempt));
      std::mt19937 crng(static_cast<uint32_t>(mix_seed(29, attempt)));
      auto x = random_tensor({1, 4, 4}, crng, 0.1, 0.9);
      auto target = tensor_create<double>({1, 8, 8}, 2.0);  // residuals never cross the L1 kink
      std::vector<TensorPtr<double>> leaves = net->params();
      leaves.push_back(x);
      LossBuilder build = [net, x, target](Tape<double>& t) {
        return l1_loss(&t, net->forward(&t, x), target);
      };
      return CheckCase{build, leaves};
    }));
  }

  return results;
}

}  // namespace densesr
