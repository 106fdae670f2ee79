#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/nn_ops.hpp"
#include "core/tensor.hpp"

namespace densesr {

// Architecture hyperparameters. feat1 must equal m*k so the feature
// extractor chains into the dense-block trunk without adapters.
struct NetworkConfig {
  int64_t scale = 2;       // 2, 4 or 8
  int64_t num_blocks = 12; // dense blocks in the trunk
  int64_t m = 8;           // conv layers per block
  int64_t k = 16;          // growth rate
  int64_t feat0 = 64;      // first low-level conv channels
  int64_t feat1 = 128;     // second low-level conv channels == trunk width

  int64_t trunk_channels() const { return m * k; }

  int64_t upsample_stages() const {
    int64_t stages = 0;
    for (int64_t s = scale; s > 1; s /= 2) ++stages;
    return stages;
  }

  void validate() const {
    if (scale < 2 || (scale & (scale - 1)) != 0 || scale > 8) {
      throw ConfigError("scale must be 2, 4 or 8, got " + std::to_string(scale));
    }
    if (num_blocks < 1 || m < 1 || k < 1 || feat0 < 1) {
      throw ConfigError("block/layer counts must be >= 1");
    }
    if (feat1 != trunk_channels()) {
      throw ConfigError("feat1 (" + std::to_string(feat1) + ") must equal m*k (" + std::to_string(trunk_channels()) + ")");
    }
  }

  static NetworkConfig paper(int64_t scale) { return NetworkConfig{scale, 12, 8, 16, 64, 128}; }
  // Desk-scale preset; the paper configuration needs multi-day GPU budgets.
  static NetworkConfig small(int64_t scale) { return NetworkConfig{scale, 3, 4, 8, 16, 32}; }
  static NetworkConfig tiny(int64_t scale) { return NetworkConfig{scale, 2, 2, 4, 4, 8}; }

  bool operator==(const NetworkConfig&) const = default;
};

struct LayerInfo {
  std::string name;
  std::string kind;  // "conv", "relu", "shuffle", "sigmoid"
  int64_t in_channels = 0;
  int64_t out_channels = 0;
};

// conv(1->feat0)+relu -> conv(feat0->feat1)+relu -> num_blocks dense blocks
// -> per x2 stage: conv(T->4T) -> shuffle(r=2) -> relu -> conv(T->1) -> sigmoid.
template <typename T>
class Network {
 public:
  explicit Network(const NetworkConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    const int64_t trunk = cfg.trunk_channels();
    feat0_ = Conv2dLayer<T>(1, cfg.feat0);
    feat1_ = Conv2dLayer<T>(cfg.feat0, cfg.feat1);
    for (int64_t b = 0; b < cfg.num_blocks; ++b) {
      blocks_.emplace_back(DenseBlockConfig{cfg.m, cfg.k, trunk});
    }
    for (int64_t s = 0; s < cfg.upsample_stages(); ++s) {
      upsample_.emplace_back(trunk, 4 * trunk);
    }
    output_ = Conv2dLayer<T>(trunk, 1);
  }

  const NetworkConfig& config() const { return cfg_; }

  // lr_image [1,h,w] -> [1, h*scale, w*scale], values strictly in (0,1).
  TensorPtr<T> forward(Tape<T>* tape, const TensorPtr<T>& lr_image) const {
    if (lr_image->shape.size() != 3 || lr_image->shape[0] != 1) {
      throw ShapeError("forward: expected [1,h,w] input, got " + shape_str(lr_image->shape));
    }
    TensorPtr<T> t = relu(tape, conv2d(tape, feat0_, lr_image));
    t = relu(tape, conv2d(tape, feat1_, t));
    for (const auto& block : blocks_) t = dense_block_forward(tape, block, t);
    for (const auto& up : upsample_) {
      t = conv2d(tape, up, t);
      t = pixel_shuffle(tape, t, ShuffleSpec{2, cfg_.trunk_channels()});
      t = relu(tape, t);
    }
    t = conv2d(tape, output_, t);
    return sigmoid(tape, t);
  }

  // Parameters in fixed order; names are the checkpoint keys.
  std::vector<std::pair<std::string, TensorPtr<T>>> named_params() const {
    std::vector<std::pair<std::string, TensorPtr<T>>> out;
    auto push = [&out](const std::string& name, const Conv2dLayer<T>& l) {
      out.emplace_back(name + ".weight", l.weight);
      out.emplace_back(name + ".bias", l.bias);
    };
    push("feat0", feat0_);
    push("feat1", feat1_);
    for (size_t b = 0; b < blocks_.size(); ++b) {
      for (size_t i = 0; i < blocks_[b].layers.size(); ++i) {
        push("block" + std::to_string(b) + ".conv" + std::to_string(i), blocks_[b].layers[i]);
      }
    }
    for (size_t s = 0; s < upsample_.size(); ++s) push("up" + std::to_string(s), upsample_[s]);
    push("out", output_);
    return out;
  }

  std::vector<TensorPtr<T>> params() const {
    std::vector<TensorPtr<T>> out;
    for (auto& [name, p] : named_params()) out.push_back(p);
    return out;
  }

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : params()) n += p->size();
    return n;
  }

  void set_requires_grad(bool on) {
    for (auto& p : params()) {
      p->requires_grad = on;
      p->tracked = on;
    }
  }

  void zero_grad() {
    for (auto& p : params()) p->zero_grad();
  }

  // Flattened layer ledger for structural checks.
  std::vector<LayerInfo> describe() const {
    std::vector<LayerInfo> out;
    auto conv = [&out](const std::string& name, const Conv2dLayer<T>& l) {
      out.push_back({name, "conv", l.in_channels, l.out_channels});
    };
    conv("feat0", feat0_);
    out.push_back({"feat0.relu", "relu", cfg_.feat0, cfg_.feat0});
    conv("feat1", feat1_);
    out.push_back({"feat1.relu", "relu", cfg_.feat1, cfg_.feat1});
    for (size_t b = 0; b < blocks_.size(); ++b) {
      for (size_t i = 0; i < blocks_[b].layers.size(); ++i) {
        conv("block" + std::to_string(b) + ".conv" + std::to_string(i), blocks_[b].layers[i]);
      }
    }
    const int64_t trunk = cfg_.trunk_channels();
    for (size_t s = 0; s < upsample_.size(); ++s) {
      conv("up" + std::to_string(s), upsample_[s]);
      out.push_back({"up" + std::to_string(s) + ".shuffle", "shuffle", 4 * trunk, trunk});
      out.push_back({"up" + std::to_string(s) + ".relu", "relu", trunk, trunk});
    }
    conv("out", output_);
    out.push_back({"out.sigmoid", "sigmoid", 1, 1});
    return out;
  }

  const std::vector<DenseBlock<T>>& blocks() const { return blocks_; }
  const std::vector<Conv2dLayer<T>>& upsample_convs() const { return upsample_; }

  // Deep copy sharing nothing; used for per-thread training replicas.
  Network<T> clone() const {
    Network<T> copy(cfg_);
    auto src = params();
    auto dst = copy.params();
    for (size_t i = 0; i < src.size(); ++i) {
      dst[i]->data = src[i]->data;
      dst[i]->requires_grad = src[i]->requires_grad;
      dst[i]->tracked = src[i]->tracked;
    }
    return copy;
  }

 private:
  NetworkConfig cfg_;
  Conv2dLayer<T> feat0_, feat1_;
  std::vector<DenseBlock<T>> blocks_;
  std::vector<Conv2dLayer<T>> upsample_;
  Conv2dLayer<T> output_;
};

// Uniform init in [-sqrt(6/fan_in), +sqrt(6/fan_in)], fan_in = in*9, zero
// biases. Weights are drawn in parameter-ledger order so a seed pins every
// value.
template <typename T>
Network<T> build_network(const NetworkConfig& cfg, uint64_t seed) {
  Network<T> net(cfg);
  std::mt19937 rng(static_cast<uint32_t>(mix_seed(seed, 0)));
  for (auto& [name, p] : net.named_params()) {
    if (name.ends_with(".bias")) continue;  // zero-initialised already
    const int64_t fan_in = p->shape[1] * 9;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : p->data) v = static_cast<T>(uniform_range(rng, -bound, bound));
  }
  return net;
}

}  // namespace densesr
