#pragma once

#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace densesr {

// 3x3 convolution, stride 1, zero padding 1: spatial dims are preserved.
template <typename T>
struct Conv2dLayer {
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  TensorPtr<T> weight;  // [out, in, 3, 3]
  TensorPtr<T> bias;    // [out]

  Conv2dLayer() = default;
  Conv2dLayer(int64_t in, int64_t out) : in_channels(in), out_channels(out) {
    weight = tensor_create<T>({out, in, 3, 3});
    bias = tensor_create<T>({out});
  }

  int64_t param_count() const { return out_channels * (in_channels * 9 + 1); }
};

namespace detail {

// Copies a (c,h,w) tensor into a zero-padded (c,h+2,w+2) buffer.
template <typename T>
std::vector<T> pad1(const T* x, int64_t c, int64_t h, int64_t w) {
  std::vector<T> out(static_cast<size_t>(c * (h + 2) * (w + 2)), T(0));
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t i = 0; i < h; ++i) {
      const T* src = x + (ch * h + i) * w;
      T* dst = out.data() + (ch * (h + 2) + i + 1) * (w + 2) + 1;
      std::copy(src, src + w, dst);
    }
  }
  return out;
}

// dst(h,w) += 9-tap correlation of one padded source plane (h+2,w+2) with
// w9. The j loop is independent per element, so it vectorizes.
template <typename T>
void conv3x3_accumulate_plane(T* dst, const T* src_padded, const T w9[9], int64_t h, int64_t w) {
  const int64_t wp = w + 2;
  for (int64_t i = 0; i < h; ++i) {
    const T* r0 = src_padded + i * wp;
    const T* r1 = r0 + wp;
    const T* r2 = r1 + wp;
    T* out = dst + i * w;
    for (int64_t j = 0; j < w; ++j) {
      out[j] += w9[0] * r0[j] + w9[1] * r0[j + 1] + w9[2] * r0[j + 2] +
                w9[3] * r1[j] + w9[4] * r1[j + 1] + w9[5] * r1[j + 2] +
                w9[6] * r2[j] + w9[7] * r2[j + 1] + w9[8] * r2[j + 2];
    }
  }
}

// acc9 += per-tap dot products of a gradient plane against a padded source
// plane. Lane-split accumulators keep the reduction vectorizable without
// reassociating across lanes, and the summation order is fixed.
template <typename T>
void conv3x3_weight_grad_plane(T acc9[9], const T* grad, const T* src_padded, int64_t h, int64_t w) {
  constexpr int64_t kLanes = 8;
  const int64_t wp = w + 2;
  T lanes[9][kLanes] = {};
  for (int64_t i = 0; i < h; ++i) {
    const T* g = grad + i * w;
    const T* rows[3] = {src_padded + i * wp, src_padded + (i + 1) * wp, src_padded + (i + 2) * wp};
    int64_t j = 0;
    for (; j + kLanes <= w; j += kLanes) {
      for (int dy = 0; dy < 3; ++dy) {
        const T* r = rows[dy] + j;
        const T* gj = g + j;
        for (int64_t l = 0; l < kLanes; ++l) {
          lanes[dy * 3 + 0][l] += gj[l] * r[l];
          lanes[dy * 3 + 1][l] += gj[l] * r[l + 1];
          lanes[dy * 3 + 2][l] += gj[l] * r[l + 2];
        }
      }
    }
    for (; j < w; ++j) {
      for (int dy = 0; dy < 3; ++dy) {
        const T* r = rows[dy];
        acc9[dy * 3 + 0] += g[j] * r[j];
        acc9[dy * 3 + 1] += g[j] * r[j + 1];
        acc9[dy * 3 + 2] += g[j] * r[j + 2];
      }
    }
  }
  for (int t = 0; t < 9; ++t) {
    for (int64_t l = 0; l < kLanes; ++l) acc9[t] += lanes[t][l];
  }
}

}  // namespace detail

// out(o,i,j) = bias(o) + sum_{c,dy,dx} w(o,c,dy,dx) * xpad(c,i+dy,j+dx)
template <typename T>
TensorPtr<T> conv2d(Tape<T>* tape, const Conv2dLayer<T>& layer, const TensorPtr<T>& x) {
  if (x->shape.size() != 3 || x->shape[0] != layer.in_channels) {
    throw ShapeError("conv2d: expected input [" + std::to_string(layer.in_channels) +
                     ",h,w], got " + shape_str(x->shape));
  }
  const int64_t cin = layer.in_channels, cout = layer.out_channels;
  const int64_t h = x->shape[1], w = x->shape[2];
  const int64_t wp = w + 2;

  auto xpad = std::make_shared<std::vector<T>>(detail::pad1(x->data.data(), cin, h, w));
  auto out = detail::like<T>(Shape{cout, h, w});

  const T* wts = layer.weight->data.data();
  const T* bias = layer.bias->data.data();
  const T* xp = xpad->data();
  T* o = out->data.data();
  const int64_t plane = (h + 2) * wp;
  for (int64_t oc = 0; oc < cout; ++oc) {
    T* oplane = o + oc * h * w;
    std::fill(oplane, oplane + h * w, bias[oc]);
    for (int64_t c = 0; c < cin; ++c) {
      detail::conv3x3_accumulate_plane(oplane, xp + c * plane, wts + (oc * cin + c) * 9, h, w);
    }
  }

  TensorPtr<T> weight = layer.weight;
  TensorPtr<T> biasT = layer.bias;
  out->tracked = detail::want_grad(x) || detail::want_grad(weight) || detail::want_grad(biasT);
  if (tape && out->tracked) {
    tape->record(out, [x, weight, biasT, out, xpad, cin, cout, h, w, wp, plane] {
      const T* g = out->grad.data();
      const T* xp = xpad->data();
      if (detail::want_grad(biasT)) {
        T* gb = biasT->grad_data();
        for (int64_t oc = 0; oc < cout; ++oc) {
          const T* gplane = g + oc * h * w;
          T acc = T(0);
          for (int64_t i = 0; i < h * w; ++i) acc += gplane[i];
          gb[oc] += acc;
        }
      }
      if (detail::want_grad(weight)) {
        T* gw = weight->grad_data();
        for (int64_t oc = 0; oc < cout; ++oc) {
          const T* gplane = g + oc * h * w;
          for (int64_t c = 0; c < cin; ++c) {
            T acc9[9] = {};
            detail::conv3x3_weight_grad_plane(acc9, gplane, xp + c * plane, h, w);
            T* dst = gw + (oc * cin + c) * 9;
            for (int t = 0; t < 9; ++t) dst[t] += acc9[t];
          }
        }
      }
      if (detail::want_grad(x)) {
        // Input gradient is the correlation of the padded output gradient
        // with the flipped kernels (channels transposed).
        const T* wts = weight->data.data();
        std::vector<T> gpad = detail::pad1(g, cout, h, w);
        std::vector<T> gx(static_cast<size_t>(cin * h * w), T(0));
        for (int64_t c = 0; c < cin; ++c) {
          T* gxplane = gx.data() + c * h * w;
          for (int64_t oc = 0; oc < cout; ++oc) {
            const T* wk = wts + (oc * cin + c) * 9;
            T flipped[9];
            for (int t = 0; t < 9; ++t) flipped[t] = wk[8 - t];
            detail::conv3x3_accumulate_plane(gxplane, gpad.data() + oc * plane, flipped, h, w);
          }
        }
        T* dst = x->grad_data();
        for (size_t i = 0; i < gx.size(); ++i) dst[i] += gx[i];
      }
    });
  }
  return out;
}

// Stacks inputs along the channel axis, list order preserved.
template <typename T>
TensorPtr<T> concat_channels(Tape<T>* tape, std::span<const TensorPtr<T>> xs) {
  if (xs.empty()) throw ShapeError("concat_channels: empty input list");
  const int64_t h = xs[0]->shape[1], w = xs[0]->shape[2];
  int64_t ctotal = 0;
  for (const auto& x : xs) {
    if (x->shape.size() != 3 || x->shape[1] != h || x->shape[2] != w) {
      throw ShapeError("concat_channels: spatial dims differ, " + shape_str(xs[0]->shape) + " vs " + shape_str(x->shape));
    }
    ctotal += x->shape[0];
  }
  auto out = detail::like<T>(Shape{ctotal, h, w});
  T* o = out->data.data();
  bool tracked = false;
  for (const auto& x : xs) {
    std::copy(x->data.begin(), x->data.end(), o);
    o += x->data.size();
    tracked = tracked || detail::want_grad(x);
  }
  out->tracked = tracked;
  if (tape && tracked) {
    std::vector<TensorPtr<T>> inputs(xs.begin(), xs.end());
    tape->record(out, [inputs, out] {
      const T* g = out->grad.data();
      for (const auto& x : inputs) {
        if (detail::want_grad(x)) {
          T* gx = x->grad_data();
          for (size_t i = 0; i < x->data.size(); ++i) gx[i] += g[i];
        }
        g += x->data.size();
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> concat_channels(Tape<T>* tape, std::initializer_list<TensorPtr<T>> xs) {
  std::vector<TensorPtr<T>> v(xs);
  return concat_channels(tape, std::span<const TensorPtr<T>>(v));
}

// Upscale factor and resulting channel count of one shuffle.
struct ShuffleSpec {
  int64_t r = 2;
  int64_t c = 1;
};

namespace detail {

// Index map of the shuffle: out(ch, i*r+dy, j*r+dx) = in(ch*r^2 + dy*r + dx, i, j).
template <typename T>
void shuffle_values(const T* in, T* out, int64_t c, int64_t r, int64_t h, int64_t w, bool forward) {
  for (int64_t ch = 0; ch < c; ++ch) {
    for (int64_t dy = 0; dy < r; ++dy) {
      for (int64_t dx = 0; dx < r; ++dx) {
        const int64_t cin = ch * r * r + dy * r + dx;
        for (int64_t i = 0; i < h; ++i) {
          const int64_t src_off = (cin * h + i) * w;
          const int64_t dst_off = (ch * h * r + i * r + dy) * (w * r) + dx;
          if (forward) {
            for (int64_t j = 0; j < w; ++j) out[dst_off + j * r] = in[src_off + j];
          } else {
            for (int64_t j = 0; j < w; ++j) out[src_off + j] = in[dst_off + j * r];
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
TensorPtr<T> pixel_shuffle(Tape<T>* tape, const TensorPtr<T>& x, const ShuffleSpec& spec) {
  const int64_t r = spec.r;
  if (x->shape.size() != 3 || r < 1 || x->shape[0] != spec.c * r * r) {
    throw ShapeError("pixel_shuffle: input " + shape_str(x->shape) + " does not factor as " +
                     std::to_string(spec.c) + "*" + std::to_string(r) + "^2 channels");
  }
  const int64_t c = spec.c, h = x->shape[1], w = x->shape[2];
  auto out = detail::like<T>(Shape{c, h * r, w * r});
  detail::shuffle_values(x->data.data(), out->data.data(), c, r, h, w, true);
  out->tracked = detail::want_grad(x);
  if (tape && out->tracked) {
    tape->record(out, [x, out, c, r, h, w] {
      if (!detail::want_grad(x)) return;
      std::vector<T> gin(x->data.size(), T(0));
      detail::shuffle_values(out->grad.data(), gin.data(), c, r, h, w, false);
      T* gx = x->grad_data();
      for (size_t i = 0; i < gin.size(); ++i) gx[i] += gin[i];
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> pixel_shuffle(Tape<T>* tape, const TensorPtr<T>& x, int64_t r) {
  if (r < 1 || x->shape.empty() || x->shape[0] % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: channel count " + shape_str(x->shape) + " not divisible by r^2=" + std::to_string(r * r));
  }
  return pixel_shuffle(tape, x, ShuffleSpec{r, x->shape[0] / (r * r)});
}

// Exact inverse of pixel_shuffle.
template <typename T>
TensorPtr<T> pixel_unshuffle(Tape<T>* tape, const TensorPtr<T>& x, int64_t r) {
  if (x->shape.size() != 3 || r < 1 || x->shape[1] % r != 0 || x->shape[2] % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial dims of " + shape_str(x->shape) + " not divisible by r=" + std::to_string(r));
  }
  const int64_t c = x->shape[0], h = x->shape[1] / r, w = x->shape[2] / r;
  auto out = detail::like<T>(Shape{c * r * r, h, w});
  detail::shuffle_values(x->data.data(), out->data.data(), c, r, h, w, false);
  out->tracked = detail::want_grad(x);
  if (tape && out->tracked) {
    tape->record(out, [x, out, c, r, h, w] {
      if (!detail::want_grad(x)) return;
      std::vector<T> gin(x->data.size(), T(0));
      detail::shuffle_values(out->grad.data(), gin.data(), c, r, h, w, true);
      T* gx = x->grad_data();
      for (size_t i = 0; i < gin.size(); ++i) gx[i] += gin[i];
    });
  }
  return out;
}

// m conv layers with growth rate k; layer i consumes the block input
// concatenated with every preceding layer output, the block output
// concatenates the m layer outputs only (m*k channels).
struct DenseBlockConfig {
  int64_t m = 8;
  int64_t k = 16;
  int64_t in_channels = 128;
};

template <typename T>
struct DenseBlock {
  DenseBlockConfig cfg;
  std::vector<Conv2dLayer<T>> layers;

  DenseBlock() = default;
  explicit DenseBlock(const DenseBlockConfig& c) : cfg(c) {
    if (c.m < 1 || c.k < 1) throw ShapeError("dense block: m and k must be >= 1");
    layers.reserve(static_cast<size_t>(c.m));
    for (int64_t i = 0; i < c.m; ++i) {
      layers.emplace_back(c.in_channels + i * c.k, c.k);
    }
  }

  // Structural channel-count invariant, also used to vet hand-built layer lists.
  void validate() const {
    if (static_cast<int64_t>(layers.size()) != cfg.m) {
      throw ShapeError("dense block: expected " + std::to_string(cfg.m) + " layers, got " + std::to_string(layers.size()));
    }
    for (int64_t i = 0; i < cfg.m; ++i) {
      const auto& l = layers[static_cast<size_t>(i)];
      if (l.in_channels != cfg.in_channels + i * cfg.k || l.out_channels != cfg.k) {
        throw ShapeError("dense block: layer " + std::to_string(i + 1) + " has channels " +
                         std::to_string(l.in_channels) + "->" + std::to_string(l.out_channels) +
                         ", expected " + std::to_string(cfg.in_channels + i * cfg.k) + "->" + std::to_string(cfg.k));
      }
    }
  }
};

template <typename T>
TensorPtr<T> dense_block_forward(Tape<T>* tape, const DenseBlock<T>& block, const TensorPtr<T>& x) {
  block.validate();
  if (x->shape.size() != 3 || x->shape[0] != block.cfg.in_channels) {
    throw ShapeError("dense block: expected input [" + std::to_string(block.cfg.in_channels) + ",h,w], got " + shape_str(x->shape));
  }
  std::vector<TensorPtr<T>> feats;  // x, L1, ..., L_{i-1}
  feats.push_back(x);
  std::vector<TensorPtr<T>> outputs;
  outputs.reserve(block.layers.size());
  for (const auto& layer : block.layers) {
    TensorPtr<T> input = feats.size() == 1 ? feats[0] : concat_channels<T>(tape, feats);
    TensorPtr<T> li = relu(tape, conv2d(tape, layer, input));
    outputs.push_back(li);
    feats.push_back(li);
  }
  if (outputs.size() == 1) return outputs[0];
  return concat_channels<T>(tape, std::span<const TensorPtr<T>>(outputs));
}

}  // namespace densesr
