#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace densesr {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

// One value array in the graph. `tracked` is true when a gradient has to
// flow through this node (it is a requires_grad leaf or was produced from
// one); untracked subgraphs are never recorded on the tape, so plain
// inference runs without autodiff overhead.
template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first use
  bool requires_grad = false;
  bool tracked = false;

  int64_t size() const { return static_cast<int64_t>(data.size()); }

  T* grad_data() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad.data();
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }

  // Row-major offset of a rank-3 (c,h,w) index.
  int64_t at3(int64_t c, int64_t i, int64_t j) const {
    return (c * shape[1] + i) * shape[2] + j;
  }
};

template <typename T>
using TensorPtr = std::shared_ptr<TensorNode<T>>;

template <typename T>
TensorPtr<T> tensor_create(const Shape& shape, T fill = T(0), bool requires_grad = false) {
  for (int64_t d : shape) {
    if (d < 1) throw ShapeError("tensor_create: every extent must be >= 1, got " + shape_str(shape));
  }
  auto t = std::make_shared<TensorNode<T>>();
  t->shape = shape;
  t->data.assign(static_cast<size_t>(numel(shape)), fill);
  t->requires_grad = requires_grad;
  t->tracked = requires_grad;
  return t;
}

template <typename T>
TensorPtr<T> tensor_create(const Shape& shape, const std::vector<T>& values, bool requires_grad = false) {
  if (static_cast<int64_t>(values.size()) != numel(shape)) {
    throw ShapeError("tensor_create: " + std::to_string(values.size()) + " values for shape " + shape_str(shape));
  }
  auto t = tensor_create<T>(shape, T(0), requires_grad);
  t->data = values;
  return t;
}

// Reverse-mode tape. Operations append themselves in execution order, which
// is already topological; backward() replays the rules in reverse. Gradients
// of intermediate nodes are reset at the start of every backward pass while
// leaf gradients accumulate until explicitly cleared.
template <typename T>
class Tape {
 public:
  void record(const TensorPtr<T>& out, std::function<void()> rule) {
    entries_.push_back(Entry{out, std::move(rule)});
  }

  void backward(const TensorPtr<T>& loss, T seed = T(1)) {
    if (numel(loss->shape) != 1) {
      throw ContractError("backward: loss must be scalar, got shape " + shape_str(loss->shape));
    }
    for (auto& e : entries_) e.out->zero_grad();
    loss->grad_data()[0] += seed;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->rule();
  }

  size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  struct Entry {
    TensorPtr<T> out;
    std::function<void()> rule;
  };
  std::vector<Entry> entries_;
};

namespace detail {

template <typename T>
inline bool want_grad(const TensorPtr<T>& n) {
  return n->requires_grad || n->tracked;
}

template <typename T>
inline void check_same_shape(const TensorPtr<T>& a, const TensorPtr<T>& b, const char* op) {
  if (a->shape != b->shape) {
    throw ShapeError(std::string(op) + ": operand shapes differ, " + shape_str(a->shape) + " vs " + shape_str(b->shape));
  }
}

template <typename T>
inline TensorPtr<T> like(const Shape& shape) {
  auto t = std::make_shared<TensorNode<T>>();
  t->shape = shape;
  t->data.resize(static_cast<size_t>(numel(shape)));
  return t;
}

}  // namespace detail

template <typename T>
TensorPtr<T> add(Tape<T>* tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  detail::check_same_shape(a, b, "add");
  auto out = detail::like<T>(a->shape);
  for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] + b->data[i];
  out->tracked = detail::want_grad(a) || detail::want_grad(b);
  if (tape && out->tracked) {
    tape->record(out, [a, b, out] {
      const T* g = out->grad.data();
      if (detail::want_grad(a)) {
        T* ga = a->grad_data();
        for (size_t i = 0; i < a->data.size(); ++i) ga[i] += g[i];
      }
      if (detail::want_grad(b)) {
        T* gb = b->grad_data();
        for (size_t i = 0; i < b->data.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> mul(Tape<T>* tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  detail::check_same_shape(a, b, "mul");
  auto out = detail::like<T>(a->shape);
  for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] * b->data[i];
  out->tracked = detail::want_grad(a) || detail::want_grad(b);
  if (tape && out->tracked) {
    tape->record(out, [a, b, out] {
      const T* g = out->grad.data();
      if (detail::want_grad(a)) {
        T* ga = a->grad_data();
        for (size_t i = 0; i < a->data.size(); ++i) ga[i] += g[i] * b->data[i];
      }
      if (detail::want_grad(b)) {
        T* gb = b->grad_data();
        for (size_t i = 0; i < b->data.size(); ++i) gb[i] += g[i] * a->data[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> scale(Tape<T>* tape, const TensorPtr<T>& a, T s) {
  auto out = detail::like<T>(a->shape);
  for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] * s;
  out->tracked = detail::want_grad(a);
  if (tape && out->tracked) {
    tape->record(out, [a, out, s] {
      const T* g = out->grad.data();
      T* ga = a->grad_data();
      for (size_t i = 0; i < a->data.size(); ++i) ga[i] += g[i] * s;
    });
  }
  return out;
}

// Subgradient at exactly 0 is 0.
template <typename T>
TensorPtr<T> relu(Tape<T>* tape, const TensorPtr<T>& x) {
  auto out = detail::like<T>(x->shape);
  for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = x->data[i] > T(0) ? x->data[i] : T(0);
  out->tracked = detail::want_grad(x);
  if (tape && out->tracked) {
    tape->record(out, [x, out] {
      const T* g = out->grad.data();
      T* gx = x->grad_data();
      for (size_t i = 0; i < x->data.size(); ++i) {
        if (x->data[i] > T(0)) gx[i] += g[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> sigmoid(Tape<T>* tape, const TensorPtr<T>& x) {
  auto out = detail::like<T>(x->shape);
  for (size_t i = 0; i < out->data.size(); ++i) out->data[i] = T(1) / (T(1) + std::exp(-x->data[i]));
  out->tracked = detail::want_grad(x);
  if (tape && out->tracked) {
    tape->record(out, [x, out] {
      const T* g = out->grad.data();
      T* gx = x->grad_data();
      for (size_t i = 0; i < x->data.size(); ++i) {
        T s = out->data[i];
        gx[i] += g[i] * s * (T(1) - s);
      }
    });
  }
  return out;
}

template <typename T>
TensorPtr<T> sum_all(Tape<T>* tape, const TensorPtr<T>& x) {
  auto out = detail::like<T>(Shape{1});
  T acc = T(0);
  for (T v : x->data) acc += v;
  out->data[0] = acc;
  out->tracked = detail::want_grad(x);
  if (tape && out->tracked) {
    tape->record(out, [x, out] {
      T g = out->grad[0];
      T* gx = x->grad_data();
      for (size_t i = 0; i < x->data.size(); ++i) gx[i] += g;
    });
  }
  return out;
}

// Deterministic uniform [0,1) from raw engine output; avoids the
// implementation-defined std::uniform_real_distribution so that the same
// seed produces the same stream on every platform.
inline double uniform_unit(std::mt19937& rng) {
  return (static_cast<double>(rng()) + 0.5) / 4294967296.0;
}

inline double uniform_range(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Portable Fisher-Yates; std::shuffle's engine use is implementation-defined.
template <typename V>
void deterministic_shuffle(std::vector<V>& items, std::mt19937& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    // Rejection sampling keeps the draw unbiased without relying on
    // distribution internals.
    uint32_t bound = static_cast<uint32_t>(i);
    uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
    uint32_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(items[i - 1], items[r % bound]);
  }
}

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace densesr
