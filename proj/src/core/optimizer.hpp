#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace densesr {

// Mean absolute error; backward emits sign(pred-target)/n with the
// subgradient at exact ties fixed to 0.
template <typename T>
TensorPtr<T> l1_loss(Tape<T>* tape, const TensorPtr<T>& pred, const TensorPtr<T>& target) {
  detail::check_same_shape(pred, target, "l1_loss");
  auto out = detail::like<T>(Shape{1});
  const int64_t n = pred->size();
  T acc = T(0);
  for (int64_t i = 0; i < n; ++i) acc += std::abs(pred->data[i] - target->data[i]);
  out->data[0] = acc / static_cast<T>(n);
  out->tracked = detail::want_grad(pred) || detail::want_grad(target);
  if (tape && out->tracked) {
    tape->record(out, [pred, target, out, n] {
      const T g = out->grad[0] / static_cast<T>(n);
      if (detail::want_grad(pred)) {
        T* gp = pred->grad_data();
        for (int64_t i = 0; i < n; ++i) {
          const T d = pred->data[i] - target->data[i];
          if (d > T(0)) gp[i] += g;
          else if (d < T(0)) gp[i] -= g;
        }
      }
      if (detail::want_grad(target)) {
        T* gt = target->grad_data();
        for (int64_t i = 0; i < n; ++i) {
          const T d = pred->data[i] - target->data[i];
          if (d > T(0)) gt[i] -= g;
          else if (d < T(0)) gt[i] += g;
        }
      }
    });
  }
  return out;
}

struct AdamConfig {
  double lr0 = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-4;

  void validate() const {
    if (beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1) throw ConfigError("adam: betas must lie in (0,1)");
    if (epsilon <= 0) throw ConfigError("adam: epsilon must be > 0");
  }
};

// Piecewise-constant decay: lr(e) = base_lr / gamma^(#drop_epochs <= e).
struct LrSchedule {
  double base_lr = 0.001;
  std::vector<int64_t> drop_epochs = {50, 200};
  double gamma = 10.0;
};

inline double lr_at(const LrSchedule& sched, int64_t epoch) {
  int drops = 0;
  for (int64_t d : sched.drop_epochs) {
    if (d <= epoch) ++drops;
  }
  return sched.base_lr / std::pow(sched.gamma, drops);
}

// Standard Adam with bias correction:
//   m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
template <typename T>
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) { cfg.validate(); }

  void step(const std::vector<TensorPtr<T>>& params, double lr) {
    if (m_.empty()) init(params);
    ++t_;
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T corr1 = static_cast<T>(1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
    const T corr2 = static_cast<T>(1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
    const T eps = static_cast<T>(cfg_.epsilon);
    const T step_size = static_cast<T>(lr);
    for (size_t p = 0; p < params.size(); ++p) {
      auto& param = params[p];
      if (param->grad.empty()) throw ContractError("adam: parameter " + std::to_string(p) + " has no gradient");
      T* m = m_[p].data();
      T* v = v_[p].data();
      const T* g = param->grad.data();
      T* theta = param->data.data();
      const size_t n = param->data.size();
      for (size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        const T mhat = m[i] / corr1;
        const T vhat = v[i] / corr2;
        theta[i] -= step_size * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

  const AdamConfig& config() const { return cfg_; }
  int64_t step_count() const { return t_; }
  const std::vector<std::vector<T>>& first_moments() const { return m_; }
  const std::vector<std::vector<T>>& second_moments() const { return v_; }

  // Restores state saved in a checkpoint; sizes must match the parameters.
  void restore(int64_t step_count, std::vector<std::vector<T>> m, std::vector<std::vector<T>> v) {
    t_ = step_count;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  void init(const std::vector<TensorPtr<T>>& params) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t p = 0; p < params.size(); ++p) {
      m_[p].assign(params[p]->data.size(), T(0));
      v_[p].assign(params[p]->data.size(), T(0));
    }
  }

  AdamConfig cfg_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace densesr
