#pragma once

#include <cstdint>
#include <vector>

#include "relight/nn/module.hpp"

namespace relight::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

/// Bias-corrected Adam over a fixed parameter list.
template <typename T>
class Adam {
 public:
  Adam(std::vector<NamedParam<T>> params, AdamConfig cfg = {});

  /// One update from the current gradients. Parameters that have no
  /// gradient buffer keep their values and moments.
  void step();
  void zero_grad();

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return t_; }
  const std::vector<NamedParam<T>>& params() const { return params_; }

  // Moment buffers, exposed for checkpointing.
  std::vector<std::vector<T>>& m() { return m_; }
  std::vector<std::vector<T>>& v() { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  std::vector<NamedParam<T>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  std::int64_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace relight::nn
