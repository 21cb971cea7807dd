#include "relight/nn/adam.hpp"

#include <cmath>

namespace relight::nn {

template <typename T>
Adam<T>::Adam(std::vector<NamedParam<T>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), T(0));
    v_.emplace_back(p.tensor.numel(), T(0));
  }
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(cfg_.beta1);
  const T b2 = static_cast<T>(cfg_.beta2);
  const T lr = static_cast<T>(cfg_.lr);
  const T eps = static_cast<T>(cfg_.eps);
  const T ibc1 = static_cast<T>(1.0 / bc1);
  const T ibc2 = static_cast<T>(1.0 / bc2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T>& p = params_[i].tensor;
    if (!p.has_grad()) continue;
    const std::vector<T>& g = p.grad();
    std::vector<T>& m = m_[i];
    std::vector<T>& v = v_[i];
    T* w = p.ptr();
    for (std::size_t k = 0; k < g.size(); ++k) {
      m[k] = b1 * m[k] + (T(1) - b1) * g[k];
      v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
      const T mh = m[k] * ibc1;
      const T vh = v[k] * ibc2;
      w[k] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template class Adam<float>;
template class Adam<double>;

}  // namespace relight::nn
