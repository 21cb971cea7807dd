#include "relight/nn/module.hpp"

#include <cmath>

namespace relight::nn {

template <typename T>
Tensor<T> Module<T>::add_parameter(std::string name, Tensor<T> t) {
  t.set_requires_grad(true);
  params_.push_back({std::move(name), t});
  return t;
}

template <typename T>
void Module<T>::collect(const std::string& prefix, std::vector<NamedParam<T>>& out) const {
  for (const auto& p : params_) out.push_back({prefix + p.name, p.tensor});
  for (const auto& [name, child] : children_) child->collect(prefix + name + ".", out);
}

template <typename T>
std::vector<NamedParam<T>> Module<T>::parameters() const {
  std::vector<NamedParam<T>> out;
  collect("", out);
  return out;
}

template <typename T>
std::size_t Module<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.numel();
  return n;
}

template <typename T>
void Module<T>::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

template <typename T>
ConvLayer<T>::ConvLayer(int in_channels, int out_channels, const ConvGeom& geom, bool is3d,
                        std::mt19937_64& rng)
    : in_(in_channels), out_(out_channels), geom_(geom) {
  if (in_channels <= 0 || out_channels <= 0) throw ValidationError("conv channels must be positive");
  Shape ws = is3d ? Shape{out_channels, in_channels, geom.kernel[0], geom.kernel[1], geom.kernel[2]}
                  : Shape{out_channels, in_channels, geom.kernel[1], geom.kernel[2]};
  const std::size_t fan_in = numel(ws) / static_cast<std::size_t>(out_channels);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<T> w(numel(ws));
  for (T& v : w) v = static_cast<T>(u(rng));
  std::vector<T> b(static_cast<std::size_t>(out_channels));
  for (T& v : b) v = static_cast<T>(u(rng));
  weight_ = this->add_parameter("weight", Tensor<T>(ws, std::move(w)));
  bias_ = this->add_parameter("bias", Tensor<T>({out_channels}, std::move(b)));
}

template class Module<float>;
template class Module<double>;
template class ConvLayer<float>;
template class ConvLayer<double>;

}  // namespace relight::nn
