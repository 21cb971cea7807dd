#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "relight/nn/conv.hpp"
#include "relight/nn/tensor.hpp"

namespace relight::nn {

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

/// Parameter container with hierarchical names ("enc.0.weight").
template <typename T>
class Module {
 public:
  virtual ~Module() = default;
  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  std::vector<NamedParam<T>> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

 protected:
  Tensor<T> add_parameter(std::string name, Tensor<T> t);
  template <typename M>
  M& add_module(std::string name, std::unique_ptr<M> m) {
    M& ref = *m;
    children_.emplace_back(std::move(name), std::move(m));
    return ref;
  }

 private:
  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) const;

  std::vector<NamedParam<T>> params_;
  std::vector<std::pair<std::string, std::unique_ptr<Module>>> children_;
};

/// Convolution with weight (O,C,k...) and bias (O). Uniform init with
/// bound 1/sqrt(fan_in) for both.
template <typename T>
class ConvLayer : public Module<T> {
 public:
  ConvLayer(int in_channels, int out_channels, const ConvGeom& geom, bool is3d,
            std::mt19937_64& rng);

  Tensor<T> forward(const Tensor<T>& x) const { return conv_forward(x, weight_, bias_, geom_); }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }
  const ConvGeom& geom() const { return geom_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

 private:
  int in_, out_;
  ConvGeom geom_;
  Tensor<T> weight_, bias_;
};

extern template class Module<float>;
extern template class Module<double>;
extern template class ConvLayer<float>;
extern template class ConvLayer<double>;

}  // namespace relight::nn
