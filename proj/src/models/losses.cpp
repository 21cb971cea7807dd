#include "relight/models/losses.hpp"

namespace relight::models {

template <typename T>
Tensor<T> lsgan_generator_loss(const PatchDiscriminator<T>& d, const Tensor<T>& fake,
                               const Tensor<T>& cond_color, const Tensor<T>& cond_shadow) {
  return nn::mul_scalar(nn::mse_const(d.forward(fake, cond_color, cond_shadow), T(1)), T(0.5));
}

template <typename T>
Tensor<T> lsgan_discriminator_loss(const PatchDiscriminator<T>& d, const Tensor<T>& real,
                                   const Tensor<T>& fake, const Tensor<T>& cond_color,
                                   const Tensor<T>& cond_shadow) {
  const Tensor<T> c = nn::detach(cond_shadow);
  const Tensor<T> r = nn::mse_const(d.forward(real, cond_color, c), T(1));
  const Tensor<T> f = nn::mse_const(d.forward(nn::detach(fake), cond_color, c), T(0));
  return nn::mul_scalar(nn::add(r, f), T(0.5));
}

template <typename T>
LsganLosses<T> lsgan_losses(const PatchDiscriminator<T>& d, const Tensor<T>& real,
                            const Tensor<T>& fake, const Tensor<T>& cond_color,
                            const Tensor<T>& cond_shadow) {
  return {lsgan_generator_loss(d, fake, cond_color, cond_shadow),
          lsgan_discriminator_loss(d, real, fake, cond_color, cond_shadow)};
}

#define RELIGHT_LOSSES(T)                                                                       \
  template LsganLosses<T> lsgan_losses(const PatchDiscriminator<T>&, const Tensor<T>&,        \
                                       const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> lsgan_generator_loss(const PatchDiscriminator<T>&, const Tensor<T>&,     \
                                          const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> lsgan_discriminator_loss(const PatchDiscriminator<T>&, const Tensor<T>&, \
                                              const Tensor<T>&, const Tensor<T>&,             \
                                              const Tensor<T>&);
RELIGHT_LOSSES(float)
RELIGHT_LOSSES(double)
#undef RELIGHT_LOSSES

}  // namespace relight::models
