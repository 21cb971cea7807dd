#pragma once

#include "relight/models/networks.hpp"

namespace relight::models {

template <typename T>
struct LsganLosses {
  Tensor<T> gen;
  Tensor<T> disc;
};

/// Least-squares patch objectives, conditioned on (old color, new shadow):
///   disc = 1/2 E[(D(real)-1)^2] + 1/2 E[D(fake)^2]   (fake detached)
///   gen  = 1/2 E[(D(fake)-1)^2]
template <typename T>
LsganLosses<T> lsgan_losses(const PatchDiscriminator<T>& d, const Tensor<T>& real,
                            const Tensor<T>& fake, const Tensor<T>& cond_color,
                            const Tensor<T>& cond_shadow);

template <typename T>
Tensor<T> lsgan_generator_loss(const PatchDiscriminator<T>& d, const Tensor<T>& fake,
                               const Tensor<T>& cond_color, const Tensor<T>& cond_shadow);

template <typename T>
Tensor<T> lsgan_discriminator_loss(const PatchDiscriminator<T>& d, const Tensor<T>& real,
                                   const Tensor<T>& fake, const Tensor<T>& cond_color,
                                   const Tensor<T>& cond_shadow);

}  // namespace relight::models
