#pragma once

#include <cmath>

#include "hoaxdet/core/rng.hpp"
#include "hoaxdet/core/tensor.hpp"

namespace hoaxdet::init {

template <typename Scalar>
void uniform(Tensor<Scalar>& t, double limit, Rng& rng) {
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(rng.uniform(-limit, limit));
}

/// Glorot/Xavier uniform: limit sqrt(6 / (fan_in + fan_out)).
template <typename Scalar>
void glorot_uniform(Tensor<Scalar>& t, Index fan_in, Index fan_out, Rng& rng) {
  uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template <typename Scalar>
Tensor<Scalar> parameter(Shape shape) {
  Tensor<Scalar> t(std::move(shape));
  t.set_requires_grad(true);
  return t;
}

}  // namespace hoaxdet::init
