#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hoaxdet/core/tensor.hpp"

namespace hoaxdet {

struct AdamOptions {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// Moment buffers for a fixed, ordered list of parameters.
template <typename Scalar>
struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<RowMatrix<Scalar>> m;
  std::vector<RowMatrix<Scalar>> v;
};

/// One bias-corrected Adam update using the gradients stored on `params`.
/// Parameters without a gradient buffer are treated as having zero gradient.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, std::span<Tensor<Scalar>* const> params) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(RowMatrix<Scalar>::Zero(p->matrix().rows(), p->matrix().cols()));
      state.v.push_back(RowMatrix<Scalar>::Zero(p->matrix().rows(), p->matrix().cols()));
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam: optimizer tracks " + std::to_string(state.m.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].rows() != params[i]->matrix().rows() || state.m[i].cols() != params[i]->matrix().cols()) {
      throw ShapeError("adam: moment buffer does not match parameter " + shape_str(params[i]->shape()));
    }
  }

  ++state.step;
  const auto& o = state.options;
  const double correction1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  const auto b1 = static_cast<Scalar>(o.beta1), b2 = static_cast<Scalar>(o.beta2);
  const auto lr = static_cast<Scalar>(o.learning_rate);
  const auto eps = static_cast<Scalar>(o.epsilon);
  const auto c1 = static_cast<Scalar>(correction1), c2 = static_cast<Scalar>(correction2);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<Scalar>& p = *params[i];
    if (!p.has_grad()) continue;
    auto g = p.grad().array();
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    p.matrix().array() -= lr * (m / c1) / ((v / c2).sqrt() + eps);
  }
}

}  // namespace hoaxdet
