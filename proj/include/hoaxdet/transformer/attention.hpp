#pragma once

#include <cmath>
#include <vector>

#include "hoaxdet/core/ops.hpp"

namespace hoaxdet::tfm {

using ad::Var;

template <typename S>
struct AttentionResult {
  Var<S> output;   // [n x d_v]
  Var<S> weights;  // [n x m]
};

/// softmax(Q K^T / sqrt(d_k)) V. Keys flagged in `key_padding` get zero
/// weight.
template <typename S>
AttentionResult<S> scaled_dot_product_attention(const Var<S>& q, const Var<S>& k, const Var<S>& v,
                                                 const std::vector<bool>& key_padding) {
  const auto& qm = q.matrix();
  const auto& km = k.matrix();
  if (qm.cols() != km.cols() || km.rows() != v.matrix().rows() ||
      static_cast<Index>(key_padding.size()) != km.rows()) {
    throw ShapeError("attention: Q " + shape_str(q.shape()) + ", K " + shape_str(k.shape()) + ", V " +
                     shape_str(v.shape()) + " and mask of " + std::to_string(key_padding.size()) +
                     " keys are inconsistent");
  }
  const S inv_sqrt_dk = S(1) / std::sqrt(static_cast<S>(qm.cols()));
  auto scores = ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt_dk);
  auto weights = ad::masked_softmax(scores, key_padding);
  return {ad::matmul(weights, v), weights};
}

template <typename S>
struct AttentionWeights {
  Var<S> query_kernel, query_bias;
  Var<S> key_kernel, key_bias;
  Var<S> value_kernel, value_bias;
  Var<S> output_kernel, output_bias;
};

/// Per-head projections, attention per head, concatenation and output
/// projection. Shape [n x h] in and out.
template <typename S>
Var<S> multi_head_attention(const Var<S>& x, Index num_heads, const AttentionWeights<S>& w,
                            const std::vector<bool>& key_padding) {
  const Index hidden = x.shape().back();
  if (num_heads < 1 || hidden % num_heads != 0) {
    throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(num_heads) +
                      " heads");
  }
  const Index head_dim = hidden / num_heads;
  auto q = ad::affine(x, w.query_kernel, w.query_bias);
  auto k = ad::affine(x, w.key_kernel, w.key_bias);
  auto v = ad::affine(x, w.value_kernel, w.value_bias);
  std::vector<Var<S>> heads;
  heads.reserve(static_cast<std::size_t>(num_heads));
  for (Index head = 0; head < num_heads; ++head) {
    const Index at = head * head_dim;
    heads.push_back(scaled_dot_product_attention(ad::slice_columns(q, at, head_dim), ad::slice_columns(k, at, head_dim),
                                                 ad::slice_columns(v, at, head_dim), key_padding)
                        .output);
  }
  auto joined = num_heads == 1 ? heads.front() : ad::concat_columns(heads);
  return ad::affine(joined, w.output_kernel, w.output_bias);
}

template <typename S>
struct FeedForwardWeights {
  Var<S> inner_kernel, inner_bias;  // [h x f], [f]
  Var<S> outer_kernel, outer_bias;  // [f x h], [h]
};

template <typename S>
Var<S> feed_forward(const Var<S>& x, const FeedForwardWeights<S>& w) {
  return ad::affine(ad::gelu(ad::affine(x, w.inner_kernel, w.inner_bias)), w.outer_kernel, w.outer_bias);
}

template <typename S>
struct EncoderLayerWeights {
  AttentionWeights<S> attention;
  Var<S> attention_norm_gamma, attention_norm_beta;
  FeedForwardWeights<S> ffn;
  Var<S> output_norm_gamma, output_norm_beta;
};

/// Post-norm encoder block: LN(x + MHA(x)), then LN(a + FFN(a)).
template <typename S>
Var<S> encoder_layer_forward(const Var<S>& x, Index num_heads, const EncoderLayerWeights<S>& w,
                             const std::vector<bool>& key_padding) {
  if (w.attention.query_kernel.shape()[0] != x.shape().back()) {
    throw ShapeError("encoder layer: input " + shape_str(x.shape()) + " does not match weights " +
                     shape_str(w.attention.query_kernel.shape()));
  }
  auto attended = ad::layer_norm(ad::add(x, multi_head_attention(x, num_heads, w.attention, key_padding)),
                                 w.attention_norm_gamma, w.attention_norm_beta);
  return ad::layer_norm(ad::add(attended, feed_forward(attended, w.ffn)), w.output_norm_gamma, w.output_norm_beta);
}

}  // namespace hoaxdet::tfm
