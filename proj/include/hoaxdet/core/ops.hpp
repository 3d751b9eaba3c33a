#pragma once

// Differentiable primitives. Each function computes its forward value with
// Eigen and records a closure that accumulates input gradients.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hoaxdet/core/graph.hpp"
#include "hoaxdet/core/rng.hpp"

namespace hoaxdet::ad {

using TokenId = std::int32_t;

namespace detail {

template <typename S>
using Mat = RowMatrix<S>;

inline Shape with_last(Shape s, Index last) {
  s.back() = last;
  return s;
}

[[noreturn]] inline void shape_fail(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

template <typename S>
S sigmoid(S z) {
  return S(1) / (S(1) + std::exp(-z));
}

}  // namespace detail

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  const auto& am = a.matrix();
  const auto& bm = b.matrix();
  if (a.value().rank() > 2 || b.value().rank() != 2 || am.cols() != bm.rows()) {
    detail::shape_fail("matmul", a.shape(), b.shape());
  }
  detail::Mat<S> out = am * bm;
  Shape shape = a.value().rank() == 1 ? Shape{bm.cols()} : Shape{am.rows(), bm.cols()};
  return a.graph().record(Tensor<S>(std::move(shape), std::move(out)), {a, b},
                          [a, b](Graph<S>& g, const detail::Mat<S>& go) {
                            if (g.requires_grad(a)) g.grad(a).noalias() += go * b.matrix().transpose();
                            if (g.requires_grad(b)) g.grad(b).noalias() += a.matrix().transpose() * go;
                          });
}

template <typename S>
Var<S> transpose(const Var<S>& a) {
  if (a.value().rank() != 2) throw ShapeError("transpose expects a matrix, got " + shape_str(a.shape()));
  detail::Mat<S> out = a.matrix().transpose();
  return a.graph().record(Tensor<S>::from_matrix(std::move(out)), {a},
                          [a](Graph<S>& g, const detail::Mat<S>& go) { g.grad(a) += go.transpose(); });
}

template <typename S>
Var<S> reshape(const Var<S>& a, Shape shape) {
  if (shape_size(shape) != a.value().size()) detail::shape_fail("reshape", a.shape(), shape);
  const Index rows = shape_size(shape) / shape.back();
  detail::Mat<S> out = Eigen::Map<const detail::Mat<S>>(a.value().data(), rows, shape.back());
  return a.graph().record(Tensor<S>(std::move(shape), std::move(out)), {a},
                          [a](Graph<S>& g, const detail::Mat<S>& go) {
                            auto& ga = g.grad(a);
                            Eigen::Map<detail::Mat<S>>(ga.data(), go.rows(), go.cols()) += go;
                          });
}

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  if (a.shape() != b.shape()) detail::shape_fail("add", a.shape(), b.shape());
  detail::Mat<S> out = a.matrix() + b.matrix();
  return a.graph().record(Tensor<S>(a.shape(), std::move(out)), {a, b},
                          [a, b](Graph<S>& g, const detail::Mat<S>& go) {
                            if (g.requires_grad(a)) g.grad(a) += go;
                            if (g.requires_grad(b)) g.grad(b) += go;
                          });
}

template <typename S>
Var<S> hadamard(const Var<S>& a, const Var<S>& b) {
  if (a.shape() != b.shape()) detail::shape_fail("hadamard", a.shape(), b.shape());
  detail::Mat<S> out = a.matrix().cwiseProduct(b.matrix());
  return a.graph().record(Tensor<S>(a.shape(), std::move(out)), {a, b},
                          [a, b](Graph<S>& g, const detail::Mat<S>& go) {
                            if (g.requires_grad(a)) g.grad(a) += go.cwiseProduct(b.matrix());
                            if (g.requires_grad(b)) g.grad(b) += go.cwiseProduct(a.matrix());
                          });
}

template <typename S>
Var<S> scale(const Var<S>& a, S factor) {
  detail::Mat<S> out = a.matrix() * factor;
  return a.graph().record(Tensor<S>(a.shape(), std::move(out)), {a},
                          [a, factor](Graph<S>& g, const detail::Mat<S>& go) { g.grad(a) += go * factor; });
}

template <typename S>
Var<S> sum(const Var<S>& a) {
  Tensor<S> out(Shape{1});
  out[0] = a.matrix().sum();
  return a.graph().record(std::move(out), {a}, [a](Graph<S>& g, const detail::Mat<S>& go) {
    g.grad(a).array() += go(0, 0);
  });
}

/// x + b broadcast over rows; b is a vector as wide as x's last dimension.
template <typename S>
Var<S> add_bias(const Var<S>& x, const Var<S>& bias) {
  if (bias.value().rank() != 1 || bias.shape()[0] != x.shape().back()) {
    detail::shape_fail("add_bias", x.shape(), bias.shape());
  }
  detail::Mat<S> out = x.matrix().rowwise() + bias.matrix().row(0);
  return x.graph().record(Tensor<S>(x.shape(), std::move(out)), {x, bias},
                          [x, bias](Graph<S>& g, const detail::Mat<S>& go) {
                            if (g.requires_grad(x)) g.grad(x) += go;
                            if (g.requires_grad(bias)) g.grad(bias).row(0) += go.colwise().sum();
                          });
}

/// x W + b. Works on a single [C] vector (the classifier head) or row-wise on
/// an [n x C] matrix (projections).
template <typename S>
Var<S> affine(const Var<S>& x, const Var<S>& weights, const Var<S>& bias) {
  if (weights.value().rank() != 2 || x.shape().back() != weights.shape()[0] ||
      bias.value().rank() != 1 || bias.shape()[0] != weights.shape()[1]) {
    throw ShapeError("dense: input " + shape_str(x.shape()) + " incompatible with weights " +
                     shape_str(weights.shape()) + " and bias " + shape_str(bias.shape()));
  }
  return add_bias(matmul(x, weights), bias);
}

template <typename S>
Var<S> dense(const Var<S>& x, const Var<S>& weights, const Var<S>& bias) {
  return affine(x, weights, bias);
}

namespace detail {

template <typename S>
Var<S> softmax_impl(const Var<S>& x, const std::vector<bool>* key_mask) {
  const auto& xm = x.matrix();
  if (key_mask && static_cast<Index>(key_mask->size()) != xm.cols()) {
    throw ShapeError("softmax: mask length " + std::to_string(key_mask->size()) +
                     " does not match width " + std::to_string(xm.cols()));
  }
  Mat<S> out = Mat<S>::Zero(xm.rows(), xm.cols());
  for (Index r = 0; r < xm.rows(); ++r) {
    S peak = -std::numeric_limits<S>::infinity();
    for (Index c = 0; c < xm.cols(); ++c) {
      if (!key_mask || !(*key_mask)[c]) peak = std::max(peak, xm(r, c));
    }
    if (!std::isfinite(peak)) continue;  // every key masked: row stays zero
    S total = 0;
    for (Index c = 0; c < xm.cols(); ++c) {
      if (key_mask && (*key_mask)[c]) continue;
      out(r, c) = std::exp(xm(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  auto probs = std::make_shared<Mat<S>>(out);
  return x.graph().record(Tensor<S>(x.shape(), std::move(out)), {x},
                          [x, probs](Graph<S>& g, const Mat<S>& go) {
                            const Mat<S>& y = *probs;
                            auto dot = (go.cwiseProduct(y)).rowwise().sum();
                            g.grad(x) += y.cwiseProduct(go - dot.replicate(1, go.cols()));
                          });
}

}  // namespace detail

/// Softmax along the last axis, with max subtraction.
template <typename S>
Var<S> softmax(const Var<S>& x) {
  return detail::softmax_impl<S>(x, nullptr);
}

/// Softmax along the last axis where columns flagged in `masked` receive
/// exactly zero weight (equivalent to -inf logits).
template <typename S>
Var<S> masked_softmax(const Var<S>& x, const std::vector<bool>& masked) {
  return detail::softmax_impl<S>(x, &masked);
}

inline constexpr double kProbabilityClamp = 1e-12;

/// Mean over rows of -sum(target * log(p)). Each probability row must sum to
/// one within 1e-5.
template <typename S>
Var<S> categorical_crossentropy(const Var<S>& probs, const Tensor<S>& targets) {
  const auto& pm = probs.matrix();
  if (probs.shape() != targets.shape()) detail::shape_fail("categorical_crossentropy", probs.shape(), targets.shape());
  for (Index r = 0; r < pm.rows(); ++r) {
    const double total = static_cast<double>(pm.row(r).sum());
    if (std::abs(total - 1.0) > 1e-5) {
      throw ContractError("categorical_crossentropy: probabilities sum to " + std::to_string(total));
    }
  }
  const S clamp = static_cast<S>(kProbabilityClamp);
  const S rows = static_cast<S>(pm.rows());
  S loss = 0;
  for (Index i = 0; i < pm.size(); ++i) {
    const S t = targets.data()[i];
    if (t != S(0)) loss -= t * std::log(std::max(pm.data()[i], clamp));
  }
  Tensor<S> out(Shape{1});
  out[0] = loss / rows;
  auto target_copy = std::make_shared<Tensor<S>>(targets);
  return probs.graph().record(std::move(out), {probs},
                              [probs, target_copy, clamp, rows](Graph<S>& g, const detail::Mat<S>& go) {
                                const auto& p = probs.matrix();
                                auto& gp = g.grad(probs);
                                for (Index i = 0; i < p.size(); ++i) {
                                  const S t = target_copy->data()[i];
                                  if (t != S(0) && p.data()[i] > clamp) {
                                    gp.data()[i] -= go(0, 0) * t / (p.data()[i] * rows);
                                  }
                                }
                              });
}

/// Gaussian error linear unit, exact erf form.
template <typename S>
Var<S> gelu(const Var<S>& x) {
  const S inv_sqrt2 = S(1) / std::sqrt(S(2));
  detail::Mat<S> out = x.matrix().unaryExpr([inv_sqrt2](S v) { return S(0.5) * v * (S(1) + std::erf(v * inv_sqrt2)); });
  return x.graph().record(Tensor<S>(x.shape(), std::move(out)), {x},
                          [x, inv_sqrt2](Graph<S>& g, const detail::Mat<S>& go) {
                            const S inv_sqrt2pi = S(1) / std::sqrt(S(2) * S(M_PI));
                            detail::Mat<S> d = x.matrix().unaryExpr([&](S v) {
                              return S(0.5) * (S(1) + std::erf(v * inv_sqrt2)) +
                                     v * inv_sqrt2pi * std::exp(S(-0.5) * v * v);
                            });
                            g.grad(x) += go.cwiseProduct(d);
                          });
}

/// Row-wise layer normalisation with learned scale and shift.
template <typename S>
Var<S> layer_norm(const Var<S>& x, const Var<S>& gamma, const Var<S>& beta, S eps = S(1e-12)) {
  const auto& xm = x.matrix();
  const Index width = xm.cols();
  if (gamma.value().rank() != 1 || gamma.shape()[0] != width || beta.shape() != gamma.shape()) {
    detail::shape_fail("layer_norm", x.shape(), gamma.shape());
  }
  auto normalized = std::make_shared<detail::Mat<S>>(xm.rows(), width);
  auto inv_std = std::make_shared<Eigen::Matrix<S, Eigen::Dynamic, 1>>(xm.rows());
  for (Index r = 0; r < xm.rows(); ++r) {
    const S mean = xm.row(r).mean();
    const S var = (xm.row(r).array() - mean).square().mean();
    (*inv_std)(r) = S(1) / std::sqrt(var + eps);
    normalized->row(r) = (xm.row(r).array() - mean) * (*inv_std)(r);
  }
  detail::Mat<S> out =
      (normalized->array().rowwise() * gamma.matrix().row(0).array()).rowwise() + beta.matrix().row(0).array();
  return x.graph().record(Tensor<S>(x.shape(), std::move(out)), {x, gamma, beta},
                          [x, gamma, beta, normalized, inv_std, width](Graph<S>& g, const detail::Mat<S>& go) {
                            const auto& xhat = *normalized;
                            if (g.requires_grad(gamma)) g.grad(gamma).row(0) += go.cwiseProduct(xhat).colwise().sum();
                            if (g.requires_grad(beta)) g.grad(beta).row(0) += go.colwise().sum();
                            if (!g.requires_grad(x)) return;
                            auto& gx = g.grad(x);
                            const auto gam = gamma.matrix().row(0).array();
                            for (Index r = 0; r < go.rows(); ++r) {
                              Eigen::Array<S, 1, Eigen::Dynamic> dxhat = go.row(r).array() * gam;
                              const S mean_d = dxhat.mean();
                              const S mean_dx = (dxhat * xhat.row(r).array()).mean();
                              gx.row(r).array() += (*inv_std)(r) * (dxhat - mean_d - xhat.row(r).array() * mean_dx);
                            }
                            (void)width;
                          });
}

/// Valid (unpadded) stride-1 cross-correlation of an [L x C] sequence with
/// [K x C x F] kernels, producing [(L-K+1) x F].
template <typename S>
Var<S> conv1d_valid(const Var<S>& input, const Var<S>& kernels, const Var<S>& bias) {
  const auto& in = input.value();
  const auto& kt = kernels.value();
  if (in.rank() != 2 || kt.rank() != 3 || kt.dim(1) != in.dim(1) || bias.value().rank() != 1 ||
      bias.shape()[0] != kt.dim(2)) {
    throw ShapeError("conv1d: input " + shape_str(in.shape()) + " incompatible with kernels " +
                     shape_str(kt.shape()) + " and bias " + shape_str(bias.shape()));
  }
  const Index length = in.dim(0), channels = in.dim(1), width = kt.dim(0), filters = kt.dim(2);
  if (length < width) {
    throw ShapeError("conv1d: sequence length " + std::to_string(length) + " shorter than kernel " +
                     std::to_string(width));
  }
  const Index out_len = length - width + 1;
  using Windows = Eigen::Map<const detail::Mat<S>, 0, Eigen::OuterStride<>>;
  Windows windows(in.data(), out_len, width * channels, Eigen::OuterStride<>(channels));
  detail::Mat<S> out = (windows * kt.matrix()).rowwise() + bias.matrix().row(0);
  return input.graph().record(
      Tensor<S>(Shape{out_len, filters}, std::move(out)), {input, kernels, bias},
      [input, kernels, bias, out_len, channels, width](Graph<S>& g, const detail::Mat<S>& go) {
        Windows win(input.value().data(), out_len, width * channels, Eigen::OuterStride<>(channels));
        if (g.requires_grad(kernels)) g.grad(kernels).noalias() += win.transpose() * go;
        if (g.requires_grad(bias)) g.grad(bias).row(0) += go.colwise().sum();
        if (g.requires_grad(input)) {
          detail::Mat<S> dwin = go * kernels.matrix().transpose();
          auto& gx = g.grad(input);
          for (Index t = 0; t < out_len; ++t) {
            Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>>(gx.data() + t * channels, width * channels) += dwin.row(t);
          }
        }
      });
}

/// Non-overlapping max pooling with window 2 and stride 2 along the sequence;
/// a trailing odd row is dropped.
template <typename S>
Var<S> max_pool1d(const Var<S>& input) {
  const auto& xm = input.matrix();
  if (input.value().rank() != 2 || xm.rows() < 2) {
    throw ShapeError("max_pool1d: needs at least 2 rows, got " + shape_str(input.shape()));
  }
  const Index out_len = xm.rows() / 2, channels = xm.cols();
  detail::Mat<S> out(out_len, channels);
  auto argmax = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(out_len * channels));
  for (Index t = 0; t < out_len; ++t) {
    for (Index c = 0; c < channels; ++c) {
      const Index pick = xm(2 * t + 1, c) > xm(2 * t, c) ? 2 * t + 1 : 2 * t;
      out(t, c) = xm(pick, c);
      (*argmax)[static_cast<std::size_t>(t * channels + c)] = pick;
    }
  }
  return input.graph().record(Tensor<S>(Shape{out_len, channels}, std::move(out)), {input},
                              [input, argmax, channels](Graph<S>& g, const detail::Mat<S>& go) {
                                auto& gx = g.grad(input);
                                for (Index t = 0; t < go.rows(); ++t) {
                                  for (Index c = 0; c < channels; ++c) {
                                    gx((*argmax)[static_cast<std::size_t>(t * channels + c)], c) += go(t, c);
                                  }
                                }
                              });
}

/// Column-wise maximum of an [L x C] sequence, giving a [C] vector.
template <typename S>
Var<S> global_max_pool1d(const Var<S>& input) {
  const auto& xm = input.matrix();
  if (input.value().rank() != 2) throw ShapeError("global_max_pool1d expects [L x C], got " + shape_str(input.shape()));
  const Index channels = xm.cols();
  Tensor<S> out(Shape{channels});
  auto argmax = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(channels), 0);
  for (Index c = 0; c < channels; ++c) {
    Index best = 0;
    for (Index t = 1; t < xm.rows(); ++t) {
      if (xm(t, c) > xm(best, c)) best = t;
    }
    (*argmax)[static_cast<std::size_t>(c)] = best;
    out[c] = xm(best, c);
  }
  return input.graph().record(std::move(out), {input}, [input, argmax](Graph<S>& g, const detail::Mat<S>& go) {
    auto& gx = g.grad(input);
    for (Index c = 0; c < go.cols(); ++c) gx((*argmax)[static_cast<std::size_t>(c)], c) += go(0, c);
  });
}

/// Row gather from a [V x D] table. The gradient touches only the looked-up
/// rows.
template <typename S>
Var<S> embedding_lookup(std::span<const TokenId> ids, const Var<S>& table) {
  const auto& tm = table.matrix();
  if (table.value().rank() != 2) throw ShapeError("embedding table must be [V x D], got " + shape_str(table.shape()));
  if (ids.empty()) throw ShapeError("embedding_lookup: empty id sequence");
  const Index vocab = tm.rows();
  detail::Mat<S> out(static_cast<Index>(ids.size()), tm.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw OutOfRangeError("token id " + std::to_string(ids[i]) + " outside vocabulary of size " +
                            std::to_string(vocab));
    }
    out.row(static_cast<Index>(i)) = tm.row(ids[i]);
  }
  auto saved = std::make_shared<std::vector<TokenId>>(ids.begin(), ids.end());
  return table.graph().record(Tensor<S>::from_matrix(std::move(out)), {table},
                              [table, saved](Graph<S>& g, const detail::Mat<S>& go) {
                                auto& gt = g.grad(table);
                                for (std::size_t i = 0; i < saved->size(); ++i) {
                                  gt.row((*saved)[i]) += go.row(static_cast<Index>(i));
                                }
                              });
}

/// Inverted dropout: zero with probability p and scale survivors by 1/(1-p)
/// while training; identity otherwise.
template <typename S>
Var<S> dropout(const Var<S>& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const S keep_scale = static_cast<S>(1.0 / (1.0 - p));
  auto mask = std::make_shared<detail::Mat<S>>(x.matrix().rows(), x.matrix().cols());
  for (Index i = 0; i < mask->size(); ++i) mask->data()[i] = rng.bernoulli(p) ? S(0) : keep_scale;
  detail::Mat<S> out = x.matrix().cwiseProduct(*mask);
  return x.graph().record(Tensor<S>(x.shape(), std::move(out)), {x}, [x, mask](Graph<S>& g, const detail::Mat<S>& go) {
    g.grad(x) += go.cwiseProduct(*mask);
  });
}

template <typename S>
Var<S> concat_columns(const std::vector<Var<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_columns: nothing to concatenate");
  const Index rows = parts.front().matrix().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.matrix().rows() != rows) detail::shape_fail("concat_columns", parts.front().shape(), p.shape());
    cols += p.matrix().cols();
  }
  detail::Mat<S> out(rows, cols);
  std::vector<Index> offsets;
  Index at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    out.middleCols(at, p.matrix().cols()) = p.matrix();
    at += p.matrix().cols();
  }
  return parts.front().graph().record(Tensor<S>(detail::with_last(parts.front().shape(), cols), std::move(out)), parts,
                                      [parts, offsets](Graph<S>& g, const detail::Mat<S>& go) {
                                        for (std::size_t i = 0; i < parts.size(); ++i) {
                                          if (!g.requires_grad(parts[i])) continue;
                                          g.grad(parts[i]) += go.middleCols(offsets[i], parts[i].matrix().cols());
                                        }
                                      });
}

template <typename S>
Var<S> slice_columns(const Var<S>& x, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > x.matrix().cols()) {
    throw ShapeError("slice_columns: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                     ") outside " + shape_str(x.shape()));
  }
  detail::Mat<S> out = x.matrix().middleCols(start, count);
  return x.graph().record(Tensor<S>(detail::with_last(x.shape(), count), std::move(out)), {x},
                          [x, start, count](Graph<S>& g, const detail::Mat<S>& go) {
                            g.grad(x).middleCols(start, count) += go;
                          });
}

/// Weights of one LSTM direction. Gate blocks are ordered input, forget,
/// cell candidate, output; each has an input bias and a recurrent bias.
template <typename S>
struct LstmWeights {
  Var<S> input_kernel;      // [C x 4H]
  Var<S> recurrent_kernel;  // [H x 4H]
  Var<S> input_bias;        // [4H]
  Var<S> recurrent_bias;    // [4H]
};

/// Runs one LSTM direction over an [L x C] sequence and returns the [L x H]
/// hidden states, aligned with the input timesteps even when `reverse`.
template <typename S>
Var<S> lstm_sequence(const Var<S>& input, const LstmWeights<S>& w, bool reverse) {
  using detail::Mat;
  const auto& x = input.matrix();
  const auto& wx = w.input_kernel.matrix();
  const auto& wh = w.recurrent_kernel.matrix();
  const Index hidden = wh.rows();
  if (input.value().rank() != 2 || wx.rows() != x.cols() || wx.cols() != 4 * hidden || wh.cols() != 4 * hidden ||
      w.input_bias.value().size() != 4 * hidden || w.recurrent_bias.value().size() != 4 * hidden) {
    throw ShapeError("lstm: input " + shape_str(input.shape()) + " incompatible with kernels " +
                     shape_str(w.input_kernel.shape()) + " / " + shape_str(w.recurrent_kernel.shape()));
  }
  const Index length = x.rows();

  struct Saved {
    Mat<S> gates, cells, prev_cells, prev_hidden;
  };
  auto saved = std::make_shared<Saved>();
  Mat<S> z_in = (x * wx).rowwise() + (w.input_bias.matrix().row(0) + w.recurrent_bias.matrix().row(0));
  saved->gates.resize(length, 4 * hidden);
  saved->cells.resize(length, hidden);
  saved->prev_cells.resize(length, hidden);
  saved->prev_hidden.resize(length, hidden);
  Mat<S> out(length, hidden);

  Eigen::Matrix<S, 1, Eigen::Dynamic> h = Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(hidden);
  Eigen::Matrix<S, 1, Eigen::Dynamic> c = Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(hidden);
  Eigen::Matrix<S, 1, Eigen::Dynamic> z(4 * hidden);
  for (Index step = 0; step < length; ++step) {
    const Index t = reverse ? length - 1 - step : step;
    saved->prev_hidden.row(t) = h;
    saved->prev_cells.row(t) = c;
    z.noalias() = z_in.row(t) + h * wh;
    auto gate = saved->gates.row(t);
    for (Index j = 0; j < hidden; ++j) {
      gate(j) = detail::sigmoid(z(j));
      gate(hidden + j) = detail::sigmoid(z(hidden + j));
      gate(2 * hidden + j) = std::tanh(z(2 * hidden + j));
      gate(3 * hidden + j) = detail::sigmoid(z(3 * hidden + j));
      c(j) = gate(hidden + j) * c(j) + gate(j) * gate(2 * hidden + j);
      h(j) = gate(3 * hidden + j) * std::tanh(c(j));
    }
    saved->cells.row(t) = c;
    out.row(t) = h;
  }

  return input.graph().record(
      Tensor<S>(Shape{length, hidden}, std::move(out)),
      {input, w.input_kernel, w.recurrent_kernel, w.input_bias, w.recurrent_bias},
      [input, w, reverse, saved, hidden, length](Graph<S>& g, const Mat<S>& go) {
        const auto& whm = w.recurrent_kernel.matrix();
        Mat<S> dz(length, 4 * hidden);
        Eigen::Matrix<S, 1, Eigen::Dynamic> dh_next = Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(hidden);
        Eigen::Matrix<S, 1, Eigen::Dynamic> dc_next = Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(hidden);
        for (Index step = length; step-- > 0;) {
          const Index t = reverse ? length - 1 - step : step;
          const auto gate = saved->gates.row(t);
          auto dzt = dz.row(t);
          for (Index j = 0; j < hidden; ++j) {
            const S i = gate(j), f = gate(hidden + j), cand = gate(2 * hidden + j), o = gate(3 * hidden + j);
            const S tc = std::tanh(saved->cells(t, j));
            const S dh = go(t, j) + dh_next(j);
            const S dc = dh * o * (S(1) - tc * tc) + dc_next(j);
            dzt(j) = dc * cand * i * (S(1) - i);
            dzt(hidden + j) = dc * saved->prev_cells(t, j) * f * (S(1) - f);
            dzt(2 * hidden + j) = dc * i * (S(1) - cand * cand);
            dzt(3 * hidden + j) = dh * tc * o * (S(1) - o);
            dc_next(j) = dc * f;
          }
          dh_next.noalias() = dzt * whm.transpose();
        }
        if (g.requires_grad(w.input_kernel)) g.grad(w.input_kernel).noalias() += input.matrix().transpose() * dz;
        if (g.requires_grad(w.recurrent_kernel)) {
          g.grad(w.recurrent_kernel).noalias() += saved->prev_hidden.transpose() * dz;
        }
        if (g.requires_grad(w.input_bias) || g.requires_grad(w.recurrent_bias)) {
          const Eigen::Matrix<S, 1, Eigen::Dynamic> db = dz.colwise().sum();
          if (g.requires_grad(w.input_bias)) g.grad(w.input_bias).row(0) += db;
          if (g.requires_grad(w.recurrent_bias)) g.grad(w.recurrent_bias).row(0) += db;
        }
        if (g.requires_grad(input)) g.grad(input).noalias() += dz * w.input_kernel.matrix().transpose();
      });
}

/// Forward and reversed LSTM passes concatenated per timestep: [L x 2H].
template <typename S>
Var<S> bilstm_forward(const Var<S>& input, const LstmWeights<S>& forward, const LstmWeights<S>& backward) {
  return concat_columns<S>({lstm_sequence(input, forward, false), lstm_sequence(input, backward, true)});
}

}  // namespace hoaxdet::ad
