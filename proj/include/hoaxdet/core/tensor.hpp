#pragma once

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hoaxdet/core/errors.hpp"

namespace hoaxdet {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

/// Shape-tagged row-major array with an optional gradient buffer.
///
/// Storage is always a row-major matrix whose column count is the last
/// dimension and whose row count is the product of the leading ones, so a
/// [L x C] activation is an L x C matrix, a [C] vector is 1 x C and a
/// [K x C x F] convolution kernel is (K*C) x F.
template <typename Scalar>
class Tensor {
 public:
  using Matrix = RowMatrix<Scalar>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_ = Matrix::Zero(leading(shape_), shape_.back());
  }

  Tensor(Shape shape, Matrix data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.rows() != leading(shape_) || data_.cols() != shape_.back()) {
      throw ShapeError("tensor storage " + std::to_string(data_.rows()) + "x" +
                       std::to_string(data_.cols()) + " does not hold shape " + shape_str(shape_));
    }
  }

  static Tensor from_matrix(Matrix m) {
    Shape s{m.rows(), m.cols()};
    return Tensor(std::move(s), std::move(m));
  }

  static Tensor vector(std::initializer_list<Scalar> values) {
    Tensor t(Shape{static_cast<Index>(values.size())});
    Index i = 0;
    for (Scalar v : values) t.data_(0, i++) = v;
    return t;
  }

  static Tensor matrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
    const auto r = static_cast<Index>(rows.size());
    const auto c = static_cast<Index>(rows.begin()->size());
    Tensor t(Shape{r, c});
    Index i = 0;
    for (const auto& row : rows) {
      if (static_cast<Index>(row.size()) != c) throw ShapeError("ragged matrix literal");
      Index j = 0;
      for (Scalar v : row) t.data_(i, j++) = v;
      ++i;
    }
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }
  Index size() const { return data_.size(); }
  bool empty() const { return shape_.empty(); }

  Matrix& matrix() { return data_; }
  const Matrix& matrix() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_.data()[i]; }
  Scalar operator[](Index i) const { return data_.data()[i]; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool has_grad() const { return grad_.has_value(); }

  /// Gradient accumulator, zero-allocated on first access.
  Matrix& grad() {
    if (!grad_) grad_ = Matrix::Zero(data_.rows(), data_.cols());
    return *grad_;
  }
  const Matrix& grad() const {
    if (!grad_) throw ContractError("tensor " + shape_str(shape_) + " has no gradient");
    return *grad_;
  }

  void zero_grad() {
    if (grad_) grad_->setZero();
  }
  void clear_grad() { grad_.reset(); }

  bool all_finite() const { return data_.allFinite(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_, data_.template cast<Other>());
    out.set_requires_grad(requires_grad_);
    return out;
  }

 private:
  static Index leading(const Shape& s) {
    return std::accumulate(s.begin(), s.end() - 1, Index{1}, std::multiplies<>());
  }

  static void check_shape(const Shape& s) {
    if (s.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (Index d : s) {
      if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(s));
    }
  }

  Shape shape_;
  Matrix data_;
  bool requires_grad_ = false;
  std::optional<Matrix> grad_;
};

}  // namespace hoaxdet
