#pragma once

#include <Eigen/Core>

#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mint {

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_count(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

//! Dense row-major n-d buffer over a flat Eigen array. Immutable shape,
//! mutable contents; all layer math in the project runs on these.
template <typename Scalar>
class Tensor {
 public:
  using Flat = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape();
    data_ = Flat::Zero(shape_count(shape_));
  }

  Tensor(Shape shape, Flat data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_count(shape_))
      throw ShapeError("tensor data size " + std::to_string(data_.size()) +
                       " does not match shape " + shape_str(shape_));
  }

  Tensor(Shape shape, std::initializer_list<Scalar> values)
      : Tensor(std::move(shape), Flat(Eigen::Map<const Flat>(values.begin(),
                                                             static_cast<Index>(values.size())))) {}

  static Tensor full(Shape shape, Scalar v) {
    Tensor t(std::move(shape));
    t.data_.setConstant(v);
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(std::size_t i) const { return shape_.at(i); }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  Flat& flat() { return data_; }
  const Flat& flat() const { return data_; }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  // NCHW / OIHW element access
  Scalar& at4(Index a, Index b, Index c, Index d) {
    assert(rank() == 4);
    return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
  }
  Scalar at4(Index a, Index b, Index c, Index d) const {
    return const_cast<Tensor*>(this)->at4(a, b, c, d);
  }
  Scalar& at2(Index r, Index c) {
    assert(rank() == 2);
    return data_[r * shape_[1] + c];
  }
  Scalar at2(Index r, Index c) const { return const_cast<Tensor*>(this)->at2(r, c); }

  Tensor reshaped(Shape shape) const {
    if (shape_count(shape) != size())
      throw ShapeError("reshape " + shape_str(shape_) + " -> " + shape_str(shape) +
                       " changes element count");
    return Tensor(std::move(shape), data_);
  }

  template <typename To>
  Tensor<To> cast() const {
    return Tensor<To>(shape_, data_.template cast<To>());
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  void check_shape() const {
    for (Index d : shape_)
      if (d < 1) throw ShapeError("tensor dimensions must be >= 1, got " + shape_str(shape_));
  }

  Shape shape_;
  Flat data_;
};

using TensorR = Tensor<double>;
using TensorI = Tensor<std::int32_t>;

template <typename Scalar>
bool tensors_equal(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  return a.shape() == b.shape() && (a.flat() == b.flat()).all();
}

}  // namespace mint
