#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "dgo/errors.hpp"

namespace dgo {

/// Dense row-major tensor of rank 1..4. Rank-3 tensors are C x H x W images or
/// feature maps; rank-4 tensors hold convolution weights (Cout x Cin x k x k).
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> dims, T fill = T(0)) : dims_(std::move(dims)) {
    data_.assign(count(dims_), fill);
  }

  Tensor(int c, int h, int w, T fill = T(0)) : Tensor(std::vector<int>{c, h, w}, fill) {}

  static Tensor from(std::vector<int> dims, std::vector<T> values) {
    Tensor t;
    t.dims_ = std::move(dims);
    if (count(t.dims_) != values.size()) {
      throw InputError("tensor value count does not match shape");
    }
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-3 accessors.
  int channels() const { return dims_[0]; }
  int height() const { return dims_[1]; }
  int width() const { return dims_[2]; }
  std::size_t plane() const { return static_cast<std::size_t>(dims_[1]) * dims_[2]; }

  T& operator()(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * dims_[1] + y) * dims_[2] + x];
  }
  const T& operator()(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * dims_[1] + y) * dims_[2] + x];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  T* channel(int c) { return data_.data() + static_cast<std::size_t>(c) * plane(); }
  const T* channel(int c) const { return data_.data() + static_cast<std::size_t>(c) * plane(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

  Tensor& operator+=(const Tensor& o) {
    assert(same_shape(o));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  Tensor& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>::from(dims_, std::move(out));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  T sum() const {
    T s = 0;
    for (T v : data_) s += v;
    return s;
  }

  T max_abs() const {
    T m = 0;
    for (T v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(dims_[i]);
    }
    return s + ")";
  }

  bool operator==(const Tensor& o) const = default;

 private:
  static std::size_t count(const std::vector<int>& dims) {
    std::size_t n = 1;
    for (int d : dims) {
      if (d < 0) throw InputError("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::vector<int> dims_;
  std::vector<T> data_;
};

}  // namespace dgo
