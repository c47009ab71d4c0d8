#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dgo/ops.hpp"

namespace dgo {

/// Named handles onto trainable tensors. Copies of a Var share storage, so the
/// optimizer and checkpoint code mutate the live parameters through this list.
template <typename T>
using ParamList = std::vector<std::pair<std::string, Var<T>>>;

template <typename T>
Tensor<T> normal_tensor(std::vector<int> dims, double stddev, std::mt19937_64& rng) {
  Tensor<T> t(std::move(dims));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.span()) v = static_cast<T>(dist(rng));
  return t;
}

/// Plain convolution with bias; padding keeps "same" geometry for odd kernels.
template <typename T>
struct Conv {
  Var<T> weight;  // Cout x Cin x k x k
  Var<T> bias;    // Cout
  int stride = 1;

  int kernel() const { return weight.value().dim(2); }
  int out_channels() const { return weight.value().dim(0); }
  int in_channels() const { return weight.value().dim(1); }

  Var<T> operator()(const Var<T>& x) const {
    return ops::conv2d(x, weight, bias, stride, kernel() / 2);
  }

  /// He-normal weights scaled by `gain`, zero bias.
  static Conv init(int cout, int cin, int k, int stride, std::mt19937_64& rng, double gain = 1.0) {
    const double stddev = gain * std::sqrt(2.0 / (cin * k * k));
    return Conv{Var<T>::parameter(normal_tensor<T>({cout, cin, k, k}, stddev, rng)),
                Var<T>::parameter(Tensor<T>(std::vector<int>{cout})), stride};
  }

  static Conv zeros(int cout, int cin, int k, int stride = 1) {
    return Conv{Var<T>::parameter(Tensor<T>(std::vector<int>{cout, cin, k, k})), Var<T>::parameter(Tensor<T>(std::vector<int>{cout})),
                stride};
  }

  void collect(const std::string& prefix, ParamList<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

/// Sets every tensor in the list to zero.
template <typename T>
void zero_parameters(ParamList<T>& params) {
  for (auto& [name, p] : params) p.mutable_value().fill(T(0));
}

}  // namespace dgo
