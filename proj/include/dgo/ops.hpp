#pragma once

#include <vector>

#include "dgo/autograd.hpp"

// Differentiable tensor primitives. Every op is instantiated for float (training)
// and double (finite-difference checks). Feature maps are rank-3 C x H x W.
namespace dgo::ops {

/// 2-D cross-correlation, zero padding. `weight` is Cout x Cin x k x k; `bias`
/// (length Cout) may be undefined.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& a, T s);

/// Multiplies every channel of `a` by the 1 x H x W constant `map`.
template <typename T>
Var<T> mul_spatial(const Var<T>& a, const Tensor<T>& map);

/// Elementwise product with a constant of identical shape.
template <typename T>
Var<T> mul_const(const Var<T>& a, const Tensor<T>& c);

/// Adds bias[c] to every pixel of channel c.
template <typename T>
Var<T> add_channel_bias(const Var<T>& a, const Var<T>& bias);

template <typename T>
Var<T> elu(const Var<T>& a);
template <typename T>
Var<T> sigmoid(const Var<T>& a);
template <typename T>
Var<T> tanh(const Var<T>& a);
template <typename T>
Var<T> relu(const Var<T>& a);
template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope);
template <typename T>
Var<T> abs(const Var<T>& a);

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts);

template <typename T>
Var<T> upsample_nearest2(const Var<T>& a);

/// Spatially-variant depthwise 3x3 filtering. `field` has C*9 channels; channel
/// c*9 + (dy+1)*3 + (dx+1) weights f(c, y+dy, x+dx) for output (c, y, x).
template <typename T>
Var<T> dynamic_filter(const Var<T>& field, const Var<T>& f);

/// Per-pixel mean over channels of squared values: 1 x H x W.
template <typename T>
Var<T> channel_mean_square(const Var<T>& f);

/// Sum over H, W per channel: C x 1 x 1.
template <typename T>
Var<T> sum_spatial(const Var<T>& f);

template <typename T>
Var<T> sum(const Var<T>& a);
template <typename T>
Var<T> mean(const Var<T>& a);

/// Euclidean norm of all entries. The gradient at the origin is taken as zero.
template <typename T>
Var<T> l2_norm(const Var<T>& a);

/// Mean reverse-Huber penalty with threshold c.
template <typename T>
Var<T> berhu_mean(const Var<T>& a, T c);

/// Forward value `hard`, gradient routed unchanged into `soft`.
template <typename T>
Var<T> straight_through(const Tensor<T>& hard, const Var<T>& soft);

/// W / (u^T W v) with u, v held constant; W viewed as rows = dim 0.
template <typename T>
Var<T> spectral_normalize(const Var<T>& w, const Tensor<T>& u, const Tensor<T>& v);

}  // namespace dgo::ops
