#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgo/ops.hpp"
#include "oracles.hpp"

using namespace dgo;
using V = Var<double>;

namespace {

V leaf(std::vector<int> dims, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  return V::parameter(oracle::random_tensor(std::move(dims), rng, lo, hi));
}

// Contracts an op output against a fixed random probe so every entry matters.
V probe(const V& out) {
  std::mt19937_64 rng(99);
  return ops::sum(ops::mul_const(out, oracle::random_tensor(out.dims(), rng)));
}

}  // namespace

TEST(Conv2d, MatchesDenseOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = trial % 2 ? 3 : 1, stride = 1 + trial % 3 / 2;
    const auto x = leaf({2, 7, 9}, rng), w = leaf({3, 2, k, k}, rng), b = leaf({3}, rng);
    const auto out = ops::conv2d(x, w, b, stride, k / 2).value();
    const auto ref = oracle::dense_conv(x.value(), w.value(), &b.value(), stride);
    EXPECT_LT(oracle::max_rel_diff(out, ref), 1e-12);
  }
}

TEST(Conv2d, UndefinedBias) {
  std::mt19937_64 rng(2);
  const auto x = leaf({2, 5, 5}, rng), w = leaf({1, 2, 3, 3}, rng);
  const auto out = ops::conv2d(x, w, V{}, 1, 1).value();
  EXPECT_LT(oracle::max_rel_diff(out, oracle::dense_conv(x.value(), w.value(), nullptr, 1)), 1e-12);
}

TEST(Conv2d, ChannelMismatchRejected) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(ops::conv2d(leaf({2, 5, 5}, rng), leaf({1, 3, 3, 3}, rng), V{}, 1, 1), InputError);
}

TEST(OpGradients, Conv2d) {
  std::mt19937_64 rng(4);
  for (int stride : {1, 2}) {
    const auto x = leaf({2, 5, 6}, rng), w = leaf({3, 2, 3, 3}, rng), b = leaf({3}, rng);
    std::mt19937_64 prng(5);
    const auto p = oracle::random_tensor({3, stride == 1 ? 5 : 3, stride == 1 ? 6 : 3}, prng);
    EXPECT_LT(oracle::gradient_error([&] { return ops::sum(ops::mul_const(ops::conv2d(x, w, b, stride, 1), p)); },
                                     {x, w, b}, 1e-6),
              1e-6);
  }
}

TEST(OpGradients, Elementwise) {
  std::mt19937_64 rng(6);
  auto a = leaf({2, 3, 4}, rng), b = leaf({2, 3, 4}, rng);
  for (auto& v : a.mutable_value().span()) {
    if (std::abs(v) < 0.05) v += 0.1;
  }
  const auto p = oracle::random_tensor({2, 3, 4}, rng);
  auto check = [&](auto fn) {
    return oracle::gradient_error([&] { return ops::sum(ops::mul_const(fn(), p)); }, {a, b}, 1e-6);
  };
  EXPECT_LT(check([&] { return ops::add(a, b); }), 1e-8);
  EXPECT_LT(check([&] { return ops::sub(a, b); }), 1e-8);
  EXPECT_LT(check([&] { return ops::mul(a, b); }), 1e-8);
  EXPECT_LT(check([&] { return ops::scale(a, 2.5); }), 1e-8);
  EXPECT_LT(check([&] { return ops::elu(a); }), 1e-6);
  EXPECT_LT(check([&] { return ops::sigmoid(a); }), 1e-8);
  EXPECT_LT(check([&] { return ops::tanh(a); }), 1e-8);
  EXPECT_LT(check([&] { return ops::relu(a); }), 1e-8);
  EXPECT_LT(check([&] { return ops::leaky_relu(a, 0.2); }), 1e-8);
  EXPECT_LT(check([&] { return ops::abs(a); }), 1e-8);
}

TEST(OpGradients, ShapeOps) {
  std::mt19937_64 rng(7);
  const auto a = leaf({2, 3, 4}, rng), b = leaf({1, 3, 4}, rng), bias = leaf({2}, rng);
  const auto map = oracle::random_tensor({1, 3, 4}, rng);
  auto err = [&](auto fn, std::vector<V> leaves) {
    return oracle::gradient_error([&] { return probe(fn()); }, leaves, 1e-6);
  };
  EXPECT_LT(err([&] { return ops::concat_channels<double>({a, b, a}); }, {a, b}), 1e-8);
  EXPECT_LT(err([&] { return ops::upsample_nearest2(a); }, {a}), 1e-8);
  EXPECT_LT(err([&] { return ops::mul_spatial(a, map); }, {a}), 1e-8);
  EXPECT_LT(err([&] { return ops::add_channel_bias(a, bias); }, {a, bias}), 1e-8);
  EXPECT_LT(err([&] { return ops::channel_mean_square(a); }, {a}), 1e-8);
  EXPECT_LT(err([&] { return ops::sum_spatial(a); }, {a}), 1e-8);
  EXPECT_LT(err([&] { return ops::mean(a); }, {a}), 1e-8);
  EXPECT_LT(err([&] { return ops::l2_norm(a); }, {a}), 1e-8);
}

TEST(OpGradients, DynamicFilter) {
  std::mt19937_64 rng(9);
  const auto field = leaf({18, 4, 5}, rng), f = leaf({2, 4, 5}, rng);
  const auto p = oracle::random_tensor({2, 4, 5}, rng);
  EXPECT_LT(oracle::gradient_error([&] { return ops::sum(ops::mul_const(ops::dynamic_filter(field, f), p)); },
                                   {field, f}, 1e-6),
            1e-8);
}

TEST(OpGradients, SpectralNormalize) {
  std::mt19937_64 rng(10);
  const auto w = leaf({3, 2, 3, 3}, rng);
  const auto u = oracle::random_tensor({3}, rng), v = oracle::random_tensor({18}, rng);
  const auto p = oracle::random_tensor({3, 2, 3, 3}, rng);
  EXPECT_LT(oracle::gradient_error([&] { return ops::sum(ops::mul_const(ops::spectral_normalize(w, u, v), p)); }, {w},
                                   1e-6),
            1e-6);
}

TEST(OpGradients, StraightThroughPassesGradientUnchanged) {
  std::mt19937_64 rng(11);
  const auto soft = leaf({1, 3, 3}, rng);
  const auto hard = oracle::random_tensor({1, 3, 3}, rng);
  const auto out = ops::straight_through(hard, soft);
  EXPECT_EQ(out.value(), hard);
  const auto p = oracle::random_tensor({1, 3, 3}, rng);
  backward(ops::sum(ops::mul_const(out, p)));
  EXPECT_EQ(soft.grad(), p);
}

TEST(Autograd, SharedSubgraphAccumulates) {
  const auto x = V::parameter(Tensor<double>(std::vector<int>{1}, 3.0));
  const auto y = ops::mul(x, x);
  backward(ops::add(y, y));
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Autograd, ConstantsCarryNoGradient) {
  const auto c = V::constant(Tensor<double>(std::vector<int>{2}, 1.0));
  const auto x = V::parameter(Tensor<double>(std::vector<int>{2}, 2.0));
  const auto y = ops::mul(c, x);
  EXPECT_TRUE(y.requires_grad());
  EXPECT_FALSE(ops::scale(c, 2.0).requires_grad());
  backward(ops::sum(y));
  EXPECT_TRUE(c.grad().empty());
}
