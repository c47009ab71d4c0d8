#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgo/encoders.hpp"
#include "dgo/ingestion.hpp"
#include "oracles.hpp"

using namespace dgo;
using V = Var<double>;

namespace {

PartialConvLayer<double> pconv(Tensor<double> w, Tensor<double> b, int stride) {
  return PartialConvLayer<double>{V::parameter(std::move(w)), V::parameter(std::move(b)), stride};
}

FeatureMap<double> feature(Tensor<double> t) { return FeatureMap<double>{V::parameter(std::move(t)), 0}; }

NetworkConfig small_config() {
  NetworkConfig cfg;
  cfg.channels = {4, 6, 8, 8, 8};
  return cfg;
}

}  // namespace

TEST(PartialConv, FullMaskCenterEqualsDense) {
  const auto layer = pconv(Tensor<double>(std::vector<int>{1, 1, 3, 3}, 1.0), Tensor<double>(std::vector<int>{1}), 1);
  const auto [out, mask] = partial_conv(layer, feature(Tensor<double>(1, 5, 5, 1.0)), BinaryMask(5, 5, true));
  EXPECT_DOUBLE_EQ(out.data.value()(0, 2, 2), 9.0);
  EXPECT_TRUE(mask.all());
}

TEST(PartialConv, EmptyMaskGivesZeros) {
  std::mt19937_64 rng(1);
  const auto layer = pconv(oracle::random_tensor({3, 2, 3, 3}, rng), oracle::random_tensor({3}, rng), 1);
  const auto [out, mask] = partial_conv(layer, feature(oracle::random_tensor({2, 6, 6}, rng)), BinaryMask(6, 6));
  EXPECT_EQ(out.data.value().max_abs(), 0.0);
  EXPECT_EQ(mask.count(), 0u);
}

TEST(PartialConv, ThreeValidPixelsWindow) {
  Tensor<double> x(1, 3, 3, 7.0);  // values under the zero mask must not matter
  BinaryMask m(3, 3);
  for (auto [y, xx] : {std::pair{0, 0}, std::pair{1, 2}, std::pair{2, 1}}) {
    m.set(y, xx, true);
    x(0, y, xx) = 2.0;
  }
  const auto layer = pconv(Tensor<double>(std::vector<int>{1, 1, 3, 3}, 1.0), Tensor<double>(std::vector<int>{1}), 1);
  const auto [out, mask] = partial_conv(layer, feature(x), m);
  EXPECT_DOUBLE_EQ(out.data.value()(0, 1, 1), 18.0);
  EXPECT_TRUE(mask.at(1, 1));
  const auto ref = oracle::partial_conv(x, m, layer.weight.value(), layer.bias.value(), 1);
  EXPECT_DOUBLE_EQ(ref.out(0, 1, 1), 18.0);
}

TEST(PartialConv, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int stride = trial % 2 + 1, k = trial % 3 == 0 ? 1 : 3;
    const int cin = 1 + trial % 3, cout = 1 + trial % 4, h = 4 + 2 * (trial % 4), w = 6 + 2 * (trial % 3);
    const auto x = oracle::random_tensor({cin, h, w}, rng);
    const auto m = oracle::random_mask(h, w, 0.1 + 0.1 * (trial % 8), rng);
    const auto layer = pconv(oracle::random_tensor({cout, cin, k, k}, rng), oracle::random_tensor({cout}, rng), stride);
    const auto [out, mask] = partial_conv(layer, feature(x), m);
    const auto ref = oracle::partial_conv(x, m, layer.weight.value(), layer.bias.value(), stride);
    EXPECT_EQ(mask, ref.mask);
    EXPECT_LT(oracle::max_rel_diff(out.data.value(), ref.out), 1e-9);
  }
}

TEST(PartialConv, InvalidValueInvariance) {
  std::mt19937_64 rng(9);
  const auto layer = pconv(oracle::random_tensor({3, 2, 3, 3}, rng), oracle::random_tensor({3}, rng), 2);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = oracle::random_tensor({2, 8, 10}, rng);
    const auto m = oracle::random_mask(8, 10, 0.3, rng);
    const auto base = partial_conv(layer, feature(x), m).first.data.value();
    for (int c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i]) x.channel(c)[i] += 100.0 * (1 + c);
      }
    }
    EXPECT_EQ(partial_conv(layer, feature(x), m).first.data.value(), base);
  }
}

TEST(PartialConv, FullMaskEqualsDenseConv) {
  std::mt19937_64 rng(13);
  for (int stride : {1, 2}) {
    const auto x = oracle::random_tensor({3, 8, 8}, rng);
    const auto layer = pconv(oracle::random_tensor({4, 3, 3, 3}, rng), oracle::random_tensor({4}, rng), stride);
    const auto out = partial_conv(layer, feature(x), BinaryMask(8, 8, true)).first.data.value();
    const auto dense = oracle::dense_conv(x, layer.weight.value(), &layer.bias.value(), stride);
    EXPECT_LT(oracle::max_rel_diff(out, dense), 1e-12);
  }
}

TEST(PartialConv, ChannelMismatchRejected) {
  const auto layer = pconv(Tensor<double>(std::vector<int>{1, 2, 3, 3}), Tensor<double>(std::vector<int>{1}), 1);
  EXPECT_THROW(partial_conv(layer, feature(Tensor<double>(3, 4, 4)), BinaryMask(4, 4, true)), InputError);
  EXPECT_THROW(partial_conv(layer, feature(Tensor<double>(2, 4, 4)), BinaryMask(4, 5, true)), InputError);
}

TEST(MaskPropagation, Monotone) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m2 = oracle::random_mask(12, 16, 0.1, rng);
    const auto extra = oracle::random_mask(12, 16, 0.1, rng);
    BinaryMask m1 = m2;
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (extra.at(y, x)) m1.set(y, x, true);
      }
    }
    const auto u1 = propagate_mask(m1, 3, 2).updated, u2 = propagate_mask(m2, 3, 2).updated;
    EXPECT_EQ(u1 & u2, u2);
  }
}

TEST(GatedConv, ZeroGateHalvesFeature) {
  std::mt19937_64 rng(3);
  const auto fw = oracle::random_tensor({2, 2, 3, 3}, rng);
  const GatedConvLayer<double> layer{V::parameter(fw), V::parameter(Tensor<double>(std::vector<int>{2, 2, 3, 3})),
                                     V::parameter(Tensor<double>(std::vector<int>{2})), V::parameter(Tensor<double>(std::vector<int>{2})), 1};
  const auto x = oracle::random_tensor({2, 5, 5}, rng);
  const auto out = gated_conv(layer, feature(x)).data.value();
  const auto conv = oracle::dense_conv(x, fw, nullptr, 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double elu = conv[i] > 0 ? conv[i] : std::expm1(conv[i]);
    EXPECT_NEAR(out[i], 0.5 * elu, 1e-14);
  }
}

TEST(GatedConv, ZeroFeatureGivesZero) {
  std::mt19937_64 rng(4);
  const GatedConvLayer<double> layer{V::parameter(Tensor<double>(std::vector<int>{2, 2, 3, 3})),
                                     V::parameter(oracle::random_tensor({2, 2, 3, 3}, rng)),
                                     V::parameter(Tensor<double>(std::vector<int>{2})), V::parameter(oracle::random_tensor({2}, rng)), 1};
  EXPECT_EQ(gated_conv(layer, feature(oracle::random_tensor({2, 5, 5}, rng))).data.value().max_abs(), 0.0);
}

TEST(GatedConv, ScalarClosedForm) {
  auto run = [](double gate_weight) {
    const GatedConvLayer<double> layer{V::parameter(Tensor<double>(std::vector<int>{1, 1, 1, 1}, 2.0)),
                                       V::parameter(Tensor<double>(std::vector<int>{1, 1, 1, 1}, gate_weight)),
                                       V::parameter(Tensor<double>(std::vector<int>{1})), V::parameter(Tensor<double>(std::vector<int>{1})), 1};
    return gated_conv(layer, feature(Tensor<double>(1, 1, 1, 1.0))).data.value()[0];
  };
  EXPECT_DOUBLE_EQ(run(0.0), 1.0);
  EXPECT_NEAR(run(40.0), 2.0, 1e-12);
  EXPECT_LT(run(40.0), 2.0 + 1e-15);
}

TEST(GatedConv, GateStrictlyBetweenZeroAndOne) {
  std::mt19937_64 rng(8);
  const GatedConvLayer<double> layer{V::parameter(Tensor<double>(std::vector<int>{1, 1, 1, 1}, 1.0)),
                                     V::parameter(oracle::random_tensor({1, 1, 1, 1}, rng, 1, 2)),
                                     V::parameter(Tensor<double>(std::vector<int>{1})), V::parameter(Tensor<double>(std::vector<int>{1})), 1};
  const auto x = oracle::random_tensor({1, 4, 4}, rng, 0.1, 3);
  const auto out = gated_conv(layer, feature(x)).data.value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_GT(out[i], 0.0);
    EXPECT_LT(out[i], x[i]);
  }
}

TEST(LayerGradients, PartialConv) {
  std::mt19937_64 rng(31);
  for (int stride : {1, 2}) {
    const auto layer = pconv(oracle::random_tensor({2, 2, 3, 3}, rng), oracle::random_tensor({2}, rng), stride);
    const auto f = feature(oracle::random_tensor({2, 5, 5}, rng));
    const auto m = oracle::random_mask(5, 5, 0.5, rng);
    const auto probe = oracle::random_tensor({2, stride == 1 ? 5 : 3, stride == 1 ? 5 : 3}, rng);
    auto loss = [&] { return ops::sum(ops::mul_const(partial_conv(layer, f, m).first.data, probe)); };
    EXPECT_LT(oracle::gradient_error(loss, {layer.weight, layer.bias, f.data}), 1e-4) << "stride " << stride;
  }
}

TEST(LayerGradients, GatedConv) {
  std::mt19937_64 rng(32);
  const GatedConvLayer<double> layer{V::parameter(oracle::random_tensor({2, 3, 3, 3}, rng)),
                                     V::parameter(oracle::random_tensor({2, 3, 3, 3}, rng)),
                                     V::parameter(oracle::random_tensor({2}, rng)),
                                     V::parameter(oracle::random_tensor({2}, rng)), 2};
  const auto f = feature(oracle::random_tensor({3, 5, 5}, rng));
  const auto probe = oracle::random_tensor({2, 3, 3}, rng);
  auto loss = [&] { return ops::sum(ops::mul_const(gated_conv(layer, f).data, probe)); };
  EXPECT_LT(oracle::gradient_error(loss, {layer.feature_weight, layer.gate_weight, layer.feature_bias,
                                          layer.gate_bias, f.data}),
            1e-4);
}

TEST(DepthEncoder, DenseDepthKeepsFullMasks) {
  std::mt19937_64 rng(1);
  const auto enc = DepthEncoder<float>::init(small_config(), rng);
  const auto s = synth_scene(0, 1.0, 32);
  const auto pyr = enc.encode(s.depth);
  ASSERT_EQ(pyr.masks.size(), 5u);
  for (const auto& m : pyr.masks) EXPECT_TRUE(m.all());
}

TEST(DepthEncoder, EmptyDepthGivesZeros) {
  std::mt19937_64 rng(2);
  const auto enc = DepthEncoder<float>::init(small_config(), rng);
  const SparseDepthMap d{Tensor<float>(1, 32, 64), BinaryMask(32, 64)};
  const auto pyr = enc.encode(d);
  for (std::size_t l = 0; l < pyr.features.size(); ++l) {
    EXPECT_EQ(pyr.features[l].data.value().max_abs(), 0.0f);
    EXPECT_EQ(pyr.masks[l].count(), 0u);
  }
}

TEST(DepthEncoder, SinglePixelMaskSupport) {
  std::mt19937_64 rng(3);
  const auto enc = DepthEncoder<float>::init(small_config(), rng);
  SparseDepthMap d{Tensor<float>(1, 256, 512), BinaryMask(256, 512)};
  d.depth(0, 100, 200) = 12.0f;
  d.mask.set(100, 200, true);
  const auto pyr = enc.encode(d);
  BinaryMask ref = oracle::propagate_validity(d.mask, 3, 1);
  EXPECT_EQ(pyr.masks[0], ref);
  std::size_t prev = ref.count();
  EXPECT_EQ(prev, 9u);
  for (int l = 1; l <= 4; ++l) {
    ref = oracle::propagate_validity(ref, 3, 2);
    EXPECT_EQ(pyr.masks[l], ref) << "level " << l;
    EXPECT_GE(ref.count(), 1u);
    EXPECT_LE(ref.count(), prev);
    prev = ref.count();
  }
}

TEST(RgbEncoder, ZeroInputZeroPyramid) {
  std::mt19937_64 rng(4);
  const auto enc = RgbEncoder<float>::init(small_config(), rng);
  const MaskedRGB r{Tensor<float>(3, 32, 64), BinaryMask(32, 64)};
  for (const auto& f : enc.encode(r).features) EXPECT_EQ(f.data.value().max_abs(), 0.0f);
}

TEST(RgbEncoder, LevelShapesAt256x512) {
  std::mt19937_64 rng(5);
  const NetworkConfig cfg;
  const auto enc = RgbEncoder<float>::init(cfg, rng);
  const auto s = synth_scene(0);
  const auto pyr = enc.encode(s.input_rgb);
  const std::vector<std::vector<int>> expected = {
      {32, 256, 512}, {64, 128, 256}, {128, 64, 128}, {256, 32, 64}, {256, 16, 32}};
  ASSERT_EQ(pyr.features.size(), expected.size());
  for (std::size_t l = 0; l < expected.size(); ++l) {
    EXPECT_EQ(pyr.features[l].data.dims(), expected[l]);
    EXPECT_EQ(pyr.features[l].scale_level, static_cast<int>(l));
  }
}

TEST(Encoders, PyramidsPairUp) {
  for (int h : {16, 32, 48}) {
    std::mt19937_64 rng(6);
    const auto cfg = small_config();
    const auto de = DepthEncoder<float>::init(cfg, rng);
    const auto re = RgbEncoder<float>::init(cfg, rng);
    const auto s = synth_scene(1, 0.2, h);
    const auto dp = de.encode(s.depth), rp = re.encode(s.input_rgb);
    ASSERT_EQ(dp.features.size(), rp.features.size());
    for (std::size_t l = 0; l < dp.features.size(); ++l) {
      EXPECT_EQ(dp.features[l].data.dims(), rp.features[l].data.dims());
      EXPECT_EQ(dp.masks[l].height(), dp.features[l].height());
    }
  }
}

TEST(Encoders, IndivisibleSizeRejected) {
  std::mt19937_64 rng(7);
  const auto de = DepthEncoder<float>::init(small_config(), rng);
  const SparseDepthMap d{Tensor<float>(1, 24, 40), BinaryMask(24, 40)};
  EXPECT_THROW(de.encode(d), InputError);
}

TEST(Encoders, MaskedOutPixelsDoNotMatter) {
  std::mt19937_64 rng(8);
  const auto re = RgbEncoder<float>::init(small_config(), rng);
  const auto a = synth_scene(2, 0.07, 32);
  auto b_full = a.full_rgb;
  for (std::size_t i = 0; i < b_full.size(); ++i) b_full[i] = 1.0f - b_full[i];
  const auto b = make_layout(b_full, 32);
  // Inputs differ inside the known region only through b; outside both are zero.
  MaskedRGB c = a.input_rgb;
  for (int ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < c.rgb.plane(); ++i) {
      if (!c.mask[i]) EXPECT_EQ(b.rgb.channel(ch)[i], 0.0f);
    }
  }
  const auto pa = re.encode(a.input_rgb), pc = re.encode(c);
  for (std::size_t l = 0; l < pa.features.size(); ++l) EXPECT_EQ(pa.features[l].data.value(), pc.features[l].data.value());
}
