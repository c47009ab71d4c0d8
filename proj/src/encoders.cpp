#include "dgo/encoders.hpp"

#include <string>

namespace dgo {

void NetworkConfig::validate() const {
  require(channels.size() >= 2, "network needs at least one stride-2 stage");
  for (int c : channels) require(c >= 1, "channel counts must be positive");
  require(max_depth > 0, "max_depth must be positive");
}

void require_pyramid_size(int height, int width, int levels) {
  const int f = 1 << levels;
  if (height % f != 0 || width % f != 0) {
    throw InputError("input " + std::to_string(height) + "x" + std::to_string(width) +
                     " is not divisible by 2^" + std::to_string(levels));
  }
}

MaskPropagation propagate_mask(const BinaryMask& mask, int kernel, int stride) {
  const int pad = kernel / 2;
  const int ho = (mask.height() + 2 * pad - kernel) / stride + 1;
  const int wo = (mask.width() + 2 * pad - kernel) / stride + 1;
  const std::size_t n_out = static_cast<std::size_t>(ho) * wo;
  MaskPropagation out{std::vector<int>(n_out, 0), std::vector<int>(n_out, 0), BinaryMask(ho, wo)};
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      int n = 0, inside = 0;
      for (int ky = 0; ky < kernel; ++ky) {
        const int y = oy * stride - pad + ky;
        if (y < 0 || y >= mask.height()) continue;
        for (int kx = 0; kx < kernel; ++kx) {
          const int x = ox * stride - pad + kx;
          if (x < 0 || x >= mask.width()) continue;
          ++inside;
          n += mask.at(y, x) ? 1 : 0;
        }
      }
      out.counts[static_cast<std::size_t>(oy) * wo + ox] = n;
      out.window[static_cast<std::size_t>(oy) * wo + ox] = inside;
      out.updated.set(oy, ox, n > 0);
    }
  }
  return out;
}

template <typename T>
PartialConvLayer<T> PartialConvLayer<T>::init(int cout, int cin, int k, int stride, std::mt19937_64& rng) {
  auto c = Conv<T>::init(cout, cin, k, stride, rng);
  return PartialConvLayer{c.weight, c.bias, stride};
}

template <typename T>
void PartialConvLayer<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

template <typename T>
GatedConvLayer<T> GatedConvLayer<T>::init(int cout, int cin, int k, int stride, std::mt19937_64& rng) {
  auto f = Conv<T>::init(cout, cin, k, stride, rng);
  auto g = Conv<T>::init(cout, cin, k, stride, rng, 0.5);
  return GatedConvLayer{f.weight, g.weight, f.bias, g.bias, stride};
}

template <typename T>
void GatedConvLayer<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + ".feature_weight", feature_weight);
  out.emplace_back(prefix + ".feature_bias", feature_bias);
  out.emplace_back(prefix + ".gate_weight", gate_weight);
  out.emplace_back(prefix + ".gate_bias", gate_bias);
}

template <typename T>
std::pair<FeatureMap<T>, BinaryMask> partial_conv(const PartialConvLayer<T>& layer, const FeatureMap<T>& f,
                                                  const BinaryMask& m) {
  require(m.height() == f.height() && m.width() == f.width(), "partial_conv: mask does not match feature");
  require(layer.weight.value().dim(1) == f.channels(), "partial_conv: channel mismatch");
  const int k = layer.kernel();
  const auto prop = propagate_mask(m, k, layer.stride);

  // ratio = sum(I) / sum(M) over the window, zero where the window is empty.
  Tensor<T> ratio(1, prop.updated.height(), prop.updated.width());
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    ratio[i] = prop.counts[i] > 0 ? static_cast<T>(prop.window[i]) / static_cast<T>(prop.counts[i]) : T(0);
  }
  const auto masked = ops::mul_spatial(f.data, m.to_tensor<T>());
  const auto raw = ops::conv2d(masked, layer.weight, Var<T>(), layer.stride, k / 2);
  const auto biased = ops::add_channel_bias(ops::mul_spatial(raw, ratio), layer.bias);
  auto out = ops::mul_spatial(biased, prop.updated.template to_tensor<T>());
  const int level = f.scale_level + (layer.stride == 2 ? 1 : 0);
  return {FeatureMap<T>{out, level}, prop.updated};
}

template <typename T>
FeatureMap<T> gated_conv(const GatedConvLayer<T>& layer, const FeatureMap<T>& f) {
  require(layer.feature_weight.value().dim(1) == f.channels(), "gated_conv: channel mismatch");
  require(layer.feature_weight.dims() == layer.gate_weight.dims(), "gated_conv: weight shapes differ");
  const int pad = layer.kernel() / 2;
  const auto feat = ops::elu(ops::conv2d(f.data, layer.feature_weight, layer.feature_bias, layer.stride, pad));
  const auto gate = ops::sigmoid(ops::conv2d(f.data, layer.gate_weight, layer.gate_bias, layer.stride, pad));
  const int level = f.scale_level + (layer.stride == 2 ? 1 : 0);
  return {ops::mul(feat, gate), level};
}

template <typename T>
DepthEncoder<T> DepthEncoder<T>::init(const NetworkConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  DepthEncoder enc;
  enc.partial = cfg.partial_conv;
  enc.max_depth = cfg.max_depth;
  enc.stem = PartialConvLayer<T>::init(cfg.channels[0], 1, 3, 1, rng);
  for (int l = 1; l <= cfg.levels(); ++l) {
    enc.stages.push_back(PartialConvLayer<T>::init(cfg.channels[l], cfg.channels[l - 1], 3, 2, rng));
  }
  return enc;
}

template <typename T>
EncoderPyramid<T> DepthEncoder<T>::encode(const SparseDepthMap& d) const {
  const int levels = static_cast<int>(stages.size());
  require_pyramid_size(d.height(), d.width(), levels);
  Tensor<T> input(1, d.height(), d.width());
  for (std::size_t i = 0; i < input.size(); ++i) input[i] = static_cast<T>(d.depth[i] / max_depth);

  EncoderPyramid<T> pyr;
  FeatureMap<T> f{Var<T>::constant(std::move(input)), 0};
  BinaryMask m = d.mask;
  auto step = [&](const PartialConvLayer<T>& layer) {
    if (partial) {
      auto [out, updated] = partial_conv(layer, f, m);
      f = FeatureMap<T>{ops::elu(out.data), out.scale_level};
      m = std::move(updated);
    } else {
      // Ablation: ordinary convolution; validity is still tracked for the losses.
      const auto out = ops::conv2d(f.data, layer.weight, layer.bias, layer.stride, layer.kernel() / 2);
      f = FeatureMap<T>{ops::elu(out), f.scale_level + (layer.stride == 2 ? 1 : 0)};
      m = propagate_mask(m, layer.kernel(), layer.stride).updated;
    }
    pyr.features.push_back(f);
    pyr.masks.push_back(m);
  };
  step(stem);
  for (const auto& s : stages) step(s);
  return pyr;
}

template <typename T>
void DepthEncoder<T>::collect(ParamList<T>& out) const {
  stem.collect("depth.stem", out);
  for (std::size_t i = 0; i < stages.size(); ++i) stages[i].collect("depth.stage" + std::to_string(i + 1), out);
}

template <typename T>
RgbEncoder<T> RgbEncoder<T>::init(const NetworkConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  RgbEncoder enc;
  enc.stem = GatedConvLayer<T>::init(cfg.channels[0], 4, 3, 1, rng);
  for (int l = 1; l <= cfg.levels(); ++l) {
    enc.stages.push_back(GatedConvLayer<T>::init(cfg.channels[l], cfg.channels[l - 1], 3, 2, rng));
  }
  return enc;
}

template <typename T>
EncoderPyramid<T> RgbEncoder<T>::encode(const MaskedRGB& r) const {
  require_pyramid_size(r.height(), r.width(), static_cast<int>(stages.size()));
  Tensor<T> input(4, r.height(), r.width());
  const std::size_t hw = input.plane();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < hw; ++i) input.channel(c)[i] = static_cast<T>(r.rgb.channel(c)[i]);
  }
  for (std::size_t i = 0; i < hw; ++i) input.channel(3)[i] = r.mask[i] ? T(1) : T(0);

  EncoderPyramid<T> pyr;
  FeatureMap<T> f{Var<T>::constant(std::move(input)), 0};
  f = gated_conv(stem, f);
  pyr.features.push_back(f);
  for (const auto& s : stages) {
    f = gated_conv(s, f);
    pyr.features.push_back(f);
  }
  return pyr;
}

template <typename T>
void RgbEncoder<T>::collect(ParamList<T>& out) const {
  stem.collect("rgb.stem", out);
  for (std::size_t i = 0; i < stages.size(); ++i) stages[i].collect("rgb.stage" + std::to_string(i + 1), out);
}

#define DGO_INSTANTIATE_ENCODERS(T)                                                              \
  template struct PartialConvLayer<T>;                                                           \
  template struct GatedConvLayer<T>;                                                             \
  template struct DepthEncoder<T>;                                                               \
  template struct RgbEncoder<T>;                                                                 \
  template std::pair<FeatureMap<T>, BinaryMask> partial_conv(const PartialConvLayer<T>&,         \
                                                             const FeatureMap<T>&, const BinaryMask&); \
  template FeatureMap<T> gated_conv(const GatedConvLayer<T>&, const FeatureMap<T>&);

DGO_INSTANTIATE_ENCODERS(float)
DGO_INSTANTIATE_ENCODERS(double)

}  // namespace dgo
