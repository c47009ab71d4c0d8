#include "dgo/fusion.hpp"

#include <string>

namespace dgo {

template <typename T>
FusionStage<T> FusionStage<T>::init(int channels, bool guided, std::mt19937_64& rng) {
  FusionStage s;
  s.guided = guided;
  s.reduce = Conv<T>::init(channels, 2 * channels + 1, 1, 1, rng, guided ? 0.1 : 1.0);
  // Small generator weights keep tanh(kernels) near zero at the start, so the
  // dynamic branch begins close to the residual identity.
  s.generator.conv = Conv<T>::init(channels * 9, channels, 3, 1, rng, 0.05);
  s.mix = Conv<T>::init(channels, channels, 1, 1, rng, 0.5);
  return s;
}

template <typename T>
void FusionStage<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  reduce.collect(prefix + ".reduce", out);
  if (guided) {
    generator.conv.collect(prefix + ".generator", out);
    mix.collect(prefix + ".mix", out);
  }
}

namespace {

template <typename T>
void require_matched(const FeatureMap<T>& a, const FeatureMap<T>& b, const char* what) {
  if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
    throw InputError(std::string(what) + ": feature shapes differ");
  }
}

template <typename T>
Var<T> mask_channel(const BinaryMask& m, int height, int width, const char* what) {
  if (m.height() != height || m.width() != width) {
    throw InputError(std::string(what) + ": mask resolution does not match the features");
  }
  return Var<T>::constant(m.to_tensor<T>());
}

}  // namespace

template <typename T>
FeatureMap<T> make_interaction_feature(const FusionStage<T>& stage, const FeatureMap<T>& f_r,
                                       const FeatureMap<T>& f_d, const BinaryMask& m_alpha) {
  require_matched(f_r, f_d, "make_interaction_feature");
  const auto m = mask_channel<T>(m_alpha, f_r.height(), f_r.width(), "make_interaction_feature");
  const auto stack = ops::concat_channels<T>({f_r.data, f_d.data, m});
  return {ops::add(f_r.data, stage.reduce(stack)), f_r.scale_level};
}

template <typename T>
DynamicKernelField<T> generate_kernels(const KernelGenerator<T>& gen, const FeatureMap<T>& f_d) {
  require(gen.conv.in_channels() == f_d.channels(), "generate_kernels: channel mismatch");
  require(gen.conv.out_channels() == 9 * f_d.channels(), "generate_kernels: generator must emit 9C channels");
  return {ops::tanh(gen.conv(f_d.data))};
}

template <typename T>
FeatureMap<T> apply_dynamic_kernels(const DynamicKernelField<T>& field, const FeatureMap<T>& f,
                                    const Conv<T>& mix) {
  require(mix.in_channels() == f.channels() && mix.out_channels() == f.channels(),
          "apply_dynamic_kernels: mixer must map C -> C");
  const auto filtered = ops::dynamic_filter(field.kernels, f.data);
  return {ops::add(mix(filtered), f.data), f.scale_level};
}

template <typename T>
FeatureMap<T> fuse(const FusionStage<T>& stage, const FeatureMap<T>& f_r, const FeatureMap<T>& f_d,
                   const BinaryMask& m_alpha) {
  if (!stage.guided) {
    require_matched(f_r, f_d, "fuse");
    const auto m = mask_channel<T>(m_alpha, f_r.height(), f_r.width(), "fuse");
    return {stage.reduce(ops::concat_channels<T>({f_r.data, f_d.data, m})), f_r.scale_level};
  }
  const auto interaction = make_interaction_feature(stage, f_r, f_d, m_alpha);
  const auto field = generate_kernels(stage.generator, f_d);
  return apply_dynamic_kernels(field, interaction, stage.mix);
}

template <typename T>
Decoder<T> Decoder<T>::init(const NetworkConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  Decoder d;
  for (int l = 0; l <= cfg.levels(); ++l) {
    d.stages.push_back(FusionStage<T>::init(cfg.channels[l], cfg.depth_guidance, rng));
  }
  for (int l = 0; l < cfg.levels(); ++l) {
    d.up.push_back(Conv<T>::init(cfg.channels[l], cfg.channels[l + 1], 3, 1, rng));
  }
  d.head = Conv<T>::init(3, cfg.channels[0], 1, 1, rng, 0.5);
  return d;
}

template <typename T>
void Decoder<T>::collect(ParamList<T>& out) const {
  for (std::size_t l = 0; l < stages.size(); ++l) stages[l].collect("fusion.level" + std::to_string(l), out);
  for (std::size_t l = 0; l < up.size(); ++l) up[l].collect("decoder.up" + std::to_string(l), out);
  head.collect("decoder.head", out);
}

template <typename T>
Var<T> composite_known(const Var<T>& prediction, const MaskedRGB& input) {
  const auto& pv = prediction.value();
  require(pv.channels() == 3 && pv.height() == input.height() && pv.width() == input.width(),
          "composite_known: prediction does not match the input canvas");
  const auto unknown = input.mask.inverted().to_tensor<T>();
  return ops::add(ops::mul_spatial(prediction, unknown), Var<T>::constant(input.rgb.template cast<T>()));
}

template <typename T>
Var<T> fuse_and_decode(const Decoder<T>& decoder, const EncoderPyramid<T>& depth_pyr,
                       const EncoderPyramid<T>& rgb_pyr, const MaskedRGB& input) {
  const int levels = static_cast<int>(decoder.up.size());
  if (static_cast<int>(depth_pyr.features.size()) != levels + 1 ||
      static_cast<int>(rgb_pyr.features.size()) != levels + 1) {
    throw InputError("fuse_and_decode: pyramid depth does not match the decoder");
  }
  auto m_at = [&](int level) { return downsample_mask(input.mask, level); };

  FeatureMap<T> state = fuse(decoder.stages[levels], rgb_pyr.features[levels], depth_pyr.features[levels],
                             m_at(levels));
  for (int l = levels - 1; l >= 0; --l) {
    const auto up = ops::elu(decoder.up[l](ops::upsample_nearest2(state.data)));
    const auto fused = fuse(decoder.stages[l], FeatureMap<T>{up, l}, depth_pyr.features[l], m_at(l));
    state = {ops::add(fused.data, rgb_pyr.features[l].data), l};
  }
  const auto prediction = ops::sigmoid(decoder.head(state.data));
  return composite_known(prediction, input);
}

#define DGO_INSTANTIATE_FUSION(T)                                                                   \
  template struct FusionStage<T>;                                                                   \
  template struct Decoder<T>;                                                                       \
  template FeatureMap<T> make_interaction_feature(const FusionStage<T>&, const FeatureMap<T>&,      \
                                                  const FeatureMap<T>&, const BinaryMask&);         \
  template DynamicKernelField<T> generate_kernels(const KernelGenerator<T>&, const FeatureMap<T>&); \
  template FeatureMap<T> apply_dynamic_kernels(const DynamicKernelField<T>&, const FeatureMap<T>&,  \
                                               const Conv<T>&);                                     \
  template FeatureMap<T> fuse(const FusionStage<T>&, const FeatureMap<T>&, const FeatureMap<T>&,    \
                              const BinaryMask&);                                                   \
  template Var<T> composite_known(const Var<T>&, const MaskedRGB&);                                 \
  template Var<T> fuse_and_decode(const Decoder<T>&, const EncoderPyramid<T>&,                      \
                                  const EncoderPyramid<T>&, const MaskedRGB&);

DGO_INSTANTIATE_FUSION(float)
DGO_INSTANTIATE_FUSION(double)

}  // namespace dgo
