#include "dgo/generator.hpp"

namespace dgo {

template <typename T>
Generator<T> Generator<T>::init(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  Generator g;
  g.config = cfg;
  g.depth_encoder = DepthEncoder<T>::init(cfg, rng);
  g.rgb_encoder = RgbEncoder<T>::init(cfg, rng);
  g.decoder = Decoder<T>::init(cfg, rng);
  return g;
}

template <typename T>
GeneratorOutput<T> Generator<T>::forward(const SparseDepthMap& depth, const MaskedRGB& input) const {
  require(depth.height() == input.height() && depth.width() == input.width(),
          "generator: depth and rgb canvases differ");
  GeneratorOutput<T> out;
  out.depth = depth_encoder.encode(depth);
  out.rgb_features = rgb_encoder.encode(input);
  out.rgb = fuse_and_decode(decoder, out.depth, out.rgb_features, input);
  return out;
}

template <typename T>
ParamList<T> Generator<T>::parameters() const {
  ParamList<T> out;
  depth_encoder.collect(out);
  rgb_encoder.collect(out);
  decoder.collect(out);
  return out;
}

template <typename T>
Tensor<T> condition_vector(const EncoderPyramid<T>& rgb_pyr, const BinaryMask& m_alpha) {
  const auto& f = rgb_pyr.features.back().data.value();
  const int level = rgb_pyr.features.back().scale_level;
  const auto m = downsample_mask(m_alpha, level);
  require(m.height() == f.height() && m.width() == f.width(), "condition_vector: mask resolution");
  Tensor<T> out(f.channels(), 1, 1);
  const auto n = static_cast<T>(m.count());
  if (n == T(0)) return out;
  for (int c = 0; c < f.channels(); ++c) {
    const T* fc = f.channel(c);
    T s = 0;
    for (std::size_t i = 0; i < f.plane(); ++i) {
      if (m[i]) s += fc[i];
    }
    out[c] = s / n;
  }
  return out;
}

template struct Generator<float>;
template struct Generator<double>;
template Tensor<float> condition_vector(const EncoderPyramid<float>&, const BinaryMask&);
template Tensor<double> condition_vector(const EncoderPyramid<double>&, const BinaryMask&);

}  // namespace dgo
