#pragma once

#include <cstdint>

#include "dgo/fusion.hpp"
#include "dgo/ingestion.hpp"

namespace dgo {

template <typename T>
struct GeneratorOutput {
  Var<T> rgb;  // 3 x H x W in [0,1], known region copied from the input
  EncoderPyramid<T> depth;
  EncoderPyramid<T> rgb_features;
};

/// Depth encoder + RGB encoder + fusion decoder.
template <typename T>
struct Generator {
  NetworkConfig config;
  DepthEncoder<T> depth_encoder;
  RgbEncoder<T> rgb_encoder;
  Decoder<T> decoder;

  static Generator init(const NetworkConfig& cfg, std::uint64_t seed);

  GeneratorOutput<T> forward(const SparseDepthMap& depth, const MaskedRGB& input) const;
  GeneratorOutput<T> forward(const Sample& s) const { return forward(s.depth, s.input_rgb); }

  ParamList<T> parameters() const;
};

/// Mean of the bottleneck RGB feature over the known region (detached): the
/// discriminator's condition vector, C x 1 x 1.
template <typename T>
Tensor<T> condition_vector(const EncoderPyramid<T>& rgb_pyr, const BinaryMask& m_alpha);

}  // namespace dgo
