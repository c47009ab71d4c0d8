#pragma once

#include <random>
#include <vector>

#include "dgo/encoders.hpp"

namespace dgo {

inline constexpr int kDynamicKernelSize = 3;

/// Per-pixel, per-channel 3x3 depthwise kernels: (9C) x H x W, tap index
/// c*9 + (dy+1)*3 + (dx+1).
template <typename T>
struct DynamicKernelField {
  Var<T> kernels;

  int channels() const { return kernels.value().channels() / 9; }
};

/// 3x3 convolution from C depth channels to C*9 kernel channels.
template <typename T>
struct KernelGenerator {
  Conv<T> conv;
};

template <typename T>
struct FusionStage {
  Conv<T> reduce;  // 1x1, 2C+1 -> C
  KernelGenerator<T> generator;
  Conv<T> mix;  // 1x1, C -> C
  bool guided = true;

  static FusionStage init(int channels, bool guided, std::mt19937_64& rng);
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// F'_R = f_r + reduce(concat(f_r, f_d, m_alpha)).
template <typename T>
FeatureMap<T> make_interaction_feature(const FusionStage<T>& stage, const FeatureMap<T>& f_r,
                                       const FeatureMap<T>& f_d, const BinaryMask& m_alpha);

/// tanh(conv3x3(f_d)) reshaped to a kernel field.
template <typename T>
DynamicKernelField<T> generate_kernels(const KernelGenerator<T>& gen, const FeatureMap<T>& f_d);

/// mix(depthwise(field, f)) + f.
template <typename T>
FeatureMap<T> apply_dynamic_kernels(const DynamicKernelField<T>& field, const FeatureMap<T>& f,
                                    const Conv<T>& mix);

/// One fusion stage. With guidance disabled the stage is reduce(concat(...)) only.
template <typename T>
FeatureMap<T> fuse(const FusionStage<T>& stage, const FeatureMap<T>& f_r, const FeatureMap<T>& f_d,
                   const BinaryMask& m_alpha);

template <typename T>
struct Decoder {
  std::vector<Conv<T>> up;             // up[n]: 3x3, C_{n+1} -> C_n, applied after 2x upsampling
  std::vector<FusionStage<T>> stages;  // one per level 0..L
  Conv<T> head;                        // 1x1, C_0 -> 3

  static Decoder init(const NetworkConfig& cfg, std::mt19937_64& rng);
  void collect(ParamList<T>& out) const;
};

/// Progressive fusion from the bottleneck up, RGB skips at every level, sigmoid
/// head, then the known region is copied back from `input`.
template <typename T>
Var<T> fuse_and_decode(const Decoder<T>& decoder, const EncoderPyramid<T>& depth_pyr,
                       const EncoderPyramid<T>& rgb_pyr, const MaskedRGB& input);

/// M_alpha * known + (1 - M_alpha) * prediction.
template <typename T>
Var<T> composite_known(const Var<T>& prediction, const MaskedRGB& input);

}  // namespace dgo
