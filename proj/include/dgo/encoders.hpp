#pragma once

#include <random>
#include <utility>
#include <vector>

#include "dgo/datamodel.hpp"
#include "dgo/layers.hpp"

namespace dgo {

/// Architecture knobs shared by the generator pieces.
struct NetworkConfig {
  /// Channels per pyramid level; level 0 is the full-resolution stem, each later
  /// level is a stride-2 stage.
  std::vector<int> channels{32, 64, 128, 256, 256};
  bool depth_guidance = true;  // false: concat + 1x1 fusion instead of dynamic kernels
  bool partial_conv = true;    // false: dense convolution on the depth branch
  double max_depth = 80.0;     // meters mapped to 1.0 at the depth-branch input

  int levels() const { return static_cast<int>(channels.size()) - 1; }
  void validate() const;
};

/// Convolution restricted to valid pixels with per-window renormalization.
template <typename T>
struct PartialConvLayer {
  Var<T> weight;  // Cout x Cin x k x k
  Var<T> bias;    // Cout
  int stride = 1;

  int kernel() const { return weight.value().dim(2); }
  static PartialConvLayer init(int cout, int cin, int k, int stride, std::mt19937_64& rng);
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Paired feature / gate convolutions.
template <typename T>
struct GatedConvLayer {
  Var<T> feature_weight, gate_weight;
  Var<T> feature_bias, gate_bias;
  int stride = 1;

  int kernel() const { return feature_weight.value().dim(2); }
  static GatedConvLayer init(int cout, int cin, int k, int stride, std::mt19937_64& rng);
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Valid-pixel counts under each k x k output window (zero padding) and the
/// binarized mask (count >= 1) for the next layer.
struct MaskPropagation {
  std::vector<int> counts;  // valid inputs per window
  std::vector<int> window;  // in-image positions per window (k^2 away from the border)
  BinaryMask updated;
};
MaskPropagation propagate_mask(const BinaryMask& mask, int kernel, int stride);

/// One partial-convolution step. Returns the feature at the output resolution
/// and the updated validity mask.
template <typename T>
std::pair<FeatureMap<T>, BinaryMask> partial_conv(const PartialConvLayer<T>& layer, const FeatureMap<T>& f,
                                                  const BinaryMask& m);

/// ELU(feature conv) * sigmoid(gate conv).
template <typename T>
FeatureMap<T> gated_conv(const GatedConvLayer<T>& layer, const FeatureMap<T>& f);

template <typename T>
struct EncoderPyramid {
  std::vector<FeatureMap<T>> features;  // level 0..L
  std::vector<BinaryMask> masks;        // depth branch only: M_SD per level
};

template <typename T>
struct DepthEncoder {
  PartialConvLayer<T> stem;
  std::vector<PartialConvLayer<T>> stages;
  bool partial = true;
  double max_depth = 80.0;

  static DepthEncoder init(const NetworkConfig& cfg, std::mt19937_64& rng);
  EncoderPyramid<T> encode(const SparseDepthMap& d) const;
  void collect(ParamList<T>& out) const;
};

template <typename T>
struct RgbEncoder {
  GatedConvLayer<T> stem;  // consumes RGB + M_alpha
  std::vector<GatedConvLayer<T>> stages;

  static RgbEncoder init(const NetworkConfig& cfg, std::mt19937_64& rng);
  EncoderPyramid<T> encode(const MaskedRGB& r) const;
  void collect(ParamList<T>& out) const;
};

/// Divisibility check for an L-level pyramid.
void require_pyramid_size(int height, int width, int levels);

}  // namespace dgo
