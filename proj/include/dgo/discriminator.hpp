#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dgo/datamodel.hpp"
#include "dgo/layers.hpp"

namespace dgo {

/// Convolution whose weight is divided by a power-iteration estimate of its
/// top singular value (weight viewed as Cout x (Cin k k)).
template <typename T>
struct SpectralConv {
  Var<T> weight;
  Var<T> bias;  // may be undefined
  Tensor<T> u, v;
  int stride = 1;

  static SpectralConv init(int cout, int cin, int k, int stride, bool with_bias, std::mt19937_64& rng);

  /// Runs `iterations` rounds of power iteration, warm-started from u.
  void refresh(int iterations);
  Var<T> normalized_weight() const { return ops::spectral_normalize(weight, u, v); }
  Var<T> operator()(const Var<T>& x) const;
};

struct DiscriminatorConfig {
  std::vector<int> channels{32, 64, 128, 256, 256};
  int cond_dim = 256;
  int power_iterations = 1;  // per refresh during training
  double leaky_slope = 0.2;
};

/// Stride-2 spectrally-normalized convolutions over RGB + M_alpha, a linear head
/// on globally summed features and a projection term for the condition vector.
template <typename T>
struct Discriminator {
  DiscriminatorConfig config;
  std::vector<SpectralConv<T>> convs;
  SpectralConv<T> head;        // 1 x C, on C x 1 x 1
  SpectralConv<T> projection;  // cond_dim x C, no bias

  static Discriminator init(const DiscriminatorConfig& cfg, std::uint64_t seed);

  /// Converges every power-iteration state; called once after init or load.
  void converge_spectral_state(int max_iterations = 2000, double tol = 1e-9);
  void refresh_spectral_state(int iterations);

  Var<T> discriminate(const Var<T>& img, const BinaryMask& m_alpha, const Tensor<T>& cond) const;

  ParamList<T> parameters() const;
  std::vector<SpectralConv<T>*> spectral_layers();
  std::vector<const SpectralConv<T>*> spectral_layers() const;
};

}  // namespace dgo
