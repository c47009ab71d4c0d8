#pragma once

#include <vector>

#include "dgo/datamodel.hpp"
#include "dgo/ops.hpp"

namespace dgo {

/// Binary edge map.
using EdgeMap = BinaryMask;

struct EdgeLossParams {
  double canny_low = 0.1;
  double canny_high = 0.2;
  double berhu_c = 0.2;
  double blur_sigma = 1.0;
};

// ---- cross-modal attention transfer ----

/// Per-pixel mean over channels of squared values: 1 x H x W.
template <typename T>
Var<T> attention_map(const FeatureMap<T>& f);

/// || phi(f_d * (1 - m_alpha)) - phi(f_r * m_sd * (1 - m_alpha)) ||_2, with the
/// depth side detached (gradients reach f_r only).
template <typename T>
Var<T> cross_modal_loss(const FeatureMap<T>& f_d, const FeatureMap<T>& f_r, const BinaryMask& m_sd,
                        const BinaryMask& m_alpha);

// ---- edges ----

/// Luma -> 5x5 Gaussian (sigma 1.4) -> Sobel -> non-maximum suppression ->
/// hysteresis. Thresholds apply to the raw Sobel magnitude of [0,1] luma.
EdgeMap canny_edges(const Tensor<float>& img, double low, double high);

/// Normalized Gaussian kernel of radius ceil(3 sigma), row-major (2r+1)^2.
std::vector<double> gaussian_kernel(double sigma, int& radius);

/// Zero-padded Gaussian blur of a binary edge map.
Tensor<double> blur_edges(const EdgeMap& edges, double sigma);

/// Mean reverse-Huber penalty: |x| below c, (x^2 + c^2) / 2c above.
template <typename T>
Var<T> berhu(const Var<T>& x, T c);

/// berhu(blur(a) - blur(b), c) on two edge maps.
double edge_map_loss(const EdgeMap& a, const EdgeMap& b, const EdgeLossParams& p = {});

/// Edge loss between a prediction on the tape and a constant ground truth. The
/// value compares blurred Canny maps; gradients reach `pred` through a smooth
/// edge-strength surrogate (straight-through).
template <typename T>
Var<T> edge_loss(const Var<T>& pred, const Tensor<T>& gt, const EdgeLossParams& p = {});

// ---- adversarial and pixel terms ----

template <typename T>
Var<T> hinge_d_loss(const std::vector<Var<T>>& d_real, const std::vector<Var<T>>& d_fake);

template <typename T>
Var<T> hinge_g_loss(const std::vector<Var<T>>& d_fake);

/// Mean |pred - gt| with unknown-region pixels weighted `unknown_weight`.
template <typename T>
Var<T> pixel_loss(const Var<T>& pred, const Tensor<T>& gt, const BinaryMask& m_alpha,
                  double unknown_weight = 5.0);

template <typename T>
struct LossParts {
  Var<T> adv;
  Var<T> pixel;
  Var<T> edge;
  Var<T> cross_modal;
};

/// Weighted sum of the four generator terms. Undefined parts count as zero.
template <typename T>
Var<T> total_loss(const LossParts<T>& parts, const LossWeights& w);

}  // namespace dgo
