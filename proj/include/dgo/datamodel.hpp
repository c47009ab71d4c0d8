#pragma once

#include <cstdint>
#include <vector>

#include "dgo/autograd.hpp"
#include "dgo/tensor.hpp"

namespace dgo {

/// H x W grid of {0,1}. Stored as bytes but only ever holds 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, bool value = false);

  /// Rejects any value other than exactly 0 or 1.
  static BinaryMask from_values(int height, int width, const std::vector<float>& values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int y, int x) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int y, int x, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }

  std::size_t count() const;
  bool all() const { return count() == size(); }
  bool none() const { return count() == 0; }

  BinaryMask operator&(const BinaryMask& o) const;
  BinaryMask inverted() const;

  /// 1 x H x W tensor of 0/1 values.
  template <typename T>
  Tensor<T> to_tensor() const {
    Tensor<T> t(1, height_, width_);
    for (std::size_t i = 0; i < bits_.size(); ++i) t[i] = bits_[i] ? T(1) : T(0);
    return t;
  }

  bool operator==(const BinaryMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Nearest-neighbour 2^level reduction: output(y, x) = mask(y * 2^level, x * 2^level).
BinaryMask downsample_mask(const BinaryMask& mask, int level);

/// Single-channel LiDAR depth in meters, 0 at invalid pixels.
struct SparseDepthMap {
  Tensor<float> depth;  // 1 x H x W
  BinaryMask mask;      // M_SD

  int height() const { return mask.height(); }
  int width() const { return mask.width(); }
};

/// RGB in [0,1] with the known-region mask; rgb is zero wherever mask is zero.
struct MaskedRGB {
  Tensor<float> rgb;  // 3 x H x W
  BinaryMask mask;    // M_alpha

  int height() const { return mask.height(); }
  int width() const { return mask.width(); }
};

/// Feature map on the tape plus the number of 2x downsamplings it has seen.
template <typename T>
struct FeatureMap {
  Var<T> data;
  int scale_level = 0;

  int channels() const { return data.value().channels(); }
  int height() const { return data.value().height(); }
  int width() const { return data.value().width(); }
};

/// Trade-off weights of the generator objective.
struct LossWeights {
  double adv = 0.1;
  double pixel = 1.0;
  double edge = 0.5;
  double cross_modal = 0.05;

  void validate() const;
};

/// Axis-aligned rectangle of ones test for M_alpha.
bool is_single_rectangle(const BinaryMask& mask);

void validate_depth(const SparseDepthMap& d);
void validate_rgb(const MaskedRGB& r);

/// Throws InputError unless both are internally consistent and equal-sized.
void validate_pair(const SparseDepthMap& d, const MaskedRGB& r);

}  // namespace dgo
