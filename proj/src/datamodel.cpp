#include "dgo/datamodel.hpp"

#include <cmath>
#include <string>

namespace dgo {

BinaryMask::BinaryMask(int height, int width, bool value)
    : height_(height), width_(width),
      bits_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), value ? 1 : 0) {
  require(height >= 0 && width >= 0, "mask dimensions must be non-negative");
}

BinaryMask BinaryMask::from_values(int height, int width, const std::vector<float>& values) {
  require(values.size() == static_cast<std::size_t>(height) * width, "mask value count");
  BinaryMask m(height, width);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0f && values[i] != 1.0f) throw InputError("mask is not binary");
    m.bits_[i] = values[i] == 1.0f ? 1 : 0;
  }
  return m;
}

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

BinaryMask BinaryMask::operator&(const BinaryMask& o) const {
  require(height_ == o.height_ && width_ == o.width_, "mask shape mismatch");
  BinaryMask out(height_, width_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & o.bits_[i];
  return out;
}

BinaryMask BinaryMask::inverted() const {
  BinaryMask out(height_, width_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] ? 0 : 1;
  return out;
}

BinaryMask downsample_mask(const BinaryMask& mask, int level) {
  require(level >= 0, "downsample level must be non-negative");
  if (level == 0) return mask;
  const int f = 1 << level;
  require(mask.height() % f == 0 && mask.width() % f == 0,
          "mask of size " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
              " is not divisible by 2^" + std::to_string(level));
  BinaryMask out(mask.height() / f, mask.width() / f);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.set(y, x, mask.at(y * f, x * f));
  }
  return out;
}

void LossWeights::validate() const {
  for (double w : {adv, pixel, edge, cross_modal}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("loss weights must be finite and non-negative");
  }
  if (adv + pixel + edge + cross_modal <= 0.0) throw InputError("at least one loss weight must be positive");
}

bool is_single_rectangle(const BinaryMask& mask) {
  int y0 = mask.height(), y1 = -1, x0 = mask.width(), x1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(y, x)) continue;
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
  }
  if (y1 < 0) return false;
  const auto area = static_cast<std::size_t>(y1 - y0 + 1) * static_cast<std::size_t>(x1 - x0 + 1);
  return area == mask.count();
}

void validate_depth(const SparseDepthMap& d) {
  const auto& t = d.depth;
  require(t.rank() == 3 && t.channels() == 1, "depth must be a single-channel grid");
  require(t.height() == d.mask.height() && t.width() == d.mask.width(), "depth/mask shape mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) throw InputError("depth contains non-finite values");
    if (t[i] < 0.0f) throw InputError("depth contains negative values");
    if (!d.mask[i] && t[i] != 0.0f) throw InputError("depth has a nonzero value under a zero mask");
  }
}

void validate_rgb(const MaskedRGB& r) {
  const auto& t = r.rgb;
  require(t.rank() == 3 && t.channels() == 3, "rgb must have three channels");
  require(t.height() == r.mask.height() && t.width() == r.mask.width(), "rgb/mask shape mismatch");
  const std::size_t hw = t.plane();
  for (int c = 0; c < 3; ++c) {
    const float* ch = t.channel(c);
    for (std::size_t i = 0; i < hw; ++i) {
      if (!std::isfinite(ch[i])) throw InputError("rgb contains non-finite values");
      if (ch[i] < 0.0f || ch[i] > 1.0f) throw InputError("rgb outside [0,1]");
      if (!r.mask[i] && ch[i] != 0.0f) throw InputError("rgb has a nonzero value under a zero mask");
    }
  }
  require(is_single_rectangle(r.mask), "known-region mask must be a single rectangle");
}

void validate_pair(const SparseDepthMap& d, const MaskedRGB& r) {
  if (d.height() != r.height() || d.width() != r.width()) {
    throw InputError("shape mismatch: depth " + std::to_string(d.height()) + "x" +
                     std::to_string(d.width()) + " vs rgb " + std::to_string(r.height()) + "x" +
                     std::to_string(r.width()));
  }
  validate_depth(d);
  validate_rgb(r);
}

}  // namespace dgo
