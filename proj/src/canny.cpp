#include <algorithm>
#include <cstdint>
#include <cmath>
#include <vector>

#include "dgo/losses.hpp"

namespace dgo {
namespace {

constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;
constexpr double kCannySigma = 1.4;
constexpr int kCannyRadius = 2;  // 5x5
constexpr double kTan22 = 0.41421356237309503;

std::vector<double> gaussian_1d(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  double s = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2 * sigma * sigma));
    s += k[i + radius];
  }
  for (auto& v : k) v /= s;
  return k;
}

// Separable blur with clamp-to-edge borders.
std::vector<double> blur_replicate(const std::vector<double>& img, int h, int w) {
  const auto k = gaussian_1d(kCannySigma, kCannyRadius);
  std::vector<double> tmp(img.size()), out(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -kCannyRadius; i <= kCannyRadius; ++i) {
        s += k[i + kCannyRadius] * img[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -kCannyRadius; i <= kCannyRadius; ++i) {
        s += k[i + kCannyRadius] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

}  // namespace

EdgeMap canny_edges(const Tensor<float>& img, double low, double high) {
  require(img.rank() == 3 && img.channels() == 3, "canny_edges expects a 3 x H x W image");
  if (!(low >= 0.0) || !(low < high)) throw InputError("canny_edges: thresholds must satisfy 0 <= low < high");
  const int h = img.height(), w = img.width();
  const std::size_t n = img.plane();

  std::vector<double> gray(n);
  for (std::size_t i = 0; i < n; ++i) {
    gray[i] = kLumaR * img.channel(0)[i] + kLumaG * img.channel(1)[i] + kLumaB * img.channel(2)[i];
  }
  const auto smooth = blur_replicate(gray, h, w);
  auto at = [&](int y, int x) {
    return smooth[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
  };

  std::vector<double> gx(n), gy(n), mag(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
      const double dy = (at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2 * at(y - 1, x) + at(y - 1, x + 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = dx;
      gy[i] = dy;
      mag[i] = std::hypot(dx, dy);
    }
  }

  auto mag_at = [&](int y, int x) {
    return (y < 0 || y >= h || x < 0 || x >= w) ? 0.0 : mag[static_cast<std::size_t>(y) * w + x];
  };

  // Non-maximum suppression: strictly greater than the "before" neighbour and
  // not smaller than the "after" one, so plateaus of width two keep one pixel.
  std::vector<std::uint8_t> state(n, 0);  // 0 none, 1 weak, 2 strong
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = mag[i];
      if (m < low || m == 0.0) continue;
      const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
      int dy = 0, dx = 0;
      if (ay <= ax * kTan22) {
        dx = 1;
      } else if (ax <= ay * kTan22) {
        dy = 1;
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        dy = 1;
        dx = 1;
      } else {
        dy = 1;
        dx = -1;
      }
      if (m > mag_at(y - dy, x - dx) && m >= mag_at(y + dy, x + dx)) state[i] = m >= high ? 2 : 1;
    }
  }

  // Hysteresis: grow strong pixels through 8-connected weak ones.
  EdgeMap edges(h, w);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 2) stack.push_back(i);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int y = static_cast<int>(i / w), x = static_cast<int>(i % w);
    if (edges.at(y, x)) continue;
    edges.set(y, x, true);
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const int ny = y + oy, nx = x + ox;
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] != 0 && !edges.at(ny, nx)) stack.push_back(j);
      }
    }
  }
  return edges;
}

std::vector<double> gaussian_kernel(double sigma, int& radius) {
  require(sigma > 0, "gaussian sigma must be positive");
  radius = static_cast<int>(std::ceil(3.0 * sigma));
  const auto k1 = gaussian_1d(sigma, radius);
  const int size = 2 * radius + 1;
  std::vector<double> k(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) k[static_cast<std::size_t>(y) * size + x] = k1[y] * k1[x];
  }
  return k;
}

Tensor<double> blur_edges(const EdgeMap& edges, double sigma) {
  int r = 0;
  const auto k = gaussian_kernel(sigma, r);
  const int size = 2 * r + 1;
  const int h = edges.height(), w = edges.width();
  Tensor<double> out(1, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!edges.at(y, x)) continue;
      for (int ky = -r; ky <= r; ++ky) {
        for (int kx = -r; kx <= r; ++kx) {
          const int ny = y + ky, nx = x + kx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          out(0, ny, nx) += k[static_cast<std::size_t>(ky + r) * size + (kx + r)];
        }
      }
    }
  }
  return out;
}

double edge_map_loss(const EdgeMap& a, const EdgeMap& b, const EdgeLossParams& p) {
  require(a.height() == b.height() && a.width() == b.width(), "edge_map_loss: shape mismatch");
  auto diff = blur_edges(a, p.blur_sigma);
  const auto bb = blur_edges(b, p.blur_sigma);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= bb[i];
  return berhu(Var<double>::constant(std::move(diff)), p.berhu_c).item();
}

namespace {

template <typename T>
Var<T> fixed_conv(const Var<T>& x, std::vector<int> dims, const std::vector<double>& w, int pad) {
  Tensor<T> wt(std::move(dims));
  for (std::size_t i = 0; i < w.size(); ++i) wt[i] = static_cast<T>(w[i]);
  return ops::conv2d(x, Var<T>::constant(std::move(wt)), Var<T>(), 1, pad);
}

// Smooth stand-in for the Canny map used only for gradients:
// blur(tanh(|sobel(gauss(luma))|^2 / high^2)).
template <typename T>
Var<T> soft_edges(const Var<T>& img, const EdgeLossParams& p) {
  const auto gray = fixed_conv(img, {1, 3, 1, 1}, {kLumaR, kLumaG, kLumaB}, 0);
  int r = 0;
  const auto g1 = gaussian_1d(kCannySigma, kCannyRadius);
  std::vector<double> g2;
  for (double a : g1) {
    for (double b : g1) g2.push_back(a * b);
  }
  const auto smooth = fixed_conv(gray, {1, 1, 5, 5}, g2, kCannyRadius);
  const std::vector<double> sobel = {-1, 0, 1, -2, 0, 2, -1, 0, 1,   // x
                                     -1, -2, -1, 0, 0, 0, 1, 2, 1};  // y
  const auto grad = fixed_conv(smooth, {2, 1, 3, 3}, sobel, 1);
  const auto sq = ops::scale(ops::channel_mean_square(grad), static_cast<T>(2.0 / (p.canny_high * p.canny_high)));
  const auto strength = ops::tanh(sq);
  const auto k = gaussian_kernel(p.blur_sigma, r);
  return fixed_conv(strength, {1, 1, 2 * r + 1, 2 * r + 1}, k, r);
}

}  // namespace

template <typename T>
Var<T> edge_loss(const Var<T>& pred, const Tensor<T>& gt, const EdgeLossParams& p) {
  require(pred.value().same_shape(gt), "edge_loss: prediction and ground truth differ in shape");
  const auto pred_edges = canny_edges(pred.value().template cast<float>(), p.canny_low, p.canny_high);
  const auto gt_edges = canny_edges(gt.template cast<float>(), p.canny_low, p.canny_high);
  const auto hard = blur_edges(pred_edges, p.blur_sigma).template cast<T>();
  const auto target = blur_edges(gt_edges, p.blur_sigma).template cast<T>();
  Var<T> pred_map = pred.requires_grad() ? ops::straight_through(hard, soft_edges(pred, p))
                                         : Var<T>::constant(hard);
  return berhu(ops::sub(pred_map, Var<T>::constant(target)), static_cast<T>(p.berhu_c));
}

template Var<float> edge_loss(const Var<float>&, const Tensor<float>&, const EdgeLossParams&);
template Var<double> edge_loss(const Var<double>&, const Tensor<double>&, const EdgeLossParams&);

}  // namespace dgo
