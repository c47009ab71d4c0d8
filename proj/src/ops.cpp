#include "dgo/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dgo {

template <typename T>
void backward(const Var<T>& loss) {
  require(loss.defined() && loss.value().size() == 1, "backward expects a scalar");
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Tensor<T> seed(loss.dims(), T(1));
  loss.node()->accumulate(seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    node->backward(node->grad);
    node->grad = Tensor<T>();
  }
}

template void backward<float>(const Var<float>&);
template void backward<double>(const Var<double>&);

namespace ops {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct ConvGeom {
  int cin, h, w, cout, k, stride, pad, ho, wo;
  bool pointwise() const { return k == 1 && stride == 1 && pad == 0; }
  std::size_t rows() const { return static_cast<std::size_t>(cin) * k * k; }
  std::size_t cols() const { return static_cast<std::size_t>(ho) * wo; }
};

template <typename T>
void im2col(const T* x, const ConvGeom& g, T* cols) {
  const std::size_t n = g.cols();
  for (int c = 0; c < g.cin; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        T* row = cols + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * n;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          T* out = row + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(out, out + g.wo, T(0));
            continue;
          }
          const T* xr = xc + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            out[ox] = (ix >= 0 && ix < g.w) ? xr[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, const ConvGeom& g, T* x) {
  const std::size_t n = g.cols();
  for (int c = 0; c < g.cin; ++c) {
    T* xc = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const T* row = cols + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * n;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          const T* in = row + static_cast<std::size_t>(oy) * g.wo;
          T* xr = xc + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) xr[ix] += in[ox];
          }
        }
      }
    }
  }
}

void require_same(const std::vector<int>& a, const std::vector<int>& b, const char* what) {
  if (a != b) throw InputError(std::string(what) + ": shape mismatch");
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad) {
  const auto& xv = x.value();
  const auto& wv = weight.value();
  require(xv.rank() == 3 && wv.rank() == 4, "conv2d: expects C x H x W input and 4-d weight");
  require(wv.dim(1) == xv.channels(), "conv2d: channel mismatch (weight expects " +
                                          std::to_string(wv.dim(1)) + ", input has " +
                                          std::to_string(xv.channels()) + ")");
  require(wv.dim(2) == wv.dim(3), "conv2d: kernel must be square");
  ConvGeom g{xv.channels(), xv.height(), xv.width(), wv.dim(0), wv.dim(2), stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * pad - g.k) / stride + 1;
  require(g.ho > 0 && g.wo > 0, "conv2d: output would be empty");
  if (bias.defined()) require(static_cast<int>(bias.value().size()) == g.cout, "conv2d: bias length");

  const auto K = static_cast<Eigen::Index>(g.rows());
  const auto N = static_cast<Eigen::Index>(g.cols());
  Tensor<T> out(g.cout, g.ho, g.wo);
  ConstMapMat<T> W(wv.data(), g.cout, K);
  MapMat<T> O(out.data(), g.cout, N);
  if (g.pointwise()) {
    O.noalias() = W * ConstMapMat<T>(xv.data(), K, N);
  } else {
    std::vector<T> cols(g.rows() * g.cols());
    im2col(xv.data(), g, cols.data());
    O.noalias() = W * ConstMapMat<T>(cols.data(), K, N);
  }
  if (bias.defined()) {
    const auto& b = bias.value();
    for (int c = 0; c < g.cout; ++c) {
      T* oc = out.channel(c);
      for (std::size_t i = 0; i < g.cols(); ++i) oc[i] += b[c];
    }
  }

  return make_op<T>(std::move(out), {x, weight, bias}, [x, weight, bias, g, K, N](const Tensor<T>& grad) {
    ConstMapMat<T> G(grad.data(), g.cout, N);
    std::vector<T> cols;
    const T* colp = x.value().data();
    if (weight.requires_grad() && !g.pointwise()) {
      cols.resize(g.rows() * g.cols());
      im2col(x.value().data(), g, cols.data());
      colp = cols.data();
    }
    if (weight.requires_grad()) {
      auto& gw = weight.node()->grad_buffer();
      MapMat<T>(gw.data(), g.cout, K).noalias() += G * ConstMapMat<T>(colp, K, N).transpose();
    }
    if (bias.defined() && bias.requires_grad()) {
      auto& gb = bias.node()->grad_buffer();
      for (int c = 0; c < g.cout; ++c) {
        const T* gc = grad.data() + static_cast<std::size_t>(c) * N;
        T s = 0;
        for (Eigen::Index i = 0; i < N; ++i) s += gc[i];
        gb[c] += s;
      }
    }
    if (x.requires_grad()) {
      ConstMapMat<T> W(weight.value().data(), g.cout, K);
      auto& gx = x.node()->grad_buffer();
      if (g.pointwise()) {
        MapMat<T>(gx.data(), K, N).noalias() += W.transpose() * G;
      } else {
        std::vector<T> dcols(g.rows() * g.cols());
        MapMat<T>(dcols.data(), K, N).noalias() = W.transpose() * G;
        col2im(dcols.data(), g, gx.data());
      }
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same(a.dims(), b.dims(), "add");
  Tensor<T> out = a.value();
  out += b.value();
  return make_op<T>(std::move(out), {a, b}, [a, b](const Tensor<T>& g) {
    if (a.requires_grad()) a.node()->accumulate(g);
    if (b.requires_grad()) b.node()->accumulate(g);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same(a.dims(), b.dims(), "sub");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return make_op<T>(std::move(out), {a, b}, [a, b](const Tensor<T>& g) {
    if (a.requires_grad()) a.node()->accumulate(g);
    if (b.requires_grad()) {
      auto& gb = b.node()->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same(a.dims(), b.dims(), "mul");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return make_op<T>(std::move(out), {a, b}, [a, b](const Tensor<T>& g) {
    if (a.requires_grad()) {
      auto& ga = a.node()->grad_buffer();
      const auto& bv = b.value();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.node()->grad_buffer();
      const auto& av = a.value();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  out *= s;
  return make_op<T>(std::move(out), {a}, [a, s](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
  });
}

template <typename T>
Var<T> mul_spatial(const Var<T>& a, const Tensor<T>& map) {
  const auto& av = a.value();
  require(map.rank() == 3 && map.channels() == 1 && map.height() == av.height() &&
              map.width() == av.width(),
          "mul_spatial: map must be 1 x H x W matching the feature");
  Tensor<T> out = av;
  const std::size_t hw = av.plane();
  for (int c = 0; c < av.channels(); ++c) {
    T* oc = out.channel(c);
    for (std::size_t i = 0; i < hw; ++i) oc[i] *= map[i];
  }
  return make_op<T>(std::move(out), {a}, [a, map](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    const std::size_t hw = map.size();
    for (int c = 0; c < ga.channels(); ++c) {
      const T* gc = g.channel(c);
      T* dc = ga.channel(c);
      for (std::size_t i = 0; i < hw; ++i) dc[i] += gc[i] * map[i];
    }
  });
}

template <typename T>
Var<T> mul_const(const Var<T>& a, const Tensor<T>& c) {
  require_same(a.dims(), c.dims(), "mul_const");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  return make_op<T>(std::move(out), {a}, [a, c](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c[i];
  });
}

template <typename T>
Var<T> add_channel_bias(const Var<T>& a, const Var<T>& bias) {
  const auto& av = a.value();
  require(static_cast<int>(bias.value().size()) == av.channels(), "add_channel_bias: length");
  Tensor<T> out = av;
  const std::size_t hw = av.plane();
  for (int c = 0; c < av.channels(); ++c) {
    T* oc = out.channel(c);
    for (std::size_t i = 0; i < hw; ++i) oc[i] += bias.value()[c];
  }
  return make_op<T>(std::move(out), {a, bias}, [a, bias](const Tensor<T>& g) {
    if (a.requires_grad()) a.node()->accumulate(g);
    if (bias.requires_grad()) {
      auto& gb = bias.node()->grad_buffer();
      const std::size_t hw = g.plane();
      for (int c = 0; c < g.channels(); ++c) {
        const T* gc = g.channel(c);
        T s = 0;
        for (std::size_t i = 0; i < hw; ++i) s += gc[i];
        gb[c] += s;
      }
    }
  });
}

namespace {

// Pointwise op whose derivative is recomputed from the input.
template <typename T, typename F, typename D>
Var<T> pointwise(const Var<T>& a, F f, D df) {
  Tensor<T> out = a.value();
  for (auto& v : out.span()) v = f(v);
  return make_op<T>(std::move(out), {a}, [a, df](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    const auto& av = a.value();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(av[i]);
  });
}

template <typename T>
T sigmoid_scalar(T v) {
  return v >= 0 ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
}

}  // namespace

template <typename T>
Var<T> elu(const Var<T>& a) {
  return pointwise(
      a, [](T v) { return v > 0 ? v : std::expm1(v); },
      [](T v) { return v > 0 ? T(1) : std::exp(v); });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return pointwise(
      a, [](T v) { return sigmoid_scalar(v); },
      [](T v) {
        const T s = sigmoid_scalar(v);
        return s * (T(1) - s);
      });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return pointwise(
      a, [](T v) { return std::tanh(v); },
      [](T v) {
        const T t = std::tanh(v);
        return T(1) - t * t;
      });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  return pointwise(
      a, [](T v) { return v > 0 ? v : T(0); }, [](T v) { return v > 0 ? T(1) : T(0); });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope) {
  return pointwise(
      a, [slope](T v) { return v > 0 ? v : slope * v; },
      [slope](T v) { return v > 0 ? T(1) : slope; });
}

template <typename T>
Var<T> abs(const Var<T>& a) {
  return pointwise(
      a, [](T v) { return std::abs(v); },
      [](T v) { return v > 0 ? T(1) : (v < 0 ? T(-1) : T(0)); });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat_channels: no inputs");
  const int h = parts[0].value().height();
  const int w = parts[0].value().width();
  int total = 0;
  for (const auto& p : parts) {
    require(p.value().rank() == 3 && p.value().height() == h && p.value().width() == w,
            "concat_channels: spatial mismatch");
    total += p.value().channels();
  }
  Tensor<T> out(total, h, w);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + offset);
    offset += p.value().size();
  }
  return make_op<T>(std::move(out), parts, [parts](const Tensor<T>& g) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      const std::size_t n = p.value().size();
      if (p.requires_grad()) {
        auto& gp = p.node()->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

template <typename T>
Var<T> upsample_nearest2(const Var<T>& a) {
  const auto& av = a.value();
  const int c = av.channels(), h = av.height(), w = av.width();
  Tensor<T> out(c, 2 * h, 2 * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < 2 * h; ++y) {
      for (int x = 0; x < 2 * w; ++x) out(ch, y, x) = av(ch, y / 2, x / 2);
    }
  }
  return make_op<T>(std::move(out), {a}, [a](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    for (int ch = 0; ch < g.channels(); ++ch) {
      for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) ga(ch, y / 2, x / 2) += g(ch, y, x);
      }
    }
  });
}

template <typename T>
Var<T> dynamic_filter(const Var<T>& field, const Var<T>& f) {
  const auto& fv = f.value();
  const auto& kv = field.value();
  const int c = fv.channels(), h = fv.height(), w = fv.width();
  require(kv.rank() == 3 && kv.channels() == 9 * c && kv.height() == h && kv.width() == w,
          "dynamic_filter: kernel field must be (9C) x H x W matching the feature");
  Tensor<T> out(c, h, w);
  for (int ch = 0; ch < c; ++ch) {
    for (int o = 0; o < 9; ++o) {
      const int dy = o / 3 - 1, dx = o % 3 - 1;
      const T* kc = kv.channel(ch * 9 + o);
      for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
        const T* krow = kc + static_cast<std::size_t>(y) * w;
        const T* frow = fv.channel(ch) + static_cast<std::size_t>(y + dy) * w;
        T* orow = out.channel(ch) + static_cast<std::size_t>(y) * w;
        for (int x = std::max(0, -dx); x < std::min(w, w - dx); ++x) orow[x] += krow[x] * frow[x + dx];
      }
    }
  }
  return make_op<T>(std::move(out), {field, f}, [field, f](const Tensor<T>& g) {
    const auto& fv = f.value();
    const auto& kv = field.value();
    const int c = fv.channels(), h = fv.height(), w = fv.width();
    Tensor<T>* gk = field.requires_grad() ? &field.node()->grad_buffer() : nullptr;
    Tensor<T>* gf = f.requires_grad() ? &f.node()->grad_buffer() : nullptr;
    for (int ch = 0; ch < c; ++ch) {
      for (int o = 0; o < 9; ++o) {
        const int dy = o / 3 - 1, dx = o % 3 - 1;
        for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
          const std::size_t row = static_cast<std::size_t>(y) * w;
          const std::size_t srow = static_cast<std::size_t>(y + dy) * w;
          const T* grow = g.channel(ch) + row;
          for (int x = std::max(0, -dx); x < std::min(w, w - dx); ++x) {
            if (gk) gk->channel(ch * 9 + o)[row + x] += grow[x] * fv.channel(ch)[srow + x + dx];
            if (gf) gf->channel(ch)[srow + x + dx] += grow[x] * kv.channel(ch * 9 + o)[row + x];
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> channel_mean_square(const Var<T>& f) {
  const auto& fv = f.value();
  const int c = fv.channels();
  Tensor<T> out(1, fv.height(), fv.width());
  const std::size_t hw = fv.plane();
  for (int ch = 0; ch < c; ++ch) {
    const T* fc = fv.channel(ch);
    for (std::size_t i = 0; i < hw; ++i) out[i] += fc[i] * fc[i];
  }
  out *= T(1) / T(c);
  return make_op<T>(std::move(out), {f}, [f](const Tensor<T>& g) {
    const auto& fv = f.value();
    auto& gf = f.node()->grad_buffer();
    const T s = T(2) / T(fv.channels());
    const std::size_t hw = fv.plane();
    for (int ch = 0; ch < fv.channels(); ++ch) {
      const T* fc = fv.channel(ch);
      T* dc = gf.channel(ch);
      for (std::size_t i = 0; i < hw; ++i) dc[i] += s * fc[i] * g[i];
    }
  });
}

template <typename T>
Var<T> sum_spatial(const Var<T>& f) {
  const auto& fv = f.value();
  Tensor<T> out(fv.channels(), 1, 1);
  for (int c = 0; c < fv.channels(); ++c) {
    const T* fc = fv.channel(c);
    T s = 0;
    for (std::size_t i = 0; i < fv.plane(); ++i) s += fc[i];
    out[c] = s;
  }
  return make_op<T>(std::move(out), {f}, [f](const Tensor<T>& g) {
    auto& gf = f.node()->grad_buffer();
    for (int c = 0; c < gf.channels(); ++c) {
      T* dc = gf.channel(c);
      for (std::size_t i = 0; i < gf.plane(); ++i) dc[i] += g[c];
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  Tensor<T> out({1}, a.value().sum());
  return make_op<T>(std::move(out), {a}, [a](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    for (auto& v : ga.span()) v += g[0];
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  const T n = static_cast<T>(a.value().size());
  Tensor<T> out({1}, a.value().sum() / n);
  return make_op<T>(std::move(out), {a}, [a, n](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    for (auto& v : ga.span()) v += g[0] / n;
  });
}

template <typename T>
Var<T> l2_norm(const Var<T>& a) {
  T ss = 0;
  for (T v : a.value().span()) ss += v * v;
  const T norm = std::sqrt(ss);
  return make_op<T>(Tensor<T>({1}, norm), {a}, [a, norm](const Tensor<T>& g) {
    if (norm == T(0)) return;
    auto& ga = a.node()->grad_buffer();
    const auto& av = a.value();
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g[0] * av[i] / norm;
  });
}

template <typename T>
Var<T> berhu_mean(const Var<T>& a, T c) {
  require(c > 0, "berhu: threshold must be positive");
  const T n = static_cast<T>(a.value().size());
  T s = 0;
  for (T v : a.value().span()) {
    const T m = std::abs(v);
    s += m <= c ? m : (v * v + c * c) / (T(2) * c);
  }
  return make_op<T>(Tensor<T>({1}, s / n), {a}, [a, c, n](const Tensor<T>& g) {
    auto& ga = a.node()->grad_buffer();
    const auto& av = a.value();
    for (std::size_t i = 0; i < av.size(); ++i) {
      const T v = av[i];
      const T d = std::abs(v) <= c ? (v > 0 ? T(1) : (v < 0 ? T(-1) : T(0))) : v / c;
      ga[i] += g[0] * d / n;
    }
  });
}

template <typename T>
Var<T> straight_through(const Tensor<T>& hard, const Var<T>& soft) {
  require_same(hard.dims(), soft.dims(), "straight_through");
  return make_op<T>(hard, {soft}, [soft](const Tensor<T>& g) { soft.node()->accumulate(g); });
}

template <typename T>
Var<T> spectral_normalize(const Var<T>& w, const Tensor<T>& u, const Tensor<T>& v) {
  const auto& wv = w.value();
  const int rows = wv.dim(0);
  const auto cols = static_cast<Eigen::Index>(wv.size() / rows);
  require(static_cast<int>(u.size()) == rows && static_cast<Eigen::Index>(v.size()) == cols,
          "spectral_normalize: power-iteration vector size");
  ConstMapMat<T> W(wv.data(), rows, cols);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> uv(u.data(), rows);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> vv(v.data(), cols);
  const T sigma = uv.dot(W * vv);
  require(sigma > 0, "spectral_normalize: degenerate singular value estimate");
  Tensor<T> out = wv;
  out *= T(1) / sigma;
  return make_op<T>(std::move(out), {w}, [w, u, v, sigma, rows, cols](const Tensor<T>& g) {
    // d(W/s) with s = u^T W v:  (G - <G, W/s> u v^T) / s
    const auto& wv = w.value();
    T inner = 0;
    for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * wv[i];
    inner /= sigma;
    auto& gw = w.node()->grad_buffer();
    for (int r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * cols + c;
        gw[i] += (g[i] - inner * u[r] * v[c]) / sigma;
      }
    }
  });
}

#define DGO_INSTANTIATE_OPS(T)                                                                   \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int);                 \
  template Var<T> add(const Var<T>&, const Var<T>&);                                             \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                             \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                             \
  template Var<T> scale(const Var<T>&, T);                                                       \
  template Var<T> mul_spatial(const Var<T>&, const Tensor<T>&);                                  \
  template Var<T> mul_const(const Var<T>&, const Tensor<T>&);                                    \
  template Var<T> add_channel_bias(const Var<T>&, const Var<T>&);                                \
  template Var<T> elu(const Var<T>&);                                                            \
  template Var<T> sigmoid(const Var<T>&);                                                        \
  template Var<T> tanh(const Var<T>&);                                                           \
  template Var<T> relu(const Var<T>&);                                                           \
  template Var<T> leaky_relu(const Var<T>&, T);                                                  \
  template Var<T> abs(const Var<T>&);                                                            \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                                   \
  template Var<T> upsample_nearest2(const Var<T>&);                                              \
  template Var<T> dynamic_filter(const Var<T>&, const Var<T>&);                                  \
  template Var<T> channel_mean_square(const Var<T>&);                                            \
  template Var<T> sum_spatial(const Var<T>&);                                                    \
  template Var<T> sum(const Var<T>&);                                                            \
  template Var<T> mean(const Var<T>&);                                                           \
  template Var<T> l2_norm(const Var<T>&);                                                        \
  template Var<T> berhu_mean(const Var<T>&, T);                                                  \
  template Var<T> straight_through(const Tensor<T>&, const Var<T>&);                             \
  template Var<T> spectral_normalize(const Var<T>&, const Tensor<T>&, const Tensor<T>&);

DGO_INSTANTIATE_OPS(float)
DGO_INSTANTIATE_OPS(double)

}  // namespace ops
}  // namespace dgo
