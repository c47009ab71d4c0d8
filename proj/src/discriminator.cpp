#include "dgo/discriminator.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

namespace dgo {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
T power_step(const Tensor<T>& w, Tensor<T>& u, Tensor<T>& v) {
  const int rows = w.dim(0);
  const auto cols = static_cast<Eigen::Index>(w.size() / rows);
  Eigen::Map<const RowMat<T>> W(w.data(), rows, cols);
  Eigen::Map<Vec<T>> uu(u.data(), rows);
  Eigen::Map<Vec<T>> vv(v.data(), cols);
  vv = W.transpose() * uu;
  const T vn = vv.norm();
  if (vn > T(0)) vv /= vn;
  uu = W * vv;
  const T un = uu.norm();
  if (un > T(0)) uu /= un;
  return un;
}

}  // namespace

template <typename T>
SpectralConv<T> SpectralConv<T>::init(int cout, int cin, int k, int stride, bool with_bias, std::mt19937_64& rng) {
  SpectralConv s;
  auto c = Conv<T>::init(cout, cin, k, stride, rng);
  s.weight = c.weight;
  if (with_bias) s.bias = c.bias;
  s.stride = stride;
  s.u = normal_tensor<T>({cout}, 1.0, rng);
  s.v = Tensor<T>({cin * k * k});
  s.refresh(1);
  return s;
}

template <typename T>
void SpectralConv<T>::refresh(int iterations) {
  for (int i = 0; i < iterations; ++i) power_step(weight.value(), u, v);
}

template <typename T>
Var<T> SpectralConv<T>::operator()(const Var<T>& x) const {
  const int k = weight.value().dim(2);
  return ops::conv2d(x, normalized_weight(), bias, stride, k / 2);
}

template <typename T>
Discriminator<T> Discriminator<T>::init(const DiscriminatorConfig& cfg, std::uint64_t seed) {
  require(!cfg.channels.empty() && cfg.cond_dim >= 1, "discriminator config");
  std::mt19937_64 rng(seed);
  Discriminator d;
  d.config = cfg;
  int cin = 4;
  for (int c : cfg.channels) {
    d.convs.push_back(SpectralConv<T>::init(c, cin, 3, 2, true, rng));
    cin = c;
  }
  d.head = SpectralConv<T>::init(1, cin, 1, 1, true, rng);
  d.projection = SpectralConv<T>::init(cfg.cond_dim, cin, 1, 1, false, rng);
  d.converge_spectral_state();
  return d;
}

template <typename T>
std::vector<SpectralConv<T>*> Discriminator<T>::spectral_layers() {
  std::vector<SpectralConv<T>*> out;
  for (auto& c : convs) out.push_back(&c);
  out.push_back(&head);
  out.push_back(&projection);
  return out;
}

template <typename T>
std::vector<const SpectralConv<T>*> Discriminator<T>::spectral_layers() const {
  std::vector<const SpectralConv<T>*> out;
  for (const auto& c : convs) out.push_back(&c);
  out.push_back(&head);
  out.push_back(&projection);
  return out;
}

template <typename T>
void Discriminator<T>::converge_spectral_state(int max_iterations, double tol) {
  for (auto* layer : spectral_layers()) {
    T prev = 0;
    for (int i = 0; i < max_iterations; ++i) {
      const T sigma = power_step(layer->weight.value(), layer->u, layer->v);
      if (std::abs(sigma - prev) <= static_cast<T>(tol) * sigma) break;
      prev = sigma;
    }
  }
}

template <typename T>
void Discriminator<T>::refresh_spectral_state(int iterations) {
  for (auto* layer : spectral_layers()) layer->refresh(iterations);
}

template <typename T>
Var<T> Discriminator<T>::discriminate(const Var<T>& img, const BinaryMask& m_alpha, const Tensor<T>& cond) const {
  const auto& iv = img.value();
  require(iv.rank() == 3 && iv.channels() == 3, "discriminate: image must be 3 x H x W");
  require(m_alpha.height() == iv.height() && m_alpha.width() == iv.width(), "discriminate: mask resolution");
  require(static_cast<int>(cond.size()) == config.cond_dim,
          "discriminate: condition vector has length " + std::to_string(cond.size()) + ", expected " +
              std::to_string(config.cond_dim));

  auto h = ops::concat_channels<T>({img, Var<T>::constant(m_alpha.to_tensor<T>())});
  for (const auto& c : convs) h = ops::leaky_relu(c(h), static_cast<T>(config.leaky_slope));
  const auto pooled = ops::sum_spatial(h);  // C x 1 x 1
  const auto linear = ops::sum(head(pooled));
  const Tensor<T> cond3 =
      Tensor<T>::from({config.cond_dim, 1, 1}, std::vector<T>(cond.span().begin(), cond.span().end()));
  const auto inner = ops::sum(ops::mul_const(projection(pooled), cond3));
  return ops::add(linear, inner);
}

template <typename T>
ParamList<T> Discriminator<T>::parameters() const {
  ParamList<T> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    out.emplace_back("disc.conv" + std::to_string(i) + ".weight", convs[i].weight);
    out.emplace_back("disc.conv" + std::to_string(i) + ".bias", convs[i].bias);
  }
  out.emplace_back("disc.head.weight", head.weight);
  out.emplace_back("disc.head.bias", head.bias);
  out.emplace_back("disc.projection.weight", projection.weight);
  return out;
}

template struct SpectralConv<float>;
template struct SpectralConv<double>;
template struct Discriminator<float>;
template struct Discriminator<double>;

}  // namespace dgo
