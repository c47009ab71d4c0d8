#include "dgo/losses.hpp"

#include <cmath>

namespace dgo {

template <typename T>
Var<T> attention_map(const FeatureMap<T>& f) {
  return ops::channel_mean_square(f.data);
}

template <typename T>
Var<T> cross_modal_loss(const FeatureMap<T>& f_d, const FeatureMap<T>& f_r, const BinaryMask& m_sd,
                        const BinaryMask& m_alpha) {
  if (f_d.height() != f_r.height() || f_d.width() != f_r.width() || f_d.channels() != f_r.channels()) {
    throw InputError("cross_modal_loss: depth and rgb features differ in shape");
  }
  for (const auto* m : {&m_sd, &m_alpha}) {
    if (m->height() != f_d.height() || m->width() != f_d.width()) {
      throw InputError("cross_modal_loss: mask resolution does not match the features");
    }
  }
  const auto unknown = m_alpha.inverted();
  const auto teacher =
      attention_map(FeatureMap<T>{ops::mul_spatial(f_d.data.detach(), unknown.to_tensor<T>()), f_d.scale_level});
  const auto student =
      attention_map(FeatureMap<T>{ops::mul_spatial(f_r.data, (m_sd & unknown).to_tensor<T>()), f_r.scale_level});
  return ops::l2_norm(ops::sub(student, teacher.detach()));
}

template <typename T>
Var<T> berhu(const Var<T>& x, T c) {
  return ops::berhu_mean(x, c);
}

template <typename T>
Var<T> hinge_d_loss(const std::vector<Var<T>>& d_real, const std::vector<Var<T>>& d_fake) {
  require(!d_real.empty() && !d_fake.empty(), "hinge_d_loss: empty score batch");
  const auto one = Var<T>::constant(Tensor<T>({1}, T(1)));
  auto margin_mean = [&](const std::vector<Var<T>>& scores, bool real) {
    Var<T> acc;
    for (const auto& s : scores) {
      require(s.value().size() == 1, "hinge loss expects scalar scores");
      const auto term = ops::relu(real ? ops::sub(one, s) : ops::add(one, s));
      acc = acc.defined() ? ops::add(acc, term) : term;
    }
    return ops::scale(acc, T(1) / static_cast<T>(scores.size()));
  };
  return ops::add(margin_mean(d_real, true), margin_mean(d_fake, false));
}

template <typename T>
Var<T> hinge_g_loss(const std::vector<Var<T>>& d_fake) {
  require(!d_fake.empty(), "hinge_g_loss: empty score batch");
  Var<T> acc;
  for (const auto& s : d_fake) acc = acc.defined() ? ops::add(acc, s) : s;
  return ops::scale(acc, T(-1) / static_cast<T>(d_fake.size()));
}

template <typename T>
Var<T> pixel_loss(const Var<T>& pred, const Tensor<T>& gt, const BinaryMask& m_alpha, double unknown_weight) {
  require(pred.value().same_shape(gt), "pixel_loss: prediction and ground truth differ in shape");
  require(m_alpha.height() == gt.height() && m_alpha.width() == gt.width(), "pixel_loss: mask resolution");
  Tensor<T> weights(gt.dims());
  const std::size_t hw = gt.plane();
  for (int c = 0; c < gt.channels(); ++c) {
    for (std::size_t i = 0; i < hw; ++i) weights.channel(c)[i] = m_alpha[i] ? T(1) : static_cast<T>(unknown_weight);
  }
  const auto diff = ops::abs(ops::sub(pred, Var<T>::constant(gt)));
  return ops::mean(ops::mul_const(diff, weights));
}

template <typename T>
Var<T> total_loss(const LossParts<T>& parts, const LossWeights& w) {
  // Only the sign is checked here; an all-zero objective is rejected by the
  // training config, not by the formula.
  for (double x : {w.adv, w.pixel, w.edge, w.cross_modal}) {
    require(x >= 0.0 && std::isfinite(x), "total_loss: loss weights must be finite and non-negative");
  }
  Var<T> acc = Var<T>::constant(Tensor<T>({1}, T(0)));
  auto add_term = [&](const Var<T>& part, double weight) {
    if (weight == 0.0 || !part.defined()) return;
    acc = ops::add(acc, ops::scale(part, static_cast<T>(weight)));
  };
  add_term(parts.adv, w.adv);
  add_term(parts.pixel, w.pixel);
  add_term(parts.edge, w.edge);
  add_term(parts.cross_modal, w.cross_modal);
  return acc;
}

#define DGO_INSTANTIATE_LOSSES(T)                                                                        \
  template Var<T> attention_map(const FeatureMap<T>&);                                                   \
  template Var<T> cross_modal_loss(const FeatureMap<T>&, const FeatureMap<T>&, const BinaryMask&,        \
                                   const BinaryMask&);                                                   \
  template Var<T> berhu(const Var<T>&, T);                                                               \
  template Var<T> hinge_d_loss(const std::vector<Var<T>>&, const std::vector<Var<T>>&);                  \
  template Var<T> hinge_g_loss(const std::vector<Var<T>>&);                                              \
  template Var<T> pixel_loss(const Var<T>&, const Tensor<T>&, const BinaryMask&, double);                \
  template Var<T> total_loss(const LossParts<T>&, const LossWeights&);

DGO_INSTANTIATE_LOSSES(float)
DGO_INSTANTIATE_LOSSES(double)

}  // namespace dgo
