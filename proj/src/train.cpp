#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "dgo/harness.hpp"
#include "dgo/png_io.hpp"

namespace dgo {
namespace {

void set_requires_grad(const ParamList<float>& params, bool on) {
  for (const auto& [name, p] : params) p.node()->requires_grad = on;
}

void clear_grads(ParamList<float>& params) {
  for (auto& [name, p] : params) p.zero_grad();
}

double unknown_l1(const Tensor<float>& pred, const Tensor<float>& gt, const BinaryMask& m_alpha) {
  double s = 0;
  std::size_t n = 0;
  for (int c = 0; c < gt.channels(); ++c) {
    for (std::size_t i = 0; i < gt.plane(); ++i) {
      if (m_alpha[i]) continue;
      s += std::abs(static_cast<double>(pred.channel(c)[i]) - gt.channel(c)[i]);
      ++n;
    }
  }
  return n == 0 ? 0.0 : s / static_cast<double>(n);
}

bool finite(double v) { return std::isfinite(v); }

[[noreturn]] void abort_non_finite(const TrainConfig& cfg, long step, const StepRecord& rec,
                                   const std::vector<const Sample*>& batch) {
  std::string where = "no dump written (out_dir unset)";
  if (!cfg.out_dir.empty()) {
    const auto dir = std::filesystem::path(cfg.out_dir) / ("nonfinite_step_" + std::to_string(step));
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < batch.size(); ++i) save_sample(*batch[i], dir / ("sample_" + std::to_string(i)));
    nlohmann::json j = {{"step", step},         {"total", rec.total}, {"adv", rec.adv},
                        {"pixel", rec.pixel},   {"edge", rec.edge},   {"cross_modal", rec.cross_modal},
                        {"d_loss", rec.d_loss}};
    std::ofstream(dir / "losses.json") << j.dump(2) << '\n';
    where = "batch dumped to " + dir.string();
  }
  throw NumericError("non-finite loss at step " + std::to_string(step) + "; " + where);
}

// Sample order: a fresh permutation of the dataset for every epoch.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed ^ 0x5851f42d4c957f2dULL) {}

  std::size_t next() {
    if (pos_ == order_.size()) pos_ = 0;
    if (pos_ == 0) {
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      for (std::size_t i = order_.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order_[i - 1], order_[pick(rng_)]);
      }
    }
    return order_[pos_++];
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::mt19937_64 rng_;
};

void write_png(const Tensor<float>& img, const std::filesystem::path& path) { png::write_rgb(path, img); }

}  // namespace

void Adam::step(ParamList<float>& params) {
  if (m.empty()) {
    for (const auto& [name, p] : params) {
      m.emplace_back(p.dims());
      v.emplace_back(p.dims());
    }
  }
  require(m.size() == params.size(), "Adam: parameter list changed between steps");
  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  const double step_size = lr / bc1;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].second;
    const auto& g = p.grad();
    auto& w = p.mutable_value();
    auto& mk = m[k];
    auto& vk = v[k];
    const bool has_grad = !g.empty();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has_grad ? g[i] : 0.0;
      const double mi = beta1 * mk[i] + (1.0 - beta1) * gi;
      const double vi = beta2 * vk[i] + (1.0 - beta2) * gi * gi;
      mk[i] = static_cast<float>(mi);
      vk[i] = static_cast<float>(vi);
      w[i] = static_cast<float>(w[i] - step_size * mi / (std::sqrt(vi / bc2) + eps));
    }
    p.zero_grad();
  }
}

std::vector<std::pair<std::string, Sample>> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("dataset path " + dir.string() + " is not a directory");
  std::vector<std::pair<std::string, Sample>> out;
  if (std::filesystem::exists(dir / "meta.json")) {
    out.emplace_back(dir.filename().string(), load_sample(dir));
    return out;
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "meta.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.emplace_back(d.filename().string(), load_sample(d));
  return out;
}

Sample fit_resolution(const Sample& s, int height) {
  Sample out = s;
  while (out.height() > height && out.height() % 2 == 0) out = downscale_sample(out);
  if (out.height() != height) {
    throw InputError("sample of height " + std::to_string(s.height()) + " cannot be reduced to " +
                     std::to_string(height) + " by halving");
  }
  return out;
}

std::vector<Sample> build_dataset(const TrainConfig& cfg) {
  std::vector<Sample> out;
  if (!cfg.data_dir.empty()) {
    for (auto& [name, s] : load_dataset(cfg.data_dir)) out.push_back(fit_resolution(s, cfg.resolution));
    if (out.empty()) throw InputError("no samples found under " + cfg.data_dir);
    return out;
  }
  for (int i = 0; i < cfg.synth_count; ++i) {
    out.push_back(synth_scene(cfg.synth_seed + static_cast<std::uint64_t>(i), cfg.sparsity, cfg.resolution));
  }
  return out;
}

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  return train(cfg, build_dataset(cfg));
}

TrainResult train(const TrainConfig& cfg_in, const std::vector<Sample>& dataset) {
  TrainConfig cfg = cfg_in;
  cfg.discriminator.cond_dim = cfg.network.channels.back();
  cfg.validate();
  require(!dataset.empty(), "train: empty dataset");
  for (const auto& s : dataset) {
    require(s.height() == cfg.resolution, "train: sample height " + std::to_string(s.height()) +
                                              " differs from resolution " + std::to_string(cfg.resolution));
  }

  TrainResult result{Generator<float>::init(cfg.network, cfg.seed),
                     Discriminator<float>::init(cfg.discriminator, cfg.seed + 1),
                     {},
                     {}};
  auto& gen = result.generator;
  auto& disc = result.discriminator;
  auto g_params = gen.parameters();
  auto d_params = disc.parameters();
  Adam g_opt;
  g_opt.lr = cfg.lr_g;
  Adam d_opt;
  d_opt.lr = cfg.lr_d;
  for (Adam* o : {&g_opt, &d_opt}) {
    o->beta1 = cfg.beta1;
    o->beta2 = cfg.beta2;
    o->eps = cfg.adam_eps;
  }
  const bool adversarial = cfg.weights.adv > 0;
  const int levels = cfg.network.levels();

  std::ofstream csv;
  const std::filesystem::path out_dir = cfg.out_dir;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir / "losses.csv", std::ios::trunc);
    if (!csv) throw InputError("cannot write " + (out_dir / "losses.csv").string());
    csv << "step,total,adv,pixel,edge,cross_modal,d_loss,unknown_l1\n";
  }

  BatchSampler sampler(dataset.size(), cfg.seed);
  const float inv_batch = 1.0f / static_cast<float>(cfg.batch_size);

  for (long step = 1; step <= cfg.steps; ++step) {
    std::vector<const Sample*> batch;
    for (int b = 0; b < cfg.batch_size; ++b) batch.push_back(&dataset[sampler.next()]);

    StepRecord rec;
    rec.step = step;
    std::vector<Tensor<float>> fakes, conds;

    // Generator update; the discriminator only routes gradients.
    set_requires_grad(d_params, false);
    for (const Sample* s : batch) {
      const auto out = gen.forward(*s);
      const auto& m_alpha = s->input_rgb.mask;
      LossParts<float> parts;
      const auto cond = condition_vector(out.rgb_features, m_alpha);
      if (adversarial) parts.adv = hinge_g_loss<float>({disc.discriminate(out.rgb, m_alpha, cond)});
      parts.pixel = pixel_loss(out.rgb, s->full_rgb, m_alpha, cfg.unknown_weight);
      parts.edge = edge_loss(out.rgb, s->full_rgb, cfg.edge);
      parts.cross_modal = cross_modal_loss(out.depth.features.back(), out.rgb_features.features.back(),
                                           out.depth.masks.back(), downsample_mask(m_alpha, levels));
      const auto total = total_loss(parts, cfg.weights);

      rec.total += total.item() * inv_batch;
      rec.adv += (parts.adv.defined() ? parts.adv.item() : 0.0) * inv_batch;
      rec.pixel += parts.pixel.item() * inv_batch;
      rec.edge += parts.edge.item() * inv_batch;
      rec.cross_modal += parts.cross_modal.item() * inv_batch;
      rec.unknown_l1 += unknown_l1(out.rgb.value(), s->full_rgb, m_alpha) * inv_batch;
      if (!finite(total.item()) || !finite(parts.pixel.item()) || !finite(parts.edge.item()) ||
          !finite(parts.cross_modal.item())) {
        abort_non_finite(cfg, step, rec, batch);
      }
      backward(ops::scale(total, inv_batch));
      fakes.push_back(out.rgb.value());
      conds.push_back(cond);
    }
    g_opt.step(g_params);
    set_requires_grad(d_params, true);

    // Discriminator update on the detached fakes from the generator pass.
    if (adversarial) {
      clear_grads(d_params);
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& m_alpha = batch[b]->input_rgb.mask;
        const auto real = disc.discriminate(Var<float>::constant(batch[b]->full_rgb), m_alpha, conds[b]);
        const auto fake = disc.discriminate(Var<float>::constant(fakes[b]), m_alpha, conds[b]);
        const auto d_loss = hinge_d_loss<float>({real}, {fake});
        rec.d_loss += d_loss.item() * inv_batch;
        if (!finite(d_loss.item())) abort_non_finite(cfg, step, rec, batch);
        backward(ops::scale(d_loss, inv_batch));
      }
      d_opt.step(d_params);
      disc.refresh_spectral_state(cfg.discriminator.power_iterations);
    }

    result.history.push_back(rec);
    if (csv.is_open()) {
      char line[256];
      std::snprintf(line, sizeof(line), "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", rec.step, rec.total, rec.adv,
                    rec.pixel, rec.edge, rec.cross_modal, rec.d_loss, rec.unknown_l1);
      csv << line << std::flush;
    }
    if (cfg.log_every > 0 && step % cfg.log_every == 0) {
      std::fprintf(stderr, "step %ld total %.5f pixel %.5f edge %.5f cm %.5f adv %.5f d %.5f unknown_l1 %.5f\n", step,
                   rec.total, rec.pixel, rec.edge, rec.cross_modal, rec.adv, rec.d_loss, rec.unknown_l1);
    }
    if (!cfg.out_dir.empty() && cfg.image_every > 0 && step % cfg.image_every == 0) {
      const Sample& s = *batch.front();
      const auto edges = canny_edges(fakes.front(), cfg.edge.canny_low, cfg.edge.canny_high);
      char name[64];
      std::snprintf(name, sizeof(name), "montage_%06ld.png", step);
      write_png(montage({{s.input_rgb.rgb, fakes.front(), s.full_rgb, edge_image(edges)}}), out_dir / name);
    }
    const bool last = step == cfg.steps;
    if (!cfg.out_dir.empty() && (last || (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0))) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%06ld.bin", step);
      save_checkpoint(make_checkpoint(gen, &disc, cfg.resolution, step), out_dir / name);
      result.checkpoints.push_back(out_dir / name);
    }
  }
  if (!cfg.out_dir.empty() && cfg.steps == 0) {
    save_checkpoint(make_checkpoint(gen, &disc, cfg.resolution, 0), out_dir / "ckpt_000000.bin");
    result.checkpoints.push_back(out_dir / "ckpt_000000.bin");
  }
  return result;
}

double max_normalized_spectral_norm(const Discriminator<float>& d) {
  double worst = 0;
  for (const auto* layer : d.spectral_layers()) {
    const auto w = layer->normalized_weight().value();
    const int rows = w.dim(0);
    const auto cols = static_cast<Eigen::Index>(w.size() / rows);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = w[static_cast<std::size_t>(r) * cols + c];
    }
    const Eigen::MatrixXd gram = m * m.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    worst = std::max(worst, std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff())));
  }
  return worst;
}

}  // namespace dgo
