#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgo/discriminator.hpp"
#include "dgo/generator.hpp"
#include "dgo/losses.hpp"

namespace dgo {

// ---- configuration ----

struct TrainConfig {
  std::uint64_t seed = 1;
  int batch_size = 1;
  int steps = 2000;

  double lr_g = 1e-4;
  double lr_d = 4e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  LossWeights weights;
  EdgeLossParams edge;
  double unknown_weight = 5.0;

  // Dataset: sample directories under data_dir when set, otherwise synthetic
  // scenes with seeds synth_seed .. synth_seed + synth_count - 1.
  std::string data_dir;
  std::uint64_t synth_seed = 0;
  int synth_count = 8;
  double sparsity = 0.07;
  int resolution = kCanvasHeight;  // canvas height; samples are downscaled to it

  NetworkConfig network;
  DiscriminatorConfig discriminator;

  std::string out_dir;       // empty: nothing is written
  int checkpoint_every = 0;  // 0: final checkpoint only
  int image_every = 0;       // 0: no montages
  int log_every = 0;         // 0: silent

  void validate() const;
};

/// Parses flat `key = value` lines (TOML subset: numbers, booleans, quoted
/// strings, arrays of integers, `#` comments). Unknown keys are errors.
TrainConfig parse_config(const std::string& text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});
/// Applies one `key=value` override using the config-file syntax for the value.
void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value);

// ---- optimizer ----

struct Adam {
  double lr = 1e-4, beta1 = 0.5, beta2 = 0.999, eps = 1e-8;
  long step_count = 0;
  std::vector<Tensor<float>> m, v;

  /// One update from the accumulated gradients; parameters without a gradient
  /// are treated as having a zero gradient. Gradients are cleared afterwards.
  void step(ParamList<float>& params);
};

// ---- checkpoints ----

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetworkConfig network;
  DiscriminatorConfig discriminator;
  int resolution = kCanvasHeight;
  long step = 0;
  std::map<std::string, Tensor<float>> tensors;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const Generator<float>& g, const Discriminator<float>* d, int resolution, long step);
/// Rebuilds the generator; throws InputError when names or shapes disagree with
/// the architecture recorded in the header.
Generator<float> generator_from(const Checkpoint& ck);
Discriminator<float> discriminator_from(const Checkpoint& ck);

// ---- data ----

/// Loads every sample directory under `dir` (or `dir` itself if it is one), sorted by name.
std::vector<std::pair<std::string, Sample>> load_dataset(const std::filesystem::path& dir);
/// Halves the sample until its canvas height equals `height`.
Sample fit_resolution(const Sample& s, int height);
std::vector<Sample> build_dataset(const TrainConfig& cfg);

// ---- training ----

struct StepRecord {
  long step = 0;
  double total = 0, adv = 0, pixel = 0, edge = 0, cross_modal = 0, d_loss = 0;
  double unknown_l1 = 0;
};

struct TrainResult {
  Generator<float> generator;
  Discriminator<float> discriminator;
  std::vector<StepRecord> history;
  std::vector<std::filesystem::path> checkpoints;
};

/// Alternating generator / discriminator optimization; single-threaded and
/// deterministic for a fixed config. Throws NumericError on a non-finite loss
/// after dumping the offending batch under out_dir.
TrainResult train(const TrainConfig& cfg);
TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& dataset);

/// Largest spectral norm of any normalized discriminator weight (exact SVD).
double max_normalized_spectral_norm(const Discriminator<float>& d);

// ---- inference and metrics ----

struct InferResult {
  Tensor<float> rgb;
  EdgeMap edges;
};

InferResult infer(const Generator<float>& g, const Sample& s, const EdgeLossParams& p = {});

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over the selected pixels (all channels). Identical inputs
/// give +infinity.
double psnr(const Tensor<float>& pred, const Tensor<float>& gt, const BinaryMask* region = nullptr);

struct EdgeAgreement {
  double precision = 1, recall = 1, f1 = 1;
};
/// Exact pixel agreement between two edge maps; two empty maps agree fully.
EdgeAgreement edge_agreement(const EdgeMap& pred, const EdgeMap& gt);

struct SampleMetrics {
  std::string name;
  double psnr_full = 0;
  double psnr_unknown = 0;
  double edge_precision = 0, edge_recall = 0, edge_f1 = 0;
  double known_fraction = 0;
  double depth_density = 0;
};

struct EvalReport {
  std::vector<SampleMetrics> samples;
  SampleMetrics aggregate;  // means over samples
};

EvalReport evaluate(const Generator<float>& g, const std::vector<std::pair<std::string, Sample>>& data,
                    const EdgeLossParams& p = {});
/// Metrics for precomputed predictions (same order as `data`).
EvalReport evaluate_predictions(const std::vector<Tensor<float>>& preds,
                                const std::vector<std::pair<std::string, Sample>>& data,
                                const EdgeLossParams& p = {});

/// Writes the aggregate JSON to `json_path` and per-sample rows to the same path with a .csv extension.
void write_report(const EvalReport& r, const std::filesystem::path& json_path);

// ---- images ----

/// Edge map rendered as a white-on-black RGB image.
Tensor<float> edge_image(const EdgeMap& e);
/// Rows of equally-sized panels laid side by side with a 2-pixel gap.
Tensor<float> montage(const std::vector<std::vector<Tensor<float>>>& rows);

}  // namespace dgo
