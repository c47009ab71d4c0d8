#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgo/harness.hpp"
#include "dgo/png_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

void run_synth(int count, std::uint64_t seed, double sparsity, int resolution, const fs::path& out) {
  dgo::require(count >= 1, "synth: --count must be positive");
  for (int i = 0; i < count; ++i) {
    const auto s = dgo::synth_scene(seed + static_cast<std::uint64_t>(i), sparsity, resolution);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05d", i);
    dgo::save_sample(s, out / name);
  }
  std::printf("wrote %d samples to %s\n", count, out.string().c_str());
}

dgo::TrainConfig train_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  dgo::TrainConfig cfg;
  if (!config_path.empty()) cfg = dgo::load_config(config_path);
  for (const auto& arg : overrides) {
    if (arg.rfind("--", 0) != 0 || arg.find('=') == std::string::npos) {
      throw dgo::InputError("train: expected --key=value, got '" + arg + "'");
    }
    const auto eq = arg.find('=');
    dgo::apply_override(cfg, arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  return cfg;
}

void run_train(const dgo::TrainConfig& cfg) {
  if (cfg.out_dir.empty()) throw dgo::InputError("train: out_dir must be set (config key or --out_dir=...)");
  const auto result = dgo::train(cfg);
  const auto& last = result.history.empty() ? dgo::StepRecord{} : result.history.back();
  std::printf("trained %d steps; final total %.6f unknown_l1 %.6f\n", cfg.steps, last.total, last.unknown_l1);
  if (!result.checkpoints.empty()) std::printf("checkpoint %s\n", result.checkpoints.back().string().c_str());
}

void run_infer(const fs::path& checkpoint, const fs::path& input, const fs::path& out) {
  const auto ck = dgo::load_checkpoint(checkpoint);
  const auto gen = dgo::generator_from(ck);
  const auto data = dgo::load_dataset(input);
  if (data.empty()) throw dgo::InputError("infer: no samples under " + input.string());
  const bool single = data.size() == 1 && fs::exists(input / "meta.json");
  for (const auto& [name, raw] : data) {
    const auto s = dgo::fit_resolution(raw, ck.resolution);
    const auto r = dgo::infer(gen, s);
    const auto dir = single ? out : out / name;
    fs::create_directories(dir);
    dgo::png::write_rgb(dir / "pred.png", r.rgb);
    dgo::png::write_rgb(dir / "edges.png", dgo::edge_image(r.edges));
    dgo::png::write_rgb(dir / "input.png", s.input_rgb.rgb);
    dgo::png::write_rgb(dir / "gt.png", s.full_rgb);
  }
  std::printf("wrote %zu predictions to %s\n", data.size(), out.string().c_str());
}

void run_eval(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& report) {
  const auto ck = dgo::load_checkpoint(checkpoint);
  const auto gen = dgo::generator_from(ck);
  auto data = dgo::load_dataset(data_dir);
  for (auto& [name, s] : data) s = dgo::fit_resolution(s, ck.resolution);
  const auto r = dgo::evaluate(gen, data);
  dgo::write_report(r, report);
  std::printf("psnr_full %.4f dB psnr_unknown %.4f dB edge_f1 %.4f over %zu samples\n", r.aggregate.psnr_full,
              r.aggregate.psnr_unknown, r.aggregate.edge_f1, r.samples.size());
}

void run_montage(const std::vector<fs::path>& inputs, const fs::path& out) {
  std::vector<std::vector<dgo::Tensor<float>>> rows;
  for (const auto& dir : inputs) {
    std::vector<dgo::Tensor<float>> row;
    for (const char* panel : {"input.png", "pred.png", "gt.png", "edges.png"}) {
      if (!fs::exists(dir / panel)) throw dgo::InputError("montage: missing " + (dir / panel).string());
      row.push_back(dgo::png::read_rgb(dir / panel));
    }
    rows.push_back(std::move(row));
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  dgo::png::write_rgb(out, dgo::montage(rows));
  std::printf("wrote %s\n", out.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-guided street-view outpainting"};
  app.require_subcommand(1);

  int count = 8;
  std::uint64_t seed = 0;
  double sparsity = 0.07;
  int resolution = dgo::kCanvasHeight;
  std::string out;
  auto* synth = app.add_subcommand("synth", "Render synthetic samples");
  synth->add_option("--count", count, "Number of samples");
  synth->add_option("--seed", seed, "Seed of the first sample");
  synth->add_option("--sparsity", sparsity, "Fraction of pixels with depth")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--resolution", resolution, "Canvas height (width is twice this)");
  synth->add_option("--out", out, "Output directory")->required();

  std::string config;
  auto* train = app.add_subcommand("train", "Train; any --key=value overrides a config entry");
  train->add_option("--config", config, "Config file (flat key = value)");
  train->allow_extras();

  std::string checkpoint, input, data, report;
  auto* infer = app.add_subcommand("infer", "Predict a sample directory or a directory of samples");
  infer->add_option("--checkpoint", checkpoint)->required();
  infer->add_option("--input", input)->required();
  infer->add_option("--out", out)->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--data", data)->required();
  eval->add_option("--report", report, "JSON path; per-sample CSV is written next to it")->required();

  std::vector<std::string> inputs;
  auto* mont = app.add_subcommand("montage", "Grid of input / prediction / ground truth / edges");
  mont->add_option("--inputs", inputs, "Directories written by infer")->required();
  mont->add_option("--out", out, "PNG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*synth) run_synth(count, seed, sparsity, resolution, out);
    if (*train) run_train(train_config(config, train->remaining()));
    if (*infer) run_infer(checkpoint, input, out);
    if (*eval) run_eval(checkpoint, data, report);
    if (*mont) run_montage({inputs.begin(), inputs.end()}, out);
  } catch (const dgo::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const dgo::InputError& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}
