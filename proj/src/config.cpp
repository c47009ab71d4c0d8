#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dgo/harness.hpp"

namespace dgo {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw InputError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw InputError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::string to_string(const std::string& key, const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (v.find_first_of(" \t\"=") != std::string::npos) throw InputError("config: malformed string for '" + key + "'");
  return v;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::string body = v;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw InputError("config: unterminated array for '" + key + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<int> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(to_int(key, item)));
  }
  if (out.empty()) throw InputError("config: '" + key + "' must list at least one value");
  return out;
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = static_cast<int>(to_int(k, v)); }},
      {"steps", [](auto& c, auto& k, auto& v) { c.steps = static_cast<int>(to_int(k, v)); }},
      {"lr_g", [](auto& c, auto& k, auto& v) { c.lr_g = to_double(k, v); }},
      {"lr_d", [](auto& c, auto& k, auto& v) { c.lr_d = to_double(k, v); }},
      {"beta1", [](auto& c, auto& k, auto& v) { c.beta1 = to_double(k, v); }},
      {"beta2", [](auto& c, auto& k, auto& v) { c.beta2 = to_double(k, v); }},
      {"adam_eps", [](auto& c, auto& k, auto& v) { c.adam_eps = to_double(k, v); }},
      {"lambda_adv", [](auto& c, auto& k, auto& v) { c.weights.adv = to_double(k, v); }},
      {"lambda_pixel", [](auto& c, auto& k, auto& v) { c.weights.pixel = to_double(k, v); }},
      {"lambda_edge", [](auto& c, auto& k, auto& v) { c.weights.edge = to_double(k, v); }},
      {"lambda_cm", [](auto& c, auto& k, auto& v) { c.weights.cross_modal = to_double(k, v); }},
      {"canny_low", [](auto& c, auto& k, auto& v) { c.edge.canny_low = to_double(k, v); }},
      {"canny_high", [](auto& c, auto& k, auto& v) { c.edge.canny_high = to_double(k, v); }},
      {"berhu_c", [](auto& c, auto& k, auto& v) { c.edge.berhu_c = to_double(k, v); }},
      {"edge_blur_sigma", [](auto& c, auto& k, auto& v) { c.edge.blur_sigma = to_double(k, v); }},
      {"unknown_weight", [](auto& c, auto& k, auto& v) { c.unknown_weight = to_double(k, v); }},
      {"data_dir", [](auto& c, auto& k, auto& v) { c.data_dir = to_string(k, v); }},
      {"synth_seed", [](auto& c, auto& k, auto& v) { c.synth_seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"synth_count", [](auto& c, auto& k, auto& v) { c.synth_count = static_cast<int>(to_int(k, v)); }},
      {"sparsity", [](auto& c, auto& k, auto& v) { c.sparsity = to_double(k, v); }},
      {"resolution", [](auto& c, auto& k, auto& v) { c.resolution = static_cast<int>(to_int(k, v)); }},
      {"channels", [](auto& c, auto& k, auto& v) { c.network.channels = to_int_list(k, v); }},
      {"depth_guidance", [](auto& c, auto& k, auto& v) { c.network.depth_guidance = to_bool(k, v); }},
      {"partial_conv", [](auto& c, auto& k, auto& v) { c.network.partial_conv = to_bool(k, v); }},
      {"max_depth", [](auto& c, auto& k, auto& v) { c.network.max_depth = to_double(k, v); }},
      {"disc_channels", [](auto& c, auto& k, auto& v) { c.discriminator.channels = to_int_list(k, v); }},
      {"disc_power_iterations",
       [](auto& c, auto& k, auto& v) { c.discriminator.power_iterations = static_cast<int>(to_int(k, v)); }},
      {"out_dir", [](auto& c, auto& k, auto& v) { c.out_dir = to_string(k, v); }},
      {"checkpoint_every", [](auto& c, auto& k, auto& v) { c.checkpoint_every = static_cast<int>(to_int(k, v)); }},
      {"image_every", [](auto& c, auto& k, auto& v) { c.image_every = static_cast<int>(to_int(k, v)); }},
      {"log_every", [](auto& c, auto& k, auto& v) { c.log_every = static_cast<int>(to_int(k, v)); }},
  };
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size >= 1, "config: batch_size must be positive");
  require(steps >= 0, "config: steps must be non-negative");
  require(lr_g > 0 && lr_d > 0, "config: learning rates must be positive");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "config: Adam betas must lie in [0, 1)");
  require(adam_eps > 0, "config: adam_eps must be positive");
  weights.validate();
  require(edge.canny_low >= 0 && edge.canny_low < edge.canny_high, "config: need 0 <= canny_low < canny_high");
  require(edge.berhu_c > 0 && edge.blur_sigma > 0, "config: berhu_c and edge_blur_sigma must be positive");
  require(unknown_weight > 0, "config: unknown_weight must be positive");
  require(data_dir.empty() || std::filesystem::is_directory(data_dir), "config: data_dir '" + data_dir + "' is not a directory");
  require(!data_dir.empty() || synth_count >= 1, "config: synth_count must be positive");
  require(sparsity > 0 && sparsity <= 1, "config: sparsity must lie in (0, 1]");
  require(resolution >= 2 && resolution % 2 == 0, "config: resolution must be a positive even number");
  network.validate();
  require_pyramid_size(resolution, 2 * resolution, network.levels());
  require(!discriminator.channels.empty() && discriminator.power_iterations >= 1, "config: discriminator settings");
  require(checkpoint_every >= 0 && image_every >= 0 && log_every >= 0, "config: cadences must be non-negative");
}

void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw InputError("config: unknown key '" + key + "'");
  it->second(cfg, key, trim(value));
}

TrainConfig parse_config(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_override(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace dgo
