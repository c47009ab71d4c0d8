#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "dgo/harness.hpp"

namespace dgo {
namespace {

constexpr char kMagic[8] = {'D', 'G', 'O', 'C', 'K', 'P', 'T', '\0'};

template <typename U>
void put(std::ostream& out, U v) {
  static_assert(std::is_trivially_copyable_v<U>);
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
U get(std::istream& in, const std::string& what) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) throw InputError("checkpoint truncated while reading " + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  U v;
  std::memcpy(&v, b, sizeof(U));
  return v;
}

std::string get_string(std::istream& in, std::uint32_t n, const std::string& what) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw InputError("checkpoint truncated while reading " + what);
  return s;
}

nlohmann::json architecture_json(const Checkpoint& ck) {
  return {{"network",
           {{"channels", ck.network.channels},
            {"depth_guidance", ck.network.depth_guidance},
            {"partial_conv", ck.network.partial_conv},
            {"max_depth", ck.network.max_depth}}},
          {"discriminator",
           {{"channels", ck.discriminator.channels},
            {"cond_dim", ck.discriminator.cond_dim},
            {"power_iterations", ck.discriminator.power_iterations},
            {"leaky_slope", ck.discriminator.leaky_slope}}},
          {"resolution", ck.resolution},
          {"step", ck.step}};
}

void copy_into(const std::map<std::string, Tensor<float>>& tensors, ParamList<float>& params) {
  for (auto& [name, var] : params) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw InputError("incompatible checkpoint schema: missing tensor '" + name + "'");
    if (it->second.dims() != var.dims()) {
      throw InputError("incompatible checkpoint schema: '" + name + "' has shape " + it->second.shape_string() +
                       ", model expects " + var.value().shape_string());
    }
    var.mutable_value() = it->second;
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    const std::string meta = architecture_json(ck).dump();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
    for (const auto& [name, t] : ck.tensors) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
      for (int d : t.dims()) put<std::int32_t>(out, d);
      for (float v : t.span()) put<float>(out, v);
    }
    if (!out) throw InputError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InputError(path.string() + " is not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto meta_len = get<std::uint32_t>(in, "header length");
  try {
    const auto meta = nlohmann::json::parse(get_string(in, meta_len, "header"));
    const auto& net = meta.at("network");
    ck.network.channels = net.at("channels").get<std::vector<int>>();
    ck.network.depth_guidance = net.at("depth_guidance").get<bool>();
    ck.network.partial_conv = net.at("partial_conv").get<bool>();
    ck.network.max_depth = net.at("max_depth").get<double>();
    const auto& disc = meta.at("discriminator");
    ck.discriminator.channels = disc.at("channels").get<std::vector<int>>();
    ck.discriminator.cond_dim = disc.at("cond_dim").get<int>();
    ck.discriminator.power_iterations = disc.at("power_iterations").get<int>();
    ck.discriminator.leaky_slope = disc.at("leaky_slope").get<double>();
    ck.resolution = meta.at("resolution").get<int>();
    ck.step = meta.at("step").get<long>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("incompatible checkpoint schema: " + std::string(e.what()));
  }
  const auto count = get<std::uint32_t>(in, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = get_string(in, get<std::uint32_t>(in, "name length"), "name");
    const auto rank = get<std::uint32_t>(in, "rank");
    if (rank < 1 || rank > 4) throw InputError("checkpoint tensor '" + name + "' has invalid rank");
    std::vector<int> dims;
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = get<std::int32_t>(in, "shape");
      if (d < 1 || d > (1 << 24)) throw InputError("checkpoint tensor '" + name + "' has invalid shape");
      dims.push_back(d);
      n *= static_cast<std::size_t>(d);
    }
    Tensor<float> t(dims);
    for (std::size_t j = 0; j < n; ++j) t[j] = get<float>(in, "tensor data");
    ck.tensors.emplace(name, std::move(t));
  }
  return ck;
}

Checkpoint make_checkpoint(const Generator<float>& g, const Discriminator<float>* d, int resolution, long step) {
  Checkpoint ck;
  ck.network = g.config;
  ck.resolution = resolution;
  ck.step = step;
  for (const auto& [name, p] : g.parameters()) ck.tensors.emplace(name, p.value());
  if (d != nullptr) {
    ck.discriminator = d->config;
    for (const auto& [name, p] : d->parameters()) ck.tensors.emplace(name, p.value());
    const auto layers = d->spectral_layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      ck.tensors.emplace("disc.sn" + std::to_string(i) + ".u", layers[i]->u);
      ck.tensors.emplace("disc.sn" + std::to_string(i) + ".v", layers[i]->v);
    }
  }
  return ck;
}

Generator<float> generator_from(const Checkpoint& ck) {
  try {
    ck.network.validate();
  } catch (const InputError& e) {
    throw InputError("incompatible checkpoint schema: " + std::string(e.what()));
  }
  auto g = Generator<float>::init(ck.network, 0);
  auto params = g.parameters();
  copy_into(ck.tensors, params);
  std::size_t generator_tensors = 0;
  for (const auto& [name, t] : ck.tensors) {
    if (name.rfind("disc.", 0) != 0) ++generator_tensors;
  }
  if (generator_tensors != params.size()) {
    throw InputError("incompatible checkpoint schema: " + std::to_string(generator_tensors) +
                     " generator tensors, architecture has " + std::to_string(params.size()));
  }
  return g;
}

Discriminator<float> discriminator_from(const Checkpoint& ck) {
  auto d = Discriminator<float>::init(ck.discriminator, 0);
  auto params = d.parameters();
  copy_into(ck.tensors, params);
  const auto layers = d.spectral_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (auto [suffix, dst] : {std::pair{".u", &layers[i]->u}, std::pair{".v", &layers[i]->v}}) {
      const auto it = ck.tensors.find("disc.sn" + std::to_string(i) + suffix);
      if (it == ck.tensors.end() || !it->second.same_shape(*dst)) {
        throw InputError("incompatible checkpoint schema: discriminator power-iteration state");
      }
      *dst = it->second;
    }
  }
  return d;
}

}  // namespace dgo
