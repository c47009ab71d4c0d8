#include "dgo/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "dgo/png_io.hpp"

namespace dgo {

void CameraIntrinsics::validate() const {
  require(fx > 0 && fy > 0, "focal lengths must be positive");
  require(width > 0 && height > 0, "image size must be positive");
  require(cx >= 0 && cx < width && cy >= 0 && cy < height, "principal point outside the image");
}

CameraIntrinsics CameraIntrinsics::for_canvas(int height) {
  CameraIntrinsics cam;
  cam.width = 2 * height;
  cam.height = height;
  cam.fx = cam.fy = height;  // 90 degree horizontal field of view
  cam.cx = height;
  cam.cy = height / 2.0;
  return cam;
}

Projection project_points(const PointCloud& cloud, const CameraIntrinsics& cam) {
  cam.validate();
  Projection out;
  out.map.depth = Tensor<float>(1, cam.height, cam.width);
  out.map.mask = BinaryMask(cam.height, cam.width);
  // Compare in double, store the winning z once at the end.
  std::vector<double> zbuf(static_cast<std::size_t>(cam.height) * cam.width,
                           std::numeric_limits<double>::infinity());
  for (const auto& [x, y, z] : cloud.points) {
    if (!(z > kNearPlane) || !std::isfinite(x) || !std::isfinite(y)) {
      ++out.dropped;
      continue;
    }
    const double u = cam.fx * x / z + cam.cx;
    const double v = cam.fy * y / z + cam.cy;
    const double col = std::floor(u), row = std::floor(v);
    if (col < 0 || row < 0 || col >= cam.width || row >= cam.height) {
      ++out.dropped;
      continue;
    }
    const auto idx = static_cast<std::size_t>(row) * cam.width + static_cast<std::size_t>(col);
    zbuf[idx] = std::min(zbuf[idx], z);
  }
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (std::isfinite(zbuf[i])) {
      out.map.depth[i] = static_cast<float>(zbuf[i]);
      out.map.mask.set(static_cast<int>(i / cam.width), static_cast<int>(i % cam.width), true);
    }
  }
  return out;
}

BinaryMask known_region_mask(int height, int width) {
  require(height % 2 == 0 && width == 2 * height, "outpainting canvas must be h x 2h with even h");
  BinaryMask m(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = height / 2; x < height / 2 + height; ++x) m.set(y, x, true);
  }
  return m;
}

MaskedRGB make_layout(const Tensor<float>& full_rgb) {
  require(full_rgb.rank() == 3 && full_rgb.channels() == 3 && full_rgb.height() == kCanvasHeight &&
              full_rgb.width() == kCanvasWidth,
          "make_layout expects a 3x256x512 image, got " + full_rgb.shape_string());
  return make_layout(full_rgb, kCanvasHeight);
}

MaskedRGB make_layout(const Tensor<float>& full_rgb, int canvas_height) {
  require(full_rgb.rank() == 3 && full_rgb.channels() == 3 && full_rgb.height() == canvas_height &&
              full_rgb.width() == 2 * canvas_height,
          "make_layout: image " + full_rgb.shape_string() + " does not match the canvas");
  MaskedRGB out{full_rgb, known_region_mask(canvas_height, 2 * canvas_height)};
  const std::size_t hw = full_rgb.plane();
  for (int c = 0; c < 3; ++c) {
    float* ch = out.rgb.channel(c);
    for (std::size_t i = 0; i < hw; ++i) {
      if (!out.mask[i]) ch[i] = 0.0f;
    }
  }
  return out;
}

namespace {

struct Cuboid {
  double x0, x1, y0, y1, z0, z1;
  std::array<float, 3> color;
};

constexpr double kCameraHeight = 1.6;  // ground plane at y = +1.6
constexpr double kGroundRange = 60.0;
constexpr double kSkyDepth = 80.0;

float luma(const std::array<float, 3>& c) { return 0.299f * c[0] + 0.587f * c[1] + 0.114f * c[2]; }

// Slab test; returns entry distance along the ray and the hit face (0 front, 1 side, 2 top).
bool intersect(const Cuboid& b, const std::array<double, 3>& d, double& t_hit, int& face) {
  double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
  int axis = -1;
  const double lo[3] = {b.x0, b.y0, b.z0};
  const double hi[3] = {b.x1, b.y1, b.z1};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-12) {
      if (0.0 < lo[a] || 0.0 > hi[a]) return false;
      continue;
    }
    double t0 = lo[a] / d[a], t1 = hi[a] / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > tmin) {
      tmin = t0;
      axis = a;
    }
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  if (axis < 0) return false;
  t_hit = tmin;
  face = axis == 2 ? 0 : (axis == 0 ? 1 : 2);
  return true;
}

}  // namespace

SceneRender render_scene(std::uint64_t seed, int canvas_height) {
  require(canvas_height >= 8 && canvas_height % 2 == 0, "canvas height must be even and >= 8");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  const int n = std::uniform_int_distribution<int>(2, 6)(rng);
  std::vector<Cuboid> boxes;
  std::vector<float> front_lumas;
  for (int i = 0; i < n; ++i) {
    Cuboid b{};
    const double cx = uniform(-14.0, 14.0);
    const double w = uniform(1.5, 6.0);
    const double h = uniform(1.2, 8.0);
    b.z0 = uniform(6.0, 40.0);
    b.z1 = b.z0 + uniform(2.0, 8.0);
    b.x0 = cx - w / 2;
    b.x1 = cx + w / 2;
    b.y1 = kCameraHeight;
    b.y0 = kCameraHeight - h;
    // Front-face luma in [0.5, 0.75] keeps every face distinguishable from the
    // dark ground and the bright sky under the default Canny thresholds.
    std::array<float, 3> color{};
    for (int attempt = 0; attempt < 200; ++attempt) {
      color = {static_cast<float>(uniform(0.0, 1.0)), static_cast<float>(uniform(0.0, 1.0)),
               static_cast<float>(uniform(0.0, 1.0))};
      const float target = static_cast<float>(uniform(0.5, 0.75));
      const float l = luma(color);
      if (l < 1e-3f) continue;
      for (auto& c : color) c = std::min(1.0f, c * target / l);
      const float got = luma(color);
      bool ok = got >= 0.5f && got <= 0.75f;
      for (float other : front_lumas) ok = ok && std::abs(other - got) >= 0.05f;
      if (ok) break;
    }
    front_lumas.push_back(luma(color));
    b.color = color;
    boxes.push_back(b);
  }

  SceneRender out;
  out.camera = CameraIntrinsics::for_canvas(canvas_height);
  out.cuboids = n;
  const auto& cam = out.camera;
  const int H = cam.height, W = cam.width;
  out.rgb = Tensor<float>(3, H, W);
  out.dense_depth = Tensor<float>(1, H, W);
  out.labels.assign(static_cast<std::size_t>(H) * W, 0);
  const std::array<float, 3> ground{0.16f, 0.15f, 0.14f};
  const std::array<float, 3> sky_top{0.80f, 0.88f, 0.98f};
  const std::array<float, 3> sky_horizon{0.92f, 0.95f, 0.98f};
  constexpr float shade[3] = {1.0f, 0.7f, 0.5f};

  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const std::array<double, 3> d{(u + 0.5 - cam.cx) / cam.fx, (v + 0.5 - cam.cy) / cam.fy, 1.0};
      double best_t = std::numeric_limits<double>::infinity();
      int label = 0;
      std::array<float, 3> color{};
      if (d[1] > 0) {
        const double t = kCameraHeight / d[1];
        if (t * d[2] <= kGroundRange) {
          best_t = t;
          label = 1;
          color = ground;
        }
      }
      for (int i = 0; i < n; ++i) {
        double t = 0;
        int face = 0;
        if (intersect(boxes[i], d, t, face) && t < best_t) {
          best_t = t;
          label = 2 + 3 * i + face;
          for (int c = 0; c < 3; ++c) color[c] = boxes[i].color[c] * shade[face];
        }
      }
      double z = best_t * d[2];
      if (label == 0) {
        const float a = static_cast<float>(std::clamp(v / (cam.cy + 1.0), 0.0, 1.0));
        for (int c = 0; c < 3; ++c) color[c] = (1 - a) * sky_top[c] + a * sky_horizon[c];
        z = kSkyDepth;
      }
      const auto idx = static_cast<std::size_t>(v) * W + u;
      out.labels[idx] = label;
      out.dense_depth[idx] = static_cast<float>(z);
      for (int c = 0; c < 3; ++c) out.rgb(c, v, u) = color[c];
    }
  }
  return out;
}

BinaryMask region_boundaries(const SceneRender& scene) {
  const int H = scene.rgb.height(), W = scene.rgb.width();
  BinaryMask out(H, W);
  auto label = [&](int y, int x) { return scene.labels[static_cast<std::size_t>(y) * W + x]; };
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int l = label(y, x);
      const bool edge = (y > 0 && label(y - 1, x) != l) || (y + 1 < H && label(y + 1, x) != l) ||
                        (x > 0 && label(y, x - 1) != l) || (x + 1 < W && label(y, x + 1) != l);
      out.set(y, x, edge);
    }
  }
  return out;
}

Sample synth_scene(std::uint64_t seed, double sparsity, int canvas_height) {
  require(sparsity > 0.0 && sparsity <= 1.0, "sparsity must be in (0, 1]");
  SceneRender scene = render_scene(seed, canvas_height);
  Sample s;
  s.meta = {seed, sparsity, scene.camera};
  s.full_rgb = scene.rgb;
  s.input_rgb = make_layout(scene.rgb, canvas_height);
  const int H = scene.rgb.height(), W = scene.rgb.width();
  s.depth.depth = Tensor<float>(1, H, W);
  s.depth.mask = BinaryMask(H, W);
  // Independent stream so the LiDAR pattern does not perturb the geometry draw.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  for (std::size_t i = 0; i < scene.dense_depth.size(); ++i) {
    const bool valid = keep(rng) < sparsity;
    if (valid) {
      s.depth.depth[i] = scene.dense_depth[i];
      s.depth.mask.set(static_cast<int>(i / W), static_cast<int>(i % W), true);
    }
  }
  return s;
}

void save_sample(const Sample& s, const std::filesystem::path& dir) {
  validate_pair(s.depth, s.input_rgb);
  std::filesystem::create_directories(dir);
  png::write_rgb(dir / "rgb.png", s.full_rgb);
  png::Gray16 depth{s.height(), s.width(), {}};
  depth.values.resize(s.depth.depth.size());
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    if (!s.depth.mask[i]) continue;
    const double q = std::round(static_cast<double>(s.depth.depth[i]) * kDepthPngScale);
    depth.values[i] = static_cast<std::uint16_t>(std::clamp(q, 1.0, 65535.0));
  }
  png::write_gray16(dir / "depth.png", depth);

  const auto& c = s.meta.camera;
  nlohmann::json meta = {
      {"seed", s.meta.seed},
      {"sparsity", s.meta.sparsity},
      {"height", s.height()},
      {"width", s.width()},
      {"intrinsics",
       {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}}},
  };
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";
}

Sample load_sample(const std::filesystem::path& dir) {
  for (const char* name : {"rgb.png", "depth.png", "meta.json"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw InputError("missing " + std::string(name) + " in " + dir.string());
    }
  }
  Sample s;
  try {
    std::ifstream in(dir / "meta.json");
    const auto meta = nlohmann::json::parse(in);
    s.meta.seed = meta.at("seed").get<std::uint64_t>();
    s.meta.sparsity = meta.at("sparsity").get<double>();
    const auto& k = meta.at("intrinsics");
    s.meta.camera = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                     k.at("cy").get<double>(), k.at("width").get<int>(), k.at("height").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError("corrupt meta.json in " + dir.string() + ": " + e.what());
  }
  s.full_rgb = png::read_rgb(dir / "rgb.png");
  const int H = s.full_rgb.height(), W = s.full_rgb.width();
  const auto depth = png::read_gray16(dir / "depth.png");
  if (depth.height != H || depth.width != W) {
    throw InputError("shape mismatch between rgb.png and depth.png in " + dir.string());
  }
  s.depth.depth = Tensor<float>(1, H, W);
  s.depth.mask = BinaryMask(H, W);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    if (depth.values[i] == 0) continue;
    s.depth.depth[i] = static_cast<float>(depth.values[i] / kDepthPngScale);
    s.depth.mask.set(static_cast<int>(i / W), static_cast<int>(i % W), true);
  }
  s.input_rgb = make_layout(s.full_rgb, H);
  validate_pair(s.depth, s.input_rgb);
  return s;
}

Sample downscale_sample(const Sample& s) {
  const int H = s.height() / 2, W = s.width() / 2;
  require(H % 2 == 0 && W == 2 * H, "sample is too small to downscale");
  Sample out;
  out.meta = s.meta;
  auto& cam = out.meta.camera;
  cam.fx /= 2;
  cam.fy /= 2;
  cam.cx /= 2;
  cam.cy /= 2;
  cam.width = W;
  cam.height = H;
  out.full_rgb = Tensor<float>(3, H, W);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        out.full_rgb(c, y, x) = 0.25f * (s.full_rgb(c, 2 * y, 2 * x) + s.full_rgb(c, 2 * y + 1, 2 * x) +
                                         s.full_rgb(c, 2 * y, 2 * x + 1) + s.full_rgb(c, 2 * y + 1, 2 * x + 1));
      }
    }
  }
  out.input_rgb = make_layout(out.full_rgb, H);
  out.depth.depth = Tensor<float>(1, H, W);
  out.depth.mask = downsample_mask(s.depth.mask, 1);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) out.depth.depth(0, y, x) = s.depth.depth(0, 2 * y, 2 * x);
  }
  return out;
}

}  // namespace dgo
