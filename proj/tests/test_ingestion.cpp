#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dgo/ingestion.hpp"
#include "dgo/png_io.hpp"

using namespace dgo;
namespace fs = std::filesystem;

namespace {

CameraIntrinsics camera_128() {
  CameraIntrinsics cam;
  cam.cx = 128;
  cam.cy = 128;
  return cam;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dgo_ingestion_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ProjectPoints, PrincipalRayPoint) {
  const auto r = project_points(PointCloud{{{0, 0, 10}}}, camera_128());
  EXPECT_FLOAT_EQ(r.map.depth(0, 128, 128), 10.0f);
  EXPECT_EQ(r.map.mask.count(), 1u);
  EXPECT_TRUE(r.map.mask.at(128, 128));
}

TEST(ProjectPoints, EmptyCloud) {
  const auto r = project_points(PointCloud{}, camera_128());
  EXPECT_EQ(r.map.mask.count(), 0u);
  EXPECT_EQ(r.map.depth.max_abs(), 0.0f);
  EXPECT_EQ(r.dropped, 0u);
}

TEST(ProjectPoints, CollisionKeepsNearest) {
  // Both points land on u = 128 + 256 * 0.5 = 256, v = 128.
  const PointCloud cloud{{{4.5, 0, 9}, {2.5, 0, 5}}};
  const auto r = project_points(cloud, camera_128());
  EXPECT_EQ(r.map.mask.count(), 1u);
  EXPECT_FLOAT_EQ(r.map.depth(0, 128, 256), 5.0f);
}

TEST(ProjectPoints, DropsBehindNearPlaneAndOutside) {
  const PointCloud cloud{{{0, 0, 0.05}, {0, 0, -3}, {100, 0, 1}, {0, 0, 3}}};
  const auto r = project_points(cloud, camera_128());
  EXPECT_EQ(r.dropped, 3u);
  EXPECT_EQ(r.map.mask.count(), 1u);
}

TEST(ProjectPoints, PermutationInvariant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> xy(-10, 10), z(0.5, 40);
  PointCloud cloud;
  for (int i = 0; i < 3000; ++i) cloud.points.push_back({xy(rng), xy(rng) * 0.3, z(rng)});
  const auto a = project_points(cloud, CameraIntrinsics{});
  std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
  const auto b = project_points(cloud, CameraIntrinsics{});
  EXPECT_EQ(a.map.mask, b.map.mask);
  EXPECT_EQ(a.map.depth, b.map.depth);
}

TEST(ProjectPoints, DepthScalingAlongRays) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ray(-0.9, 0.9), z(1, 20);
  PointCloud cloud, scaled;
  const double alpha = 2.0;
  for (int i = 0; i < 500; ++i) {
    const double rx = ray(rng), ry = ray(rng) * 0.4, zz = z(rng);
    cloud.points.push_back({rx * zz, ry * zz, zz});
    scaled.points.push_back({rx * zz * alpha, ry * zz * alpha, zz * alpha});
  }
  const auto a = project_points(cloud, CameraIntrinsics{});
  const auto b = project_points(scaled, CameraIntrinsics{});
  EXPECT_EQ(a.map.mask, b.map.mask);
  for (std::size_t i = 0; i < a.map.depth.size(); ++i) {
    EXPECT_FLOAT_EQ(b.map.depth[i], static_cast<float>(alpha) * a.map.depth[i]);
  }
}

TEST(Intrinsics, Validation) {
  CameraIntrinsics cam;
  EXPECT_NO_THROW(cam.validate());
  cam.cx = 512;
  EXPECT_THROW(cam.validate(), InputError);
  cam = CameraIntrinsics{};
  cam.fy = 0;
  EXPECT_THROW(cam.validate(), InputError);
}

TEST(MakeLayout, KnownAreaIs256Square) {
  const auto r = make_layout(Tensor<float>(3, 256, 512, 0.3f));
  EXPECT_EQ(r.mask.count(), 65536u);
  EXPECT_TRUE(is_single_rectangle(r.mask));
  EXPECT_TRUE(r.mask.at(0, 128));
  EXPECT_TRUE(r.mask.at(255, 383));
  EXPECT_FALSE(r.mask.at(0, 127));
  EXPECT_FALSE(r.mask.at(0, 384));
}

TEST(MakeLayout, AllZeroImage) {
  const auto r = make_layout(Tensor<float>(3, 256, 512));
  EXPECT_EQ(r.rgb.max_abs(), 0.0f);
  EXPECT_EQ(r.mask, known_region_mask(256, 512));
}

TEST(MakeLayout, ColumnSums) {
  const auto r = make_layout(Tensor<float>(3, 256, 512, 1.0f));
  auto column_sum = [&](int x) {
    double s = 0;
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 256; ++y) s += r.rgb(c, y, x);
    }
    return s;
  };
  EXPECT_EQ(column_sum(0), 0.0);
  EXPECT_EQ(column_sum(200), 768.0);
}

TEST(MakeLayout, WrongShapeRejected) {
  EXPECT_THROW(make_layout(Tensor<float>(3, 256, 256)), InputError);
  EXPECT_THROW(make_layout(Tensor<float>(1, 256, 512)), InputError);
}

TEST(MakeLayout, Idempotent) {
  const auto s = synth_scene(4, 0.07, 64);
  const auto once = make_layout(s.full_rgb, 64);
  const auto twice = make_layout(once.rgb, 64);
  EXPECT_EQ(once.rgb, twice.rgb);
  EXPECT_EQ(once.mask, twice.mask);
}

TEST(SynthScene, Deterministic) {
  const auto a = synth_scene(0);
  const auto b = synth_scene(0);
  EXPECT_EQ(a.full_rgb, b.full_rgb);
  EXPECT_EQ(a.input_rgb.rgb, b.input_rgb.rgb);
  EXPECT_EQ(a.depth.depth, b.depth.depth);
  EXPECT_EQ(a.depth.mask, b.depth.mask);
}

TEST(SynthScene, DifferentSeedsDiffer) {
  EXPECT_NE(synth_scene(0, 0.07, 64).full_rgb, synth_scene(1, 0.07, 64).full_rgb);
}

TEST(SynthScene, FullSparsityCoversCanvas) {
  const auto s = synth_scene(2, 1.0);
  EXPECT_TRUE(s.depth.mask.all());
}

TEST(SynthScene, SparsityFollowsBinomial) {
  const double n = 256.0 * 512.0, p = 0.07;
  const double mean = n * p, sigma = std::sqrt(n * p * (1 - p));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = synth_scene(seed, p);
    EXPECT_NEAR(static_cast<double>(s.depth.mask.count()), mean, 3 * sigma) << "seed " << seed;
  }
}

TEST(SynthScene, SampleInvariants) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto s = synth_scene(seed);
    EXPECT_NO_THROW(validate_pair(s.depth, s.input_rgb));
    EXPECT_EQ(s.input_rgb.rgb, make_layout(s.full_rgb).rgb);
    const auto known = s.depth.mask & s.input_rgb.mask;
    const auto unknown = s.depth.mask & s.input_rgb.mask.inverted();
    EXPECT_GT(known.count(), 0u);
    EXPECT_GT(unknown.count(), 0u);
  }
}

TEST(SynthScene, DepthEdgesCoincideWithRegionEdges) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto scene = render_scene(seed);
    const auto boundaries = region_boundaries(scene);
    const int h = scene.dense_depth.height(), w = scene.dense_depth.width();
    int jumps = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        const float a = scene.dense_depth(0, y, x), b = scene.dense_depth(0, y, x + 1);
        if (std::abs(a - b) > 0.2f * std::min(a, b)) {
          ++jumps;
          EXPECT_TRUE(boundaries.at(y, x) && boundaries.at(y, x + 1)) << "seed " << seed << " at " << y << "," << x;
        }
      }
    }
    EXPECT_GT(jumps, 0);
  }
}

TEST(SampleIo, RoundTripWithinQuantization) {
  const auto dir = scratch("roundtrip");
  const auto s = synth_scene(0, 0.07);
  save_sample(s, dir);
  const auto t = load_sample(dir);
  EXPECT_EQ(t.meta.seed, s.meta.seed);
  EXPECT_DOUBLE_EQ(t.meta.sparsity, s.meta.sparsity);
  EXPECT_EQ(t.depth.mask, s.depth.mask);
  for (std::size_t i = 0; i < s.depth.depth.size(); ++i) {
    ASSERT_LE(std::abs(t.depth.depth[i] - s.depth.depth[i]), 1.0f / 256.0f);
  }
  for (std::size_t i = 0; i < s.full_rgb.size(); ++i) {
    ASSERT_LE(std::abs(t.full_rgb[i] - s.full_rgb[i]), 1.0f / 255.0f);
  }
  EXPECT_EQ(t.input_rgb.mask, s.input_rgb.mask);
  // A second trip through the format is exact.
  save_sample(t, dir);
  const auto u = load_sample(dir);
  EXPECT_EQ(u.full_rgb, t.full_rgb);
  EXPECT_EQ(u.depth.depth, t.depth.depth);
  fs::remove_all(dir);
}

TEST(SampleIo, EmptyDirectoryRejected) {
  const auto dir = scratch("empty");
  fs::create_directories(dir);
  EXPECT_THROW(load_sample(dir), InputError);
  fs::remove_all(dir);
}

TEST(SampleIo, CorruptMetaRejected) {
  const auto dir = scratch("corrupt");
  save_sample(synth_scene(1, 0.07, 64), dir);
  std::ofstream(dir / "meta.json") << "{ not json";
  EXPECT_THROW(load_sample(dir), InputError);
  fs::remove_all(dir);
}

TEST(SampleIo, Depth16BitEncoding) {
  const auto dir = scratch("depth16");
  auto s = synth_scene(1, 0.07, 64);
  save_sample(s, dir);
  auto raw = png::read_gray16(dir / "depth.png");
  std::fill(raw.values.begin(), raw.values.end(), 0);
  raw.values[5] = 2560;
  png::write_gray16(dir / "depth.png", raw);
  const auto t = load_sample(dir);
  EXPECT_EQ(t.depth.mask.count(), 1u);
  EXPECT_FLOAT_EQ(t.depth.depth[5], 10.0f);
  fs::remove_all(dir);
}

TEST(SampleIo, Downscale) {
  const auto s = synth_scene(3, 0.07, 128);
  const auto d = downscale_sample(s);
  EXPECT_EQ(d.height(), 64);
  EXPECT_EQ(d.width(), 128);
  EXPECT_NO_THROW(validate_pair(d.depth, d.input_rgb));
  EXPECT_DOUBLE_EQ(d.meta.camera.fx, s.meta.camera.fx / 2);
  EXPECT_EQ(d.depth.depth(0, 3, 5), s.depth.depth(0, 6, 10));
}
