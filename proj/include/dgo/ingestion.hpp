#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dgo/datamodel.hpp"

namespace dgo {

inline constexpr int kCanvasHeight = 256;
inline constexpr int kCanvasWidth = 512;
inline constexpr double kNearPlane = 0.1;     // meters
inline constexpr double kDepthPngScale = 256.0;  // 16-bit PNG units per meter

struct CameraIntrinsics {
  double fx = 256.0;
  double fy = 256.0;
  double cx = 256.0;
  double cy = 128.0;
  int width = kCanvasWidth;
  int height = kCanvasHeight;

  void validate() const;
  /// Default street camera for a canvas of height h and width 2h.
  static CameraIntrinsics for_canvas(int height);
};

/// Camera-frame points: x right, y down, z forward, meters.
struct PointCloud {
  std::vector<std::array<double, 3>> points;
};

struct Projection {
  SparseDepthMap map;
  std::size_t dropped = 0;
};

/// Pinhole z-buffer projection; the nearest point wins each pixel.
Projection project_points(const PointCloud& cloud, const CameraIntrinsics& cam);

/// Known-region mask for an h x 2h canvas: ones on columns [h/2, 3h/2).
BinaryMask known_region_mask(int height, int width);

/// Outpainting layout of a 3 x 256 x 512 image.
MaskedRGB make_layout(const Tensor<float>& full_rgb);
/// Same layout rule for any h x 2h canvas (h even).
MaskedRGB make_layout(const Tensor<float>& full_rgb, int canvas_height);

struct SampleMeta {
  std::uint64_t seed = 0;
  double sparsity = 0.07;
  CameraIntrinsics camera;
};

struct Sample {
  Tensor<float> full_rgb;  // ground truth
  MaskedRGB input_rgb;
  SparseDepthMap depth;
  SampleMeta meta;

  int height() const { return full_rgb.height(); }
  int width() const { return full_rgb.width(); }
};

/// Dense rendering of a synthetic street: the geometry behind every sample.
struct SceneRender {
  Tensor<float> rgb;          // 3 x H x W
  Tensor<float> dense_depth;  // 1 x H x W, z in meters, everywhere > 0
  std::vector<int> labels;    // region id per pixel (0 sky, 1 ground, 2+ cuboid faces)
  CameraIntrinsics camera;
  int cuboids = 0;
};

SceneRender render_scene(std::uint64_t seed, int canvas_height = kCanvasHeight);

/// Pixels whose 4-neighbourhood contains a different region label.
BinaryMask region_boundaries(const SceneRender& scene);

/// Deterministic synthetic sample; each rendered pixel is kept with probability `sparsity`.
Sample synth_scene(std::uint64_t seed, double sparsity = 0.07, int canvas_height = kCanvasHeight);

/// Directory layout: rgb.png (8-bit RGB), depth.png (16-bit, meters * 256), meta.json.
void save_sample(const Sample& s, const std::filesystem::path& dir);
Sample load_sample(const std::filesystem::path& dir);

/// Average-pools rgb and subsamples depth by 2 (keeps the top-left pixel of each block).
Sample downscale_sample(const Sample& s);

}  // namespace dgo
