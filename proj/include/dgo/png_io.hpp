#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dgo/tensor.hpp"

namespace dgo::png {

/// 3 x H x W in [0,1] written as 8-bit RGB (round-to-nearest, clamped).
void write_rgb(const std::filesystem::path& path, const Tensor<float>& rgb);
Tensor<float> read_rgb(const std::filesystem::path& path);

struct Gray16 {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> values;
};

void write_gray16(const std::filesystem::path& path, const Gray16& img);
Gray16 read_gray16(const std::filesystem::path& path);

}  // namespace dgo::png
