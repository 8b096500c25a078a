#include "orcsf/pipeline/patches.hpp"

#include <string>

#include "orcsf/error.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::pipeline {
namespace {

void check_size(int size) {
  if (size < 1 || size > kImageSide) {
    throw InvalidParameter("patch size must be in [1, 32], got " + std::to_string(size));
  }
}

}  // namespace

void copy_patch(std::span<const std::uint8_t> image, int size, int x, int y, double* out) {
  for (int c = 0; c < kChannels; ++c) {
    const std::uint8_t* plane = image.data() + c * kImageSide * kImageSide;
    for (int dy = 0; dy < size; ++dy) {
      const std::uint8_t* row = plane + (y + dy) * kImageSide + x;
      for (int dx = 0; dx < size; ++dx) *out++ = static_cast<double>(row[dx]);
    }
  }
}

PatchSet extract_random_patches(const ImageDataset& dataset, std::size_t count, int size,
                                std::uint64_t seed) {
  check_size(size);
  if (count < 1) throw InvalidParameter("extract_random_patches: count must be >= 1");
  if (dataset.size() == 0) throw InvalidInput("extract_random_patches: empty dataset");

  const auto positions = static_cast<std::uint64_t>(kImageSide - size + 1);
  PatchSet out;
  out.size = size;
  out.values.resize(patch_length(size), static_cast<Eigen::Index>(count));
  out.origins.reserve(count);
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const auto image = static_cast<std::size_t>(rng.below(dataset.size()));
    const auto x = static_cast<int>(rng.below(positions));
    const auto y = static_cast<int>(rng.below(positions));
    copy_patch(dataset.image(image), size, x, y, out.values.col(static_cast<Eigen::Index>(k)).data());
    out.origins.push_back({image, x, y});
  }
  return out;
}

PatchSet extract_dense_patches(std::span<const std::uint8_t> image, int size, int stride) {
  check_size(size);
  if (stride < 1) throw InvalidParameter("extract_dense_patches: stride must be >= 1");
  if (image.size() != kImageBytes) throw InvalidInput("extract_dense_patches: bad image size");

  const int grid = (kImageSide - size) / stride + 1;
  PatchSet out;
  out.size = size;
  out.values.resize(patch_length(size), static_cast<Eigen::Index>(grid) * grid);
  out.origins.reserve(static_cast<std::size_t>(grid) * grid);
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      const Eigen::Index column = static_cast<Eigen::Index>(gy) * grid + gx;
      copy_patch(image, size, gx * stride, gy * stride, out.values.col(column).data());
      out.origins.push_back({0, gx * stride, gy * stride});
    }
  }
  return out;
}

}  // namespace orcsf::pipeline
