#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "orcsf/pipeline/cifar.hpp"
#include "orcsf/spectral.hpp"

namespace orcsf::pipeline {

struct PatchOrigin {
  std::size_t image;
  int x;  ///< left column of the patch
  int y;  ///< top row of the patch

  bool operator==(const PatchOrigin&) const = default;
};

/// Patches as columns of an l x p matrix, l = 3 * size * size. Within a
/// column, entry c * size^2 + dy * size + dx holds channel c at patch row dy,
/// column dx (channel-major, then row-major), on the raw 0..255 scale.
struct PatchSet {
  FeatureMatrix values;
  std::vector<PatchOrigin> origins;
  int size = 9;

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index count() const { return values.cols(); }
};

constexpr Eigen::Index patch_length(int size) { return 3 * size * size; }

/// Copies the patch at (x, y) of a 3072-byte image into `out` (length l).
void copy_patch(std::span<const std::uint8_t> image, int size, int x, int y, double* out);

/// `count` patches at uniformly random (image, x, y) with the patch fully
/// inside the image. Deterministic in `seed`.
PatchSet extract_random_patches(const ImageDataset& dataset, std::size_t count, int size,
                                std::uint64_t seed);

/// Every patch of one image on a stride grid, in row-major grid order:
/// with g = (32 - size) / stride + 1 positions per axis, patch index
/// gy * g + gx sits at (x, y) = (gx * stride, gy * stride).
PatchSet extract_dense_patches(std::span<const std::uint8_t> image, int size, int stride = 1);

}  // namespace orcsf::pipeline
