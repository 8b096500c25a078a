#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "orcsf/pipeline/cifar.hpp"
#include "orcsf/pipeline/preprocess.hpp"

namespace orcsf::pipeline {

/// Preprocessing shared by dictionary learning and encoding.
struct Preprocessing {
  bool contrast = true;
  double var_floor = 10.0;
  bool whiten = true;
  /// The transform fitted on training patches; required when whiten is set.
  std::optional<WhiteningTransform> whitening;
};

/// Runs the preprocessing chain on patch columns (raw 0..255 scale).
FeatureMatrix preprocess(const FeatureMatrix& raw, const Preprocessing& prep);

/// max(0, z - alpha) entrywise.
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& activations, double alpha);

/// Max pooling of an n x (grid * grid) activation map (row-major grid order)
/// over a pool x pool partition of the grid. Cell (cy, cx) covers grid rows
/// [cy * grid / pool, (cy + 1) * grid / pool) and likewise for columns.
/// Output entry (cy * pool + cx) * n + f is the maximum of feature f in that cell.
Eigen::VectorXd max_pool(const Eigen::MatrixXd& activations, int grid, int pool);

struct EncoderOptions {
  double alpha = 0.25;
  int patch_size = 9;
  int pool = 4;
};

/// Soft-threshold encoder with spatial max pooling. The whitening transform
/// is folded into the dictionary: D M (x - mu) = (D M) x - (D M) mu.
class Encoder {
 public:
  /// Throws ConfigError when prep.whiten is set but no transform is present,
  /// InvalidParameter when alpha < 0.
  Encoder(const Eigen::MatrixXd& dictionary, const Preprocessing& prep, EncoderOptions options = {});

  /// Feature vector of length pool^2 * n for one 3072-byte image.
  Eigen::VectorXd encode(std::span<const std::uint8_t> image) const;

  /// Features of every image as columns, in image order.
  Eigen::MatrixXd encode_all(const ImageDataset& dataset, unsigned jobs = 1) const;

  Eigen::Index feature_length() const;

 private:
  Eigen::MatrixXd folded_;  ///< n x l
  Eigen::VectorXd bias_;    ///< n
  bool contrast_;
  double var_floor_;
  EncoderOptions options_;
};

}  // namespace orcsf::pipeline
