#include "orcsf/pipeline/encoder.hpp"

#include <atomic>
#include <thread>
#include <vector>

#include "orcsf/error.hpp"
#include "orcsf/pipeline/patches.hpp"

namespace orcsf::pipeline {

FeatureMatrix preprocess(const FeatureMatrix& raw, const Preprocessing& prep) {
  FeatureMatrix out = raw;
  if (prep.contrast) contrast_normalize_inplace(out, prep.var_floor);
  if (prep.whiten) {
    if (!prep.whitening) throw ConfigError("preprocess: whitening requested but not fitted");
    out = prep.whitening->apply(out);
  }
  return out;
}

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& activations, double alpha) {
  return (activations.array() - alpha).max(0.0).matrix();
}

Eigen::VectorXd max_pool(const Eigen::MatrixXd& activations, int grid, int pool) {
  if (grid < 1 || pool < 1 || pool > grid) throw InvalidParameter("max_pool: need 1 <= pool <= grid");
  if (activations.cols() != static_cast<Eigen::Index>(grid) * grid) {
    throw InvalidInput("max_pool: activation map must have grid^2 columns");
  }
  const Eigen::Index n = activations.rows();
  Eigen::VectorXd pooled(static_cast<Eigen::Index>(pool) * pool * n);
  for (int cy = 0; cy < pool; ++cy) {
    const int y0 = cy * grid / pool;
    const int y1 = (cy + 1) * grid / pool;
    for (int cx = 0; cx < pool; ++cx) {
      const int x0 = cx * grid / pool;
      const int x1 = (cx + 1) * grid / pool;
      auto cell = pooled.segment((static_cast<Eigen::Index>(cy) * pool + cx) * n, n);
      cell = activations.col(static_cast<Eigen::Index>(y0) * grid + x0);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          cell = cell.cwiseMax(activations.col(static_cast<Eigen::Index>(y) * grid + x));
        }
      }
    }
  }
  return pooled;
}

Encoder::Encoder(const Eigen::MatrixXd& dictionary, const Preprocessing& prep,
                 EncoderOptions options)
    : contrast_(prep.contrast), var_floor_(prep.var_floor), options_(options) {
  if (!(options.alpha >= 0.0)) throw InvalidParameter("Encoder: alpha must be >= 0");
  if (dictionary.cols() != patch_length(options.patch_size)) {
    throw InvalidInput("Encoder: dictionary width " + std::to_string(dictionary.cols()) +
                       " does not match patch length " +
                       std::to_string(patch_length(options.patch_size)));
  }
  if (prep.whiten) {
    if (!prep.whitening) {
      throw ConfigError("Encoder: whitening is enabled but no fitted transform was supplied");
    }
    folded_ = dictionary * prep.whitening->matrix;
    bias_ = folded_ * prep.whitening->mean;
  } else {
    folded_ = dictionary;
    bias_ = Eigen::VectorXd::Zero(dictionary.rows());
  }
}

Eigen::Index Encoder::feature_length() const {
  return static_cast<Eigen::Index>(options_.pool) * options_.pool * folded_.rows();
}

Eigen::VectorXd Encoder::encode(std::span<const std::uint8_t> image) const {
  PatchSet dense = extract_dense_patches(image, options_.patch_size, 1);
  if (contrast_) contrast_normalize_inplace(dense.values, var_floor_);
  Eigen::MatrixXd activations = folded_ * dense.values;
  activations.colwise() -= bias_;
  const int grid = kImageSide - options_.patch_size + 1;
  return max_pool(soft_threshold(activations, options_.alpha), grid, options_.pool);
}

Eigen::MatrixXd Encoder::encode_all(const ImageDataset& dataset, unsigned jobs) const {
  Eigen::MatrixXd features(feature_length(), static_cast<Eigen::Index>(dataset.size()));
  const std::size_t count = dataset.size();
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      features.col(static_cast<Eigen::Index>(i)) = encode(dataset.image(i));
    }
    return features;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        features.col(static_cast<Eigen::Index>(i)) = encode(dataset.image(i));
      }
    });
  }
  for (auto& t : workers) t.join();
  return features;
}

}  // namespace orcsf::pipeline
