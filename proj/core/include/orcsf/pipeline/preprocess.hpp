#pragma once

#include <string>

#include <Eigen/Dense>

#include "orcsf/spectral.hpp"

namespace orcsf::pipeline {

struct ContrastResult {
  FeatureMatrix values;
  /// Columns whose variance plus floor was zero; they are returned as zeros.
  std::size_t flagged = 0;
};

/// Per column: subtract the column mean and divide by sqrt(variance + var_floor),
/// variance being the population variance of that column.
ContrastResult contrast_normalize(const FeatureMatrix& patches, double var_floor = 10.0);

/// In-place variant used on the encoding hot path; returns the flagged count.
std::size_t contrast_normalize_inplace(FeatureMatrix& patches, double var_floor);

/// ZCA whitening: x -> M (x - mean), M = V (Lambda + eps I)^{-1/2} V^T from the
/// eigendecomposition of the population covariance of the fitting set.
struct WhiteningTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd matrix;
  double eps_zca = 0.1;
  /// Fewer samples than dimensions in the fitting set.
  bool underdetermined = false;

  FeatureMatrix apply(const FeatureMatrix& patches) const;
  /// 16 hex digits of FNV-1a over the bytes of mean and matrix.
  std::string fingerprint() const;
};

WhiteningTransform fit_whitening(const FeatureMatrix& patches, double eps_zca = 0.1);

inline FeatureMatrix apply_whitening(const WhiteningTransform& t, const FeatureMatrix& patches) {
  return t.apply(patches);
}

/// Population covariance of the columns of `samples`.
Eigen::MatrixXd sample_covariance(const FeatureMatrix& samples);

}  // namespace orcsf::pipeline
