#include "orcsf/pipeline/preprocess.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "orcsf/error.hpp"

namespace orcsf::pipeline {
namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t hash) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace

std::size_t contrast_normalize_inplace(FeatureMatrix& patches, double var_floor) {
  if (!(var_floor >= 0.0)) throw InvalidParameter("contrast_normalize: var_floor must be >= 0");
  std::size_t flagged = 0;
  const double length = static_cast<double>(patches.rows());
  for (Eigen::Index j = 0; j < patches.cols(); ++j) {
    auto column = patches.col(j);
    const double mean = column.mean();
    column.array() -= mean;
    const double variance = column.squaredNorm() / length;
    const double denom = std::sqrt(variance + var_floor);
    if (denom == 0.0) {
      column.setZero();
      ++flagged;
    } else {
      column /= denom;
    }
  }
  return flagged;
}

ContrastResult contrast_normalize(const FeatureMatrix& patches, double var_floor) {
  spectral::require_finite(patches, "contrast_normalize");
  ContrastResult out{patches, 0};
  out.flagged = contrast_normalize_inplace(out.values, var_floor);
  return out;
}

Eigen::MatrixXd sample_covariance(const FeatureMatrix& samples) {
  const Eigen::VectorXd mean = samples.rowwise().mean();
  const FeatureMatrix centered = samples.colwise() - mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(samples.rows(), samples.rows());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(samples.cols()));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return cov;
}

WhiteningTransform fit_whitening(const FeatureMatrix& patches, double eps_zca) {
  if (!(eps_zca > 0.0)) throw InvalidParameter("fit_whitening: eps_zca must be > 0");
  spectral::require_finite(patches, "fit_whitening");
  const Eigen::MatrixXd cov = sample_covariance(patches);
  if (!cov.allFinite()) throw InvalidInput("fit_whitening: non-finite covariance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd scale =
      (es.eigenvalues().cwiseMax(0.0).array() + eps_zca).rsqrt().matrix();

  WhiteningTransform t;
  t.mean = patches.rowwise().mean();
  t.matrix = es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
  // Symmetrize away round-off so the transform is exactly symmetric.
  t.matrix = (0.5 * (t.matrix + t.matrix.transpose())).eval();
  t.eps_zca = eps_zca;
  t.underdetermined = patches.cols() <= patches.rows();
  return t;
}

FeatureMatrix WhiteningTransform::apply(const FeatureMatrix& patches) const {
  if (patches.rows() != mean.size()) {
    throw InvalidInput("apply_whitening: patch length " + std::to_string(patches.rows()) +
                       " does not match transform dimension " + std::to_string(mean.size()));
  }
  return matrix * (patches.colwise() - mean);
}

std::string WhiteningTransform::fingerprint() const {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  hash = fnv1a(mean.data(), sizeof(double) * static_cast<std::size_t>(mean.size()), hash);
  hash = fnv1a(matrix.data(), sizeof(double) * static_cast<std::size_t>(matrix.size()), hash);
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

}  // namespace orcsf::pipeline
