#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace orcsf {

/// Dense feature matrix: rows are features (n), columns are samples (p).
using FeatureMatrix = Eigen::MatrixXd;

namespace spectral {

/// Eigenvalues of F F^T, sorted descending and clamped at zero.
struct Spectrum {
  Eigen::VectorXd eigenvalues;

  double largest() const { return eigenvalues(0); }
  double smallest() const { return eigenvalues(eigenvalues.size() - 1); }
  double mean() const { return eigenvalues.mean(); }
};

struct FullDecompositionOptions {
  /// Largest n accepted by gram_eigenvalues.
  Eigen::Index max_features = 4096;
};

struct PowerOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  std::uint64_t seed = 0x5EEDu;
};

/// Throws InvalidInput unless every entry is finite and the matrix is non-empty.
void require_finite(const FeatureMatrix& f, const char* what);

/// Full spectrum of F F^T computed as squared singular values of F.
/// Entries beyond min(n, p) are exact zeros.
Spectrum gram_eigenvalues(const FeatureMatrix& f, const FullDecompositionOptions& options = {});

/// ||F||_F^2 / n, the mean eigenvalue of F F^T by the trace identity.
double mean_eigenvalue(const FeatureMatrix& f);

/// Largest eigenvalue of F F^T by power iteration on the smaller of the two
/// Gram matrices (F F^T or F^T F share their nonzero spectrum).
///
/// Stops when the a posteriori error estimate delta * q / (1 - q) of the
/// Rayleigh quotient falls below tol * estimate, where delta is the last
/// change and q the observed contraction ratio of successive changes.
/// Throws ConvergenceError after max_iter iterations.
double top_eigenvalue(const FeatureMatrix& f, const PowerOptions& options = {});

/// Largest eigenvalue of a symmetric positive semi-definite matrix.
double top_eigenvalue_symmetric(const Eigen::MatrixXd& gram, const PowerOptions& options = {});

/// The smaller Gram matrix of F (n x n when n <= p, otherwise p x p).
Eigen::MatrixXd compact_gram(const FeatureMatrix& f);

/// Mean eigenvalue over largest eigenvalue of F F^T, in [1/n, 1].
/// Throws UndefinedRoundness for F = 0. Values above 1 caused by round-off
/// in the power iteration are clamped to 1. When power iteration does not
/// converge within options.max_iter, the exact eigensolver is used instead.
double roundness(const FeatureMatrix& f, const PowerOptions& options = {});

}  // namespace spectral
}  // namespace orcsf
