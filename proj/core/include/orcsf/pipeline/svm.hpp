#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace orcsf::pipeline {

struct SvmConfig {
  double lambda = 1e-4;  ///< L2 penalty on the weights (the bias is not penalized)
  std::size_t epochs = 20;
  std::uint64_t seed = 7;
};

/// One-vs-rest linear classifier over standardized features.
struct LinearSvm {
  Eigen::MatrixXd weights;  ///< classes x d
  Eigen::VectorXd bias;     ///< classes
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;  ///< 1 / std, or 1 for constant features

  int classes() const { return static_cast<int>(weights.rows()); }
  /// Decision scores (classes x m) for feature columns.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& features) const;
  /// argmax of the scores per column; ties go to the lower class id.
  std::vector<int> predict(const Eigen::MatrixXd& features) const;
};

/// Minimizes, per class c with targets y = +1 for c and -1 otherwise,
///   lambda/2 ||w||^2 + mean_i max(0, 1 - y_i (w . x_i + b))^2
/// by seeded stochastic gradient descent with the proximal L2 step
///   w <- (w + eta * g) / (1 + eta * lambda),  eta_t = eta0 / (1 + eta0 * lambda * t),
/// eta0 = 1 / (2 mean ||x||^2), and averages the iterates of the second half
/// of the epochs. Features (columns) are standardized with training mean/std.
/// Labels must cover 0..k-1 with every class present and m >= 10.
LinearSvm train_classifier(const Eigen::MatrixXd& features, std::span<const int> labels,
                           const SvmConfig& config = {});

/// Fraction of columns whose predicted label matches.
double evaluate(const LinearSvm& classifier, const Eigen::MatrixXd& features,
                std::span<const int> labels);

}  // namespace orcsf::pipeline
