#include "orcsf/pipeline/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "orcsf/error.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::pipeline {

Eigen::MatrixXd LinearSvm::scores(const Eigen::MatrixXd& features) const {
  if (features.rows() != feature_mean.size()) {
    throw InvalidInput("LinearSvm: feature dimension mismatch");
  }
  const Eigen::MatrixXd standardized =
      feature_scale.asDiagonal() * (features.colwise() - feature_mean);
  return (weights * standardized).colwise() + bias;
}

std::vector<int> LinearSvm::predict(const Eigen::MatrixXd& features) const {
  const Eigen::MatrixXd s = scores(features);
  std::vector<int> out(static_cast<std::size_t>(s.cols()));
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    Eigen::Index best = 0;
    s.col(j).maxCoeff(&best);
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

LinearSvm train_classifier(const Eigen::MatrixXd& features, std::span<const int> labels,
                           const SvmConfig& config) {
  const Eigen::Index d = features.rows();
  const Eigen::Index m = features.cols();
  if (static_cast<std::size_t>(m) != labels.size()) {
    throw InvalidInput("train_classifier: one label per feature column required");
  }
  if (m < 10) throw InvalidInput("train_classifier: need at least 10 samples");
  if (!(config.lambda >= 0.0) || config.epochs < 1) {
    throw InvalidParameter("train_classifier: lambda must be >= 0 and epochs >= 1");
  }
  if (!features.allFinite()) throw InvalidInput("train_classifier: non-finite features");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0 || k < 2) {
    throw InvalidInput("train_classifier: labels must be non-negative with at least 2 classes");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw InvalidInput("train_classifier: class " + std::to_string(c) +
                         " is absent from the training labels");
    }
  }

  LinearSvm svm;
  svm.feature_mean = features.rowwise().mean();
  const Eigen::MatrixXd centered = features.colwise() - svm.feature_mean;
  svm.feature_scale = (centered.rowwise().squaredNorm() / static_cast<double>(m)).cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sd = svm.feature_scale(i);
    svm.feature_scale(i) = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  const Eigen::MatrixXd x = svm.feature_scale.asDiagonal() * centered;

  const double mean_sq = x.colwise().squaredNorm().mean();
  const double eta0 = 1.0 / (2.0 * std::max(mean_sq, 1e-12));

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd w_avg = Eigen::MatrixXd::Zero(k, d);
  Eigen::VectorXd b_avg = Eigen::VectorXd::Zero(k);
  std::size_t averaged = 0;
  const std::size_t average_from = config.epochs / 2;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(config.seed);
  double t = 0.0;
  Eigen::VectorXd coeff(k);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }
    for (Eigen::Index idx : order) {
      const double eta = eta0 / (1.0 + eta0 * config.lambda * t);
      const auto xi = x.col(idx);
      const Eigen::VectorXd f = w * xi + b;
      const int yi = labels[static_cast<std::size_t>(idx)];
      for (int c = 0; c < k; ++c) {
        const double y = c == yi ? 1.0 : -1.0;
        const double slack = 1.0 - y * f(c);
        coeff(c) = slack > 0.0 ? 2.0 * slack * y : 0.0;
      }
      // Proximal step on the penalty, plain gradient step on the loss.
      w.noalias() += eta * coeff * xi.transpose();
      w /= 1.0 + eta * config.lambda;
      b += eta * coeff;
      t += 1.0;
      if (epoch >= average_from) {
        ++averaged;
        const double mix = 1.0 / static_cast<double>(averaged);
        w_avg += mix * (w - w_avg);
        b_avg += mix * (b - b_avg);
      }
    }
  }
  svm.weights = std::move(w_avg);
  svm.bias = std::move(b_avg);
  return svm;
}

double evaluate(const LinearSvm& classifier, const Eigen::MatrixXd& features,
                std::span<const int> labels) {
  if (static_cast<std::size_t>(features.cols()) != labels.size()) {
    throw InvalidInput("evaluate: one label per feature column required");
  }
  if (labels.empty()) throw InvalidInput("evaluate: no samples");
  const std::vector<int> predicted = classifier.predict(features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace orcsf::pipeline
