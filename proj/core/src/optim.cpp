#include "orcsf/optim.hpp"

#include <algorithm>
#include <cmath>

namespace orcsf::optim {

Eigen::MatrixXd Lbfgs::direction(const Eigen::MatrixXd& grad) const {
  // Two-loop recursion; s_/y_ hold the oldest pair at the front.
  Eigen::MatrixXd q = grad;
  const std::size_t m = s_.size();
  std::vector<double> alpha(m);
  for (std::size_t i = m; i-- > 0;) {
    alpha[i] = rho_[i] * (s_[i].cwiseProduct(q)).sum();
    q -= alpha[i] * y_[i];
  }
  if (m > 0) {
    const double gamma = (s_.back().cwiseProduct(y_.back())).sum() / y_.back().squaredNorm();
    q *= gamma;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho_[i] * (y_[i].cwiseProduct(q)).sum();
    q += (alpha[i] - beta) * s_[i];
  }
  return -q;
}

StepResult Lbfgs::step(Eigen::MatrixXd& x, double& fx, Eigen::MatrixXd& grad,
                       const Objective& f) {
  const double gnorm = grad.norm();
  if (gnorm <= params_.gradient_tol * std::max(1.0, std::abs(fx))) {
    return {StepStatus::Converged, 0};
  }

  Eigen::MatrixXd d = direction(grad);
  double slope = (grad.cwiseProduct(d)).sum();
  if (!(slope < 0.0)) {
    s_.clear();
    y_.clear();
    rho_.clear();
    d = -grad;
    slope = -gnorm * gnorm;
  }

  // The first step has no curvature information; scale it to unit length.
  double t = first_ ? std::min(1.0, 1.0 / d.norm()) : 1.0;
  Eigen::MatrixXd trial_grad(grad.rows(), grad.cols());
  int evaluations = 0;
  for (int attempt = 0; attempt <= params_.max_backtracks; ++attempt) {
    Eigen::MatrixXd trial = x + t * d;
    const double ft = f(trial, trial_grad);
    ++evaluations;
    if (std::isfinite(ft) && ft <= fx + params_.armijo * t * slope && ft < fx) {
      Eigen::MatrixXd s = trial - x;
      Eigen::MatrixXd y = trial_grad - grad;
      const double sy = (s.cwiseProduct(y)).sum();
      if (sy > 1e-10 * s.norm() * y.norm()) {
        if (static_cast<int>(s_.size()) == params_.memory) {
          s_.pop_front();
          y_.pop_front();
          rho_.pop_front();
        }
        s_.push_back(std::move(s));
        y_.push_back(std::move(y));
        rho_.push_back(1.0 / sy);
      }
      x = std::move(trial);
      fx = ft;
      grad = trial_grad;
      first_ = false;
      return {StepStatus::Accepted, evaluations};
    }
    t *= params_.backtrack;
  }
  return {StepStatus::Converged, evaluations};
}

StepResult Adam::step(Eigen::MatrixXd& x, double& fx, Eigen::MatrixXd& grad,
                      const Objective& f) {
  if (m_.size() == 0) {
    m_ = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    v_ = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  }
  const long t = t_ + 1;
  Eigen::MatrixXd m = params_.beta1 * m_ + (1.0 - params_.beta1) * grad;
  Eigen::MatrixXd v = params_.beta2 * v_ + (1.0 - params_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(params_.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(params_.beta2, static_cast<double>(t));
  const Eigen::MatrixXd update =
      (m / c1).array() / ((v / c2).array().sqrt() + params_.epsilon);

  Eigen::MatrixXd trial_grad(grad.rows(), grad.cols());
  int evaluations = 0;
  for (int attempt = 0; attempt <= params_.max_rejections; ++attempt) {
    Eigen::MatrixXd trial = x - rate_ * update;
    const double ft = f(trial, trial_grad);
    ++evaluations;
    const double allowed = fx + params_.increase_tol * std::max(1.0, std::abs(fx));
    if (!std::isfinite(ft) || ft <= allowed) {
      m_ = std::move(m);
      v_ = std::move(v);
      t_ = t;
      x = std::move(trial);
      fx = ft;
      grad = trial_grad;
      return {StepStatus::Accepted, evaluations};
    }
    rate_ *= 0.5;
  }
  return {StepStatus::Converged, evaluations};
}

}  // namespace orcsf::optim
