#pragma once

#include <cstddef>
#include <deque>
#include <functional>

#include <Eigen/Dense>

namespace orcsf::optim {

/// Objective returning f(x) and writing its gradient into `grad`.
using Objective = std::function<double(const Eigen::MatrixXd& x, Eigen::MatrixXd& grad)>;

enum class StepStatus {
  Accepted,   ///< x moved and f decreased (or, for Adam, stayed within tolerance)
  Converged,  ///< gradient vanished or no decrease could be found
};

struct StepResult {
  StepStatus status;
  int evaluations;
};

struct LbfgsParams {
  int memory = 10;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 50;
  double gradient_tol = 1e-10;  ///< relative to max(1, |f|)
};

/// Limited-memory BFGS with a backtracking Armijo line search. Every accepted
/// step strictly decreases f.
class Lbfgs {
 public:
  explicit Lbfgs(LbfgsParams params = {}) : params_(params) {}

  /// Advances (x, fx, grad) by one iteration. On Converged the state is unchanged.
  StepResult step(Eigen::MatrixXd& x, double& fx, Eigen::MatrixXd& grad, const Objective& f);

 private:
  Eigen::MatrixXd direction(const Eigen::MatrixXd& grad) const;

  LbfgsParams params_;
  std::deque<Eigen::MatrixXd> s_;
  std::deque<Eigen::MatrixXd> y_;
  std::deque<double> rho_;
  bool first_ = true;
};

struct AdamParams {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// A step raising f by more than this (relative to max(1, |f|)) is
  /// rejected and retried with half the learning rate.
  double increase_tol = 1e-6;
  int max_rejections = 30;
};

/// Adam with step rejection, so accepted steps never raise f beyond tolerance.
class Adam {
 public:
  explicit Adam(AdamParams params = {}) : params_(params), rate_(params.learning_rate) {}

  StepResult step(Eigen::MatrixXd& x, double& fx, Eigen::MatrixXd& grad, const Objective& f);

 private:
  AdamParams params_;
  double rate_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd v_;
  long t_ = 0;
};

}  // namespace orcsf::optim
