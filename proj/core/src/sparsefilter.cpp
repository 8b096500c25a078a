#include "orcsf/sparsefilter.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "orcsf/error.hpp"
#include "orcsf/io.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::sf {
namespace {

Eigen::MatrixXd inverse_sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.operatorInverseSqrt();
}

Eigen::MatrixXd inverse_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Selector e_i e_i^T of size k.
Eigen::MatrixXd selector(Eigen::Index k, Eigen::Index i) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, k);
  e(i, i) = 1.0;
  return e;
}

ObjectiveValue l1_of_normalized(const FeatureMatrix& product, double guard) {
  const Normalized normalized = normalize(product, guard);
  return {normalized.values.cwiseAbs().sum(), normalized.degenerate()};
}

}  // namespace

Normalized normalize_rows(const FeatureMatrix& a, double guard) {
  spectral::require_finite(a, "normalize_rows");
  Normalized out{a, {}, {}};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double norm = a.row(i).norm();
    if (norm < guard) {
      out.values.row(i).setZero();
      out.degenerate_rows.push_back(i);
    } else {
      out.values.row(i) /= norm;
    }
  }
  return out;
}

Normalized normalize_cols(const FeatureMatrix& b, double guard) {
  spectral::require_finite(b, "normalize_cols");
  Normalized out{b, {}, {}};
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const double norm = b.col(j).norm();
    if (norm < guard) {
      out.values.col(j).setZero();
      out.degenerate_cols.push_back(j);
    } else {
      out.values.col(j) /= norm;
    }
  }
  return out;
}

Normalized normalize(const FeatureMatrix& a, double guard) {
  Normalized rows = normalize_rows(a, guard);
  Normalized cols = normalize_cols(rows.values, guard);
  cols.degenerate_rows = std::move(rows.degenerate_rows);
  return cols;
}

FeatureMatrix normalize_explicit(const SFWeights& w, const FeatureMatrix& x) {
  const FeatureMatrix f = transform(w, x);
  const Eigen::Index n = f.rows();
  const Eigen::Index p = f.cols();

  const Eigen::MatrixXd fft = f * f.transpose();
  Eigen::MatrixXd row_factor = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd e = selector(n, i);
    row_factor += e * fft * e;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_factor(i, i) == 0.0) {
      throw SingularityError("normalize_explicit: row " + std::to_string(i) + " of WX is zero",
                             SingularityError::Axis::Row, static_cast<std::size_t>(i));
    }
  }

  const Eigen::MatrixXd inner = f.transpose() * inverse_psd(row_factor) * f;
  Eigen::MatrixXd col_factor = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::MatrixXd g = selector(p, i);
    col_factor += g * inner * g;
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (col_factor(i, i) == 0.0) {
      throw SingularityError("normalize_explicit: column " + std::to_string(i) + " of WX is zero",
                             SingularityError::Axis::Column, static_cast<std::size_t>(i));
    }
  }
  return inverse_sqrt_psd(row_factor) * f * inverse_sqrt_psd(col_factor);
}

double ObjectiveValue::effective() const {
  return degenerate ? std::numeric_limits<double>::infinity() : value;
}

ObjectiveValue objective_exact(const SFWeights& w, const FeatureMatrix& x, double guard) {
  spectral::require_finite(x, "objective_exact");
  return l1_of_normalized(transform(w, x), guard);
}

double objective_and_gradient(const Eigen::MatrixXd& w, const FeatureMatrix& x, double epsilon,
                              double guard, Eigen::MatrixXd& grad) {
  const Eigen::MatrixXd f = w * x;

  const Eigen::ArrayXd row_norm = (f.rowwise().squaredNorm().array() + epsilon).sqrt().max(guard);
  if (!row_norm.allFinite()) {
    // Overflowed norms would silently zero rows; report the value as non-finite.
    grad.setConstant(w.rows(), w.cols(), std::numeric_limits<double>::quiet_NaN());
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd a = row_norm.inverse().matrix().asDiagonal() * f;

  const Eigen::ArrayXd col_norm =
      (a.colwise().squaredNorm().transpose().array() + epsilon).sqrt().max(guard);
  const Eigen::MatrixXd b = a * col_norm.inverse().matrix().asDiagonal();

  const Eigen::ArrayXXd soft = (b.array().square() + epsilon).sqrt();
  const double value = soft.sum();

  // Backward through sum(sqrt(B^2 + eps)).
  const Eigen::MatrixXd grad_b = (b.array() / soft).matrix();

  // Through the column normalization B = A diag(1/c).
  const Eigen::ArrayXd col_dot = (a.cwiseProduct(grad_b)).colwise().sum().transpose().array();
  Eigen::MatrixXd grad_a = grad_b * col_norm.inverse().matrix().asDiagonal();
  {
    Eigen::ArrayXd coeff = col_dot / col_norm.cube();
    for (Eigen::Index j = 0; j < coeff.size(); ++j) {
      if (col_norm(j) == guard) coeff(j) = 0.0;  // floored: norm is locally constant
    }
    grad_a -= a * coeff.matrix().asDiagonal();
  }

  // Through the row normalization A = diag(1/r) F.
  const Eigen::ArrayXd row_dot = f.cwiseProduct(grad_a).rowwise().sum().array();
  Eigen::MatrixXd grad_f = row_norm.inverse().matrix().asDiagonal() * grad_a;
  {
    Eigen::ArrayXd coeff = row_dot / row_norm.cube();
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      if (row_norm(i) == guard) coeff(i) = 0.0;
    }
    grad_f -= coeff.matrix().asDiagonal() * f;
  }

  grad.noalias() = grad_f * x.transpose();
  return value;
}

double objective_smoothed(const SFWeights& w, const FeatureMatrix& x, double epsilon,
                          double guard) {
  if (!(epsilon > 0.0)) throw InvalidParameter("objective_smoothed: epsilon must be > 0");
  transform(w, x);  // shape check
  Eigen::MatrixXd unused(w.matrix.rows(), w.matrix.cols());
  return objective_and_gradient(w.matrix, x, epsilon, guard, unused);
}

Eigen::MatrixXd gradient(const SFWeights& w, const FeatureMatrix& x, double epsilon,
                         double guard) {
  if (!(epsilon > 0.0)) throw InvalidParameter("gradient: epsilon must be > 0");
  transform(w, x);
  Eigen::MatrixXd grad(w.matrix.rows(), w.matrix.cols());
  objective_and_gradient(w.matrix, x, epsilon, guard, grad);
  return grad;
}

FeatureMatrix transform(const SFWeights& w, const FeatureMatrix& x) {
  if (w.matrix.cols() != x.rows()) {
    throw InvalidInput("transform: W has " + std::to_string(w.matrix.cols()) +
                       " columns but X has " + std::to_string(x.rows()) + " rows");
  }
  return w.matrix * x;
}

void SFConfig::validate() const {
  if (features < 1) throw InvalidParameter("SFConfig: features must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidParameter("SFConfig: epsilon must be > 0");
  if (!(guard > 0.0)) throw InvalidParameter("SFConfig: guard must be > 0");
  if (max_iterations < 1) throw InvalidParameter("SFConfig: max_iterations must be >= 1");
  if (snapshot_every < 1) throw InvalidParameter("SFConfig: snapshot_every must be >= 1");
}

SFWeights initial_weights(Eigen::Index features, Eigen::Index inputs, std::uint64_t seed) {
  Rng rng(seed);
  return {rng.normal_matrix(features, inputs) / std::sqrt(static_cast<double>(inputs))};
}

TrainResult train(const FeatureMatrix& x, const SFConfig& config, Monitor* monitor) {
  config.validate();
  spectral::require_finite(x, "train");

  Eigen::MatrixXd w = initial_weights(config.features, x.rows(), config.seed).matrix;
  const optim::Objective objective = [&](const Eigen::MatrixXd& at, Eigen::MatrixXd& grad) {
    return objective_and_gradient(at, x, config.epsilon, config.guard, grad);
  };

  Eigen::MatrixXd grad(w.rows(), w.cols());
  double fx = objective(w, grad);
  if (!std::isfinite(fx) || !grad.allFinite()) {
    throw DivergenceError("train: non-finite objective at the initial weights", w, 0);
  }

  optim::Lbfgs lbfgs(config.lbfgs);
  optim::Adam adam(config.adam);

  TrainResult result{};
  bool halted = false;
  std::size_t last_snapshot = 0;
  bool any_snapshot = false;

  auto snapshot = [&](std::size_t iteration) {
    const FeatureMatrix product = w * x;
    const ObjectiveValue exact = l1_of_normalized(product, config.guard);
    IterateRecord record{iteration, fx, exact.value, exact.degenerate,
                         spectral::roundness(product, config.power), std::nullopt};
    if (config.keep_snapshots) record.weights = w;
    result.trace.push_back(std::move(record));
    last_snapshot = iteration;
    any_snapshot = true;
    return monitor != nullptr && monitor->observe(result.trace.back(), w);
  };

  std::size_t iteration = 0;
  Eigen::MatrixXd previous;
  while (iteration < config.max_iterations) {
    previous = w;
    const optim::StepResult step = config.optimizer == OptimizerKind::Lbfgs
                                       ? lbfgs.step(w, fx, grad, objective)
                                       : adam.step(w, fx, grad, objective);
    if (step.status == optim::StepStatus::Converged) {
      result.converged = true;
      break;
    }
    ++iteration;
    if (!std::isfinite(fx) || !grad.allFinite()) {
      throw DivergenceError("train: non-finite objective or gradient at iteration " +
                                std::to_string(iteration),
                            previous, iteration - 1);
    }
    if (iteration % config.snapshot_every == 0 || iteration == config.max_iterations) {
      if (snapshot(iteration)) {
        halted = true;
        break;
      }
    }
  }
  if (!halted && (!any_snapshot || last_snapshot != iteration)) {
    halted = snapshot(iteration);
  }

  result.iterations = iteration;
  result.halted_by_monitor = halted;
  const Eigen::MatrixXd* chosen = monitor != nullptr ? monitor->selected_weights() : nullptr;
  if (chosen != nullptr) {
    result.weights = SFWeights{*chosen};
    result.selected_iteration = monitor->selected_iteration().value_or(iteration);
  } else {
    result.weights = SFWeights{std::move(w)};
    result.selected_iteration = iteration;
  }
  return result;
}

void write_trace_csv(std::ostream& out, const IterateTrace& trace) {
  out << "iteration,objective_exact,objective_smoothed,roundness\n";
  for (const auto& r : trace) {
    out << r.iteration << ','
        << (r.degenerate ? std::string("inf") : io::format_number(r.objective_exact)) << ','
        << io::format_number(r.objective_smoothed) << ',' << io::format_number(r.roundness)
        << '\n';
  }
}

}  // namespace orcsf::sf
