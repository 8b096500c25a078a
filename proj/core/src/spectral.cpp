#include "orcsf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orcsf/error.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::spectral {

void require_finite(const FeatureMatrix& f, const char* what) {
  if (f.rows() < 1 || f.cols() < 1) {
    throw InvalidInput(std::string(what) + ": matrix must have at least one row and one column");
  }
  if (!f.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  }
}

Spectrum gram_eigenvalues(const FeatureMatrix& f, const FullDecompositionOptions& options) {
  require_finite(f, "gram_eigenvalues");
  if (f.rows() > options.max_features) {
    throw InvalidParameter("gram_eigenvalues: n = " + std::to_string(f.rows()) +
                           " exceeds the full-decomposition cap " +
                           std::to_string(options.max_features));
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(f);
  const Eigen::VectorXd& singular = svd.singularValues();

  Spectrum out;
  out.eigenvalues = Eigen::VectorXd::Zero(f.rows());
  for (Eigen::Index i = 0; i < singular.size(); ++i) {
    out.eigenvalues(i) = std::max(0.0, singular(i) * singular(i));
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
  return out;
}

double mean_eigenvalue(const FeatureMatrix& f) {
  require_finite(f, "mean_eigenvalue");
  return f.squaredNorm() / static_cast<double>(f.rows());
}

Eigen::MatrixXd compact_gram(const FeatureMatrix& f) {
  const bool wide = f.rows() <= f.cols();
  const Eigen::Index k = wide ? f.rows() : f.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  if (wide) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(f);
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose());
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return gram;
}

double top_eigenvalue_symmetric(const Eigen::MatrixXd& gram, const PowerOptions& options) {
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    throw InvalidParameter("top_eigenvalue: tol must be > 0 and max_iter >= 1");
  }
  const Eigen::Index k = gram.rows();
  Rng rng(options.seed);
  Eigen::VectorXd v = rng.normal_matrix(k, 1);
  v.normalize();

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  // Below this change theta is rounding noise and the ratio estimate is meaningless.
  const double noise = 4.0 * kEps * static_cast<double>(std::max<Eigen::Index>(k, 2));
  double theta = 0.0;
  double prev_theta = 0.0;
  double prev_delta = 0.0;
  Eigen::VectorXd w(k);
  for (int it = 1; it <= options.max_iter; ++it) {
    w.noalias() = gram * v;
    theta = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;

    if (it >= 2) {
      const double delta = std::abs(theta - prev_theta);
      if (delta <= noise * std::abs(theta)) return theta;
      if (it >= 3 && prev_delta > 0.0) {
        const double ratio = delta / prev_delta;
        if (ratio < 1.0) {
          const double error_estimate = delta * ratio / (1.0 - ratio);
          if (error_estimate <= options.tol * theta) return theta;
        }
      }
      prev_delta = delta;
    }
    prev_theta = theta;
  }
  const double residual = (gram * v - theta * v).norm() / std::max(theta, kEps);
  throw ConvergenceError("top_eigenvalue: power iteration did not converge in " +
                             std::to_string(options.max_iter) + " iterations",
                         theta, residual);
}

double top_eigenvalue(const FeatureMatrix& f, const PowerOptions& options) {
  require_finite(f, "top_eigenvalue");
  return top_eigenvalue_symmetric(compact_gram(f), options);
}

double roundness(const FeatureMatrix& f, const PowerOptions& options) {
  require_finite(f, "roundness");
  const double peak = f.cwiseAbs().maxCoeff();
  if (peak == 0.0) throw UndefinedRoundness("roundness: undefined for the zero matrix");
  // Roundness is scale invariant; rescaling keeps the Gram matrix finite.
  const FeatureMatrix scaled = f / peak;
  const double mean = scaled.squaredNorm() / static_cast<double>(f.rows());
  const Eigen::MatrixXd gram = compact_gram(scaled);
  double top = 0.0;
  try {
    top = top_eigenvalue_symmetric(gram, options);
  } catch (const ConvergenceError&) {
    // Clustered top eigenvalues (e.g. whitened data) defeat power iteration;
    // fall back to the exact solver on the compact Gram matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    top = solver.eigenvalues().maxCoeff();
  }
  // top == 0 with F != 0 is impossible: the mean would vanish as well.
  return std::min(1.0, mean / top);
}

}  // namespace orcsf::spectral
