#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "orcsf/optim.hpp"
#include "orcsf/spectral.hpp"

namespace orcsf::sf {

/// Sparse Filtering weights, n learned features by l input features.
struct SFWeights {
  Eigen::MatrixXd matrix;

  Eigen::Index features() const { return matrix.rows(); }
  Eigen::Index inputs() const { return matrix.cols(); }
};

/// Output of a normalization step. Rows/columns whose norm fell below the
/// guard are left at zero and listed here; the objective then is +infinity
/// in exact arithmetic.
struct Normalized {
  FeatureMatrix values;
  std::vector<Eigen::Index> degenerate_rows;
  std::vector<Eigen::Index> degenerate_cols;

  bool degenerate() const { return !degenerate_rows.empty() || !degenerate_cols.empty(); }
};

Normalized normalize_rows(const FeatureMatrix& a, double guard = 1e-12);
Normalized normalize_cols(const FeatureMatrix& b, double guard = 1e-12);
/// Rows to unit norm, then columns of the result to unit norm.
Normalized normalize(const FeatureMatrix& a, double guard = 1e-12);

/// Literal evaluation of the closed form
///   S^{-1/2} F [ sum_i G_i F^T S^{-1} F G_i ]^{-1/2},  S = sum_i E_i F F^T E_i,
/// with F = W X and E_i, G_i the diagonal selector matrices. Only meant for
/// small instances as a check on normalize(). Throws SingularityError naming
/// the first zero row (in S) or zero column (in the second factor).
FeatureMatrix normalize_explicit(const SFWeights& w, const FeatureMatrix& x);

struct ObjectiveValue {
  double value;     ///< l1 norm of normalize(W X) with degenerate parts zeroed
  bool degenerate;  ///< a row or column of W X fell below the guard

  /// +infinity when degenerate, `value` otherwise.
  double effective() const;
};

/// ||normalize(W X)||_1.
ObjectiveValue objective_exact(const SFWeights& w, const FeatureMatrix& x, double guard = 1e-12);

/// Smoothed objective: every |t| (final entries) becomes sqrt(t^2 + eps) and
/// every norm ||v|| becomes sqrt(||v||^2 + eps), floored at `guard`.
double objective_smoothed(const SFWeights& w, const FeatureMatrix& x, double epsilon = 1e-8,
                          double guard = 1e-12);

/// Gradient of objective_smoothed with respect to W.
Eigen::MatrixXd gradient(const SFWeights& w, const FeatureMatrix& x, double epsilon = 1e-8,
                         double guard = 1e-12);

/// Smoothed objective and its gradient from one shared forward pass.
double objective_and_gradient(const Eigen::MatrixXd& w, const FeatureMatrix& x, double epsilon,
                              double guard, Eigen::MatrixXd& grad);

/// W X. Throws InvalidInput on an inner-dimension mismatch.
FeatureMatrix transform(const SFWeights& w, const FeatureMatrix& x);

enum class OptimizerKind { Lbfgs, Adam };

struct SFConfig {
  Eigen::Index features = 64;
  double epsilon = 1e-8;
  double guard = 1e-12;
  std::size_t max_iterations = 200;
  std::size_t snapshot_every = 20;
  OptimizerKind optimizer = OptimizerKind::Lbfgs;
  optim::LbfgsParams lbfgs{};
  optim::AdamParams adam{};
  std::uint64_t seed = 1;
  /// Store W in every trace record (memory heavy for long runs).
  bool keep_snapshots = false;
  spectral::PowerOptions power{};

  /// Throws InvalidParameter when a field is out of range.
  void validate() const;
};

struct IterateRecord {
  std::size_t iteration;
  double objective_smoothed;
  double objective_exact;
  bool degenerate;
  double roundness;  ///< roundness of W_k X
  std::optional<Eigen::MatrixXd> weights;
};

using IterateTrace = std::vector<IterateRecord>;

/// Early-stopping hook driven synchronously at every snapshot.
class Monitor {
 public:
  virtual ~Monitor() = default;
  /// Returns true to halt training after this snapshot.
  virtual bool observe(const IterateRecord& record, const Eigen::MatrixXd& weights) = 0;
  /// Weights the run should return instead of the last iterate, if any.
  virtual const Eigen::MatrixXd* selected_weights() const { return nullptr; }
  virtual std::optional<std::size_t> selected_iteration() const { return std::nullopt; }
};

struct TrainResult {
  SFWeights weights;       ///< monitor-selected weights, or the last iterate
  IterateTrace trace;
  std::size_t iterations;  ///< optimizer iterations actually run
  std::size_t selected_iteration;
  bool halted_by_monitor;
  bool converged;  ///< optimizer stopped before max_iterations
};

/// Initial weights: seeded standard normals scaled by 1/sqrt(l).
SFWeights initial_weights(Eigen::Index features, Eigen::Index inputs, std::uint64_t seed);

/// Full-batch Sparse Filtering on X (l x p). Snapshots are taken after
/// iterations snapshot_every, 2 * snapshot_every, ... and after the last
/// iteration, so an unmonitored run yields ceil(max_iterations / snapshot_every)
/// records. If the optimizer converges early, the final snapshot is taken at
/// the convergence iteration. Throws DivergenceError on a non-finite objective
/// or gradient.
TrainResult train(const FeatureMatrix& x, const SFConfig& config, Monitor* monitor = nullptr);

/// CSV header `iteration,objective_exact,objective_smoothed,roundness`.
void write_trace_csv(std::ostream& out, const IterateTrace& trace);

}  // namespace orcsf::sf
