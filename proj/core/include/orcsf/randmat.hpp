#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "orcsf/spectral.hpp"

namespace orcsf::randmat {

/// Toeplitz covariance with entries rho^|i-j| (0^0 = 1).
Eigen::MatrixXd toeplitz_matrix(double rho, Eigen::Index n);

/// n x p matrix of i.i.d. standard normals, deterministic in `seed`.
FeatureMatrix sample_gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

/// n x p matrix with i.i.d. N(0, T_rho) columns, realized as L Z where L is the
/// Cholesky factor of T_rho and Z = sample_gaussian(n, p, seed).
FeatureMatrix sample_toeplitz(double rho, Eigen::Index n, Eigen::Index p, std::uint64_t seed);

/// Same as above with a precomputed lower Cholesky factor of T_rho.
FeatureMatrix sample_correlated(const Eigen::MatrixXd& lower_factor, Eigen::Index p,
                                std::uint64_t seed);

struct TrialRow {
  double rho;
  Eigen::Index n;
  Eigen::Index p;
  std::size_t trial;
  double roundness;
};

struct AggregateRow {
  double rho;
  Eigen::Index n;
  Eigen::Index p;
  double mean_roundness;
  double std_roundness;
  std::size_t trials;
};

struct GordonRow {
  Eigen::Index n;
  Eigen::Index p;
  std::size_t trials;
  double mean_sqrt_smallest;  ///< mean of sqrt(sigma_n / p)
  double se_sqrt_smallest;    ///< standard error of that mean
  double mean_sqrt_largest;   ///< mean of sqrt(sigma_1 / p)
  double se_sqrt_largest;
  double lower_bound;  ///< 1 - sqrt(n / p)
  double upper_bound;  ///< 1 + sqrt(n / p)
  bool lower_holds;    ///< mean_sqrt_smallest >= lower_bound - 3 se
  bool upper_holds;    ///< mean_sqrt_largest <= upper_bound + 3 se

  bool holds() const { return lower_holds && upper_holds; }
};

struct SimulationReport {
  std::vector<TrialRow> trials;
  std::vector<AggregateRow> aggregates;
  std::vector<GordonRow> gordon;
};

/// Monte Carlo check of the Gaussian extreme singular value bounds.
/// Trial k draws sample_gaussian(n, p, derive_seed(seed, k)).
SimulationReport gordon_check(Eigen::Index n, Eigen::Index p, std::size_t trials,
                              std::uint64_t seed);

struct CurveOptions {
  /// Worker threads for independent trials; results do not depend on it.
  unsigned jobs = 1;
  spectral::PowerOptions power{};
};

/// Mean roundness of T_rho-correlated matrices over an (n, p) grid.
///
/// Trial k of every cell uses the seed derive_seed(seed, k), so trial k is
/// reproducible in isolation and the cells of one trial share their noise.
/// Rows are ordered by (n, p, trial) regardless of execution order.
SimulationReport roundness_curve(double rho, const std::vector<Eigen::Index>& n_list,
                                 const std::vector<Eigen::Index>& p_grid, std::size_t trials,
                                 std::uint64_t seed, const CurveOptions& options = {});

/// `count` logarithmically spaced integers in [lo, hi], rounded to nearest and
/// deduplicated.
std::vector<Eigen::Index> log_grid(Eigen::Index lo, Eigen::Index hi, std::size_t count);

/// Default grid: 12 log-spaced points in [10, 10^4].
std::vector<Eigen::Index> default_p_grid();

void write_trials_csv(std::ostream& out, const SimulationReport& report);
void write_aggregate_csv(std::ostream& out, const SimulationReport& report);
void write_gordon_csv(std::ostream& out, const SimulationReport& report);

}  // namespace orcsf::randmat
