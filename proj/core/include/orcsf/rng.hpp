#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace orcsf {

/// Seeded source of uniform and standard-normal variates.
///
/// The algorithm is fixed so that outputs are reproducible bit for bit:
///  - engine: std::mt19937_64 seeded with the 64-bit seed (its output sequence
///    is pinned by the C++ standard);
///  - uniform(): top 53 bits of one engine draw, scaled by 2^-53, in [0, 1);
///  - normal(): Box-Muller on two uniforms u1, u2 with u1 mapped to (0, 1];
///    both outputs of a pair are used, cosine branch first.
/// std::normal_distribution is deliberately not used because its algorithm
/// is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  /// Uniform integer in [0, bound) by rejection on the raw 64-bit draw.
  std::uint64_t below(std::uint64_t bound);

  /// rows x cols matrix of i.i.d. standard normals, filled column by column.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for sub-stream `stream` of `master`:
/// splitmix64(master ^ splitmix64(stream + 0x9E3779B97F4A7C15)).
/// Trial k of any simulation uses derive_seed(master, k).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace orcsf
