#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "orcsf/error.hpp"
#include "orcsf/randmat.hpp"
#include "orcsf/rng.hpp"
#include "orcsf/spectral.hpp"

using namespace orcsf;
using namespace orcsf::spectral;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  return rng.normal_matrix(n, p);
}

Eigen::VectorXd svd_oracle(const Eigen::MatrixXd& f) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(f);
  Eigen::VectorXd ev = Eigen::VectorXd::Zero(f.rows());
  const auto& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) ev(i) = s(i) * s(i);
  return ev;
}

}  // namespace

TEST(GramEigenvalues, Identity) {
  const auto s = gram_eigenvalues(Eigen::MatrixXd::Identity(3, 3));
  ASSERT_EQ(s.eigenvalues.size(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.eigenvalues(i), 1.0, 1e-14);
}

TEST(GramEigenvalues, RankOne) {
  Eigen::Vector3d u(1.0, 2.0, 2.0);
  u /= 3.0;
  Eigen::MatrixXd f(3, 4);
  for (int j = 0; j < 4; ++j) f.col(j) = u;
  const auto s = gram_eigenvalues(f);
  EXPECT_NEAR(s.eigenvalues(0), 4.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues(1), 0.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues(2), 0.0, 1e-12);
}

TEST(GramEigenvalues, MatchesSvdOracle) {
  const auto f = random_matrix(5, 9, 11);
  const auto s = gram_eigenvalues(f);
  const auto oracle = svd_oracle(f);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s.eigenvalues(i), oracle(i), 1e-8);
}

TEST(GramEigenvalues, WideAndTallAgreeWithEigensolver) {
  for (auto [n, p] : {std::pair{6, 3}, std::pair{4, 4}, std::pair{3, 8}}) {
    const auto f = random_matrix(n, p, 5 + n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f * f.transpose());
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    const auto s = gram_eigenvalues(f);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(s.eigenvalues(i), std::max(0.0, ev(i)), 1e-10);
  }
}

TEST(GramEigenvalues, RejectsNonFinite) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Ones(2, 2);
  f(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gram_eigenvalues(f), InvalidInput);
  f(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(roundness(f), InvalidInput);
}

TEST(MeanEigenvalue, UnitColumnsGivePOverN) {
  Eigen::MatrixXd f = random_matrix(4, 8, 3);
  f.colwise().normalize();
  EXPECT_NEAR(mean_eigenvalue(f), 2.0, 1e-12);
}

TEST(MeanEigenvalue, SingleEntry) {
  Eigen::MatrixXd f(1, 1);
  f << -3.5;
  EXPECT_DOUBLE_EQ(mean_eigenvalue(f), 12.25);
}

TEST(MeanEigenvalue, MatchesFullSpectrum) {
  const auto f = random_matrix(7, 13, 17);
  const double full = svd_oracle(f).mean();
  EXPECT_NEAR(mean_eigenvalue(f), full, 1e-10 * full);
}

TEST(TopEigenvalue, Identity) {
  PowerOptions o;
  EXPECT_NEAR(top_eigenvalue(Eigen::MatrixXd::Identity(5, 5), o), 1.0, o.tol);
}

TEST(TopEigenvalue, DiagonalGram) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 3);
  f(0, 0) = 3.0;
  f(1, 1) = 1.0;
  f(2, 2) = 1.0;
  EXPECT_NEAR(top_eigenvalue(f), 9.0, 1e-7);
}

TEST(TopEigenvalue, MatchesFullDecomposition) {
  const auto f = random_matrix(100, 500, 23);
  const double oracle = gram_eigenvalues(f).largest();
  EXPECT_NEAR(top_eigenvalue(f), oracle, 1e-7 * oracle);
}

TEST(TopEigenvalue, TallMatrixUsesSmallerGram) {
  const auto f = random_matrix(60, 12, 29);
  const double oracle = svd_oracle(f)(0);
  EXPECT_NEAR(top_eigenvalue(f), oracle, 1e-7 * oracle);
}

TEST(TopEigenvalue, ConvergenceErrorCarriesEstimate) {
  // Two nearly equal top eigenvalues converge slowly.
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 3);
  f(0, 0) = 1.0;
  f(1, 1) = 0.9999999;
  f(2, 2) = 0.5;
  PowerOptions o;
  o.max_iter = 3;
  o.tol = 1e-15;
  try {
    top_eigenvalue(f, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.last_estimate(), 0.0);
    EXPECT_LE(e.last_estimate(), 1.0 + 1e-12);
    EXPECT_GE(e.residual(), 0.0);
  }
}

TEST(Roundness, IdentityIsOne) {
  for (int n : {1, 2, 5, 30}) EXPECT_NEAR(roundness(Eigen::MatrixXd::Identity(n, n)), 1.0, 1e-8);
}

TEST(Roundness, RankOneIsOneOverN) {
  Eigen::MatrixXd f(3, 4);
  const Eigen::Vector3d u = Eigen::Vector3d(1.0, -1.0, 1.0).normalized();
  for (int j = 0; j < 4; ++j) f.col(j) = u;
  EXPECT_NEAR(roundness(f), 1.0 / 3.0, 1e-8);
}

TEST(Roundness, WideGaussianIsRound) {
  EXPECT_GE(roundness(randmat::sample_gaussian(100, 10000, 31)), 0.6);
}

TEST(Roundness, ZeroMatrixUndefined) {
  EXPECT_THROW(roundness(Eigen::MatrixXd::Zero(3, 4)), UndefinedRoundness);
}

TEST(Roundness, PropertyRangeAndInvariances) {
  Rng pick(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(pick.below(12));
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(pick.below(20));
    const auto f = random_matrix(n, p, 1000 + trial);
    const double r = roundness(f);
    EXPECT_GE(r, 1.0 / static_cast<double>(n) - 1e-9);
    EXPECT_LE(r, 1.0);
    // Scale invariance.
    EXPECT_NEAR(roundness(3.7 * f), r, 1e-7);
    // Left orthogonal invariance.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, n, 5000 + trial));
    const Eigen::MatrixXd q = qr.householderQ();
    EXPECT_NEAR(roundness(q * f), r, 1e-7);
    // Sample order does not matter.
    Eigen::MatrixXd shuffled = f.rowwise().reverse();
    EXPECT_NEAR(roundness(shuffled), r, 1e-7);
    // Agrees with the ratio of the full spectrum.
    const auto s = gram_eigenvalues(f);
    EXPECT_NEAR(r, s.mean() / s.largest(), 1e-7);
  }
}

TEST(CompactGram, PicksSmallerSide) {
  const auto wide = random_matrix(3, 7, 1);
  const auto tall = random_matrix(7, 3, 2);
  EXPECT_EQ(compact_gram(wide).rows(), 3);
  EXPECT_EQ(compact_gram(tall).rows(), 3);
  EXPECT_TRUE(compact_gram(wide).isApprox(wide * wide.transpose(), 1e-12));
  EXPECT_TRUE(compact_gram(tall).isApprox(tall.transpose() * tall, 1e-12));
}

TEST(Roundness, ClusteredSpectrumFallsBackToExactSolver) {
  // Top eigenvalues 1 and 0.999: power iteration needs thousands of steps.
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(3, 3);
  f(0, 0) = 1.0;
  f(1, 1) = std::sqrt(0.999);
  f(2, 2) = 0.5;
  PowerOptions o;
  o.max_iter = 50;
  EXPECT_THROW(top_eigenvalue(f, o), ConvergenceError);
  EXPECT_NEAR(roundness(f, o), (1.0 + 0.999 + 0.25) / 3.0, 1e-12);
}

TEST(Roundness, HugeEntriesDoNotOverflow) {
  const auto f = random_matrix(4, 9, 41);
  EXPECT_NEAR(roundness(f * 1e200), roundness(f), 1e-9);
}
