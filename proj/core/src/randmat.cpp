#include "orcsf/randmat.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "orcsf/error.hpp"
#include "orcsf/io.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::randmat {
namespace {

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw InvalidParameter("rho must lie in [0, 1), got " + io::format_number(rho));
  }
}

Eigen::MatrixXd lower_cholesky(double rho, Eigen::Index n) {
  Eigen::LLT<Eigen::MatrixXd> llt(toeplitz_matrix(rho, n));
  // T_rho is positive definite on [0, 1); failure means a broken invariant.
  if (llt.info() != Eigen::Success) {
    throw Error("internal: Cholesky factorization of T_rho failed for rho = " +
                io::format_number(rho));
  }
  return llt.matrixL();
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation (n - 1 denominator)
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads.
template <typename Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  for (unsigned w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Eigen::MatrixXd toeplitz_matrix(double rho, Eigen::Index n) {
  check_rho(rho);
  if (n < 1) throw InvalidParameter("toeplitz_matrix: n must be >= 1");
  // powers(k) = rho^k with 0^0 = 1 and 0^k = 0 otherwise.
  Eigen::VectorXd powers(n);
  powers(0) = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) powers(k) = powers(k - 1) * rho;
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) t(i, j) = powers(std::abs(i - j));
  }
  return t;
}

FeatureMatrix sample_gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidParameter("sample_gaussian: n and p must be >= 1");
  Rng rng(seed);
  return rng.normal_matrix(n, p);
}

FeatureMatrix sample_correlated(const Eigen::MatrixXd& lower_factor, Eigen::Index p,
                                std::uint64_t seed) {
  FeatureMatrix z = sample_gaussian(lower_factor.rows(), p, seed);
  return lower_factor.triangularView<Eigen::Lower>() * z;
}

FeatureMatrix sample_toeplitz(double rho, Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  check_rho(rho);
  if (n < 1 || p < 1) throw InvalidParameter("sample_toeplitz: n and p must be >= 1");
  // T_0 = I has L = I; skip the product so the result matches sample_gaussian bit for bit.
  if (rho == 0.0) return sample_gaussian(n, p, seed);
  return sample_correlated(lower_cholesky(rho, n), p, seed);
}

SimulationReport gordon_check(Eigen::Index n, Eigen::Index p, std::size_t trials,
                              std::uint64_t seed) {
  if (n < 1 || p <= n) throw InvalidParameter("gordon_check: requires p > n >= 1");
  if (trials < 1) throw InvalidParameter("gordon_check: trials must be >= 1");

  std::vector<double> smallest(trials);
  std::vector<double> largest(trials);
  const double pd = static_cast<double>(p);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto spectrum = spectral::gram_eigenvalues(sample_gaussian(n, p, derive_seed(seed, k)));
    smallest[k] = std::sqrt(spectrum.smallest() / pd);
    largest[k] = std::sqrt(spectrum.largest() / pd);
  }
  const Moments lo = moments(smallest);
  const Moments hi = moments(largest);
  const double root_trials = std::sqrt(static_cast<double>(trials));
  const double width = std::sqrt(static_cast<double>(n) / pd);

  GordonRow row{};
  row.n = n;
  row.p = p;
  row.trials = trials;
  row.mean_sqrt_smallest = lo.mean;
  row.se_sqrt_smallest = lo.std / root_trials;
  row.mean_sqrt_largest = hi.mean;
  row.se_sqrt_largest = hi.std / root_trials;
  row.lower_bound = 1.0 - width;
  row.upper_bound = 1.0 + width;
  row.lower_holds = row.mean_sqrt_smallest >= row.lower_bound - 3.0 * row.se_sqrt_smallest;
  row.upper_holds = row.mean_sqrt_largest <= row.upper_bound + 3.0 * row.se_sqrt_largest;

  SimulationReport report;
  report.gordon.push_back(row);
  return report;
}

SimulationReport roundness_curve(double rho, const std::vector<Eigen::Index>& n_list,
                                 const std::vector<Eigen::Index>& p_grid, std::size_t trials,
                                 std::uint64_t seed, const CurveOptions& options) {
  check_rho(rho);
  if (n_list.empty() || p_grid.empty()) {
    throw InvalidParameter("roundness_curve: n_list and p_grid must be non-empty");
  }
  if (trials < 1) throw InvalidParameter("roundness_curve: trials must be >= 1");
  for (auto n : n_list) {
    if (n < 1) throw InvalidParameter("roundness_curve: every n must be >= 1");
  }
  for (auto p : p_grid) {
    if (p < 1) throw InvalidParameter("roundness_curve: every p must be >= 1");
  }

  std::map<Eigen::Index, Eigen::MatrixXd> factors;
  if (rho != 0.0) {
    for (auto n : n_list) {
      if (!factors.contains(n)) factors.emplace(n, lower_cholesky(rho, n));
    }
  }

  const std::size_t cells = n_list.size() * p_grid.size();
  SimulationReport report;
  report.trials.resize(cells * trials);
  parallel_for(cells * trials, options.jobs, [&](std::size_t task) {
    const std::size_t cell = task / trials;
    const std::size_t k = task % trials;
    const Eigen::Index n = n_list[cell / p_grid.size()];
    const Eigen::Index p = p_grid[cell % p_grid.size()];
    const std::uint64_t trial_seed = derive_seed(seed, k);
    const FeatureMatrix f = rho == 0.0 ? sample_gaussian(n, p, trial_seed)
                                       : sample_correlated(factors.at(n), p, trial_seed);
    report.trials[task] = TrialRow{rho, n, p, k, spectral::roundness(f, options.power)};
  });

  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::vector<double> values(trials);
    for (std::size_t k = 0; k < trials; ++k) values[k] = report.trials[cell * trials + k].roundness;
    const Moments m = moments(values);
    const auto& first = report.trials[cell * trials];
    report.aggregates.push_back(AggregateRow{rho, first.n, first.p, m.mean, m.std, trials});
  }
  return report;
}

std::vector<Eigen::Index> log_grid(Eigen::Index lo, Eigen::Index hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 1) throw InvalidParameter("log_grid: need 1 <= lo <= hi");
  std::vector<Eigen::Index> grid;
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const auto value = static_cast<Eigen::Index>(std::llround(std::pow(10.0, a + t * (b - a))));
    if (grid.empty() || grid.back() != value) grid.push_back(value);
  }
  return grid;
}

std::vector<Eigen::Index> default_p_grid() { return log_grid(10, 10000, 12); }

void write_trials_csv(std::ostream& out, const SimulationReport& report) {
  out << "rho,n,p,trial,roundness\n";
  for (const auto& r : report.trials) {
    out << io::format_number(r.rho) << ',' << r.n << ',' << r.p << ',' << r.trial << ','
        << io::format_number(r.roundness) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const SimulationReport& report) {
  out << "rho,n,p,mean_roundness,std_roundness,trials\n";
  for (const auto& r : report.aggregates) {
    out << io::format_number(r.rho) << ',' << r.n << ',' << r.p << ','
        << io::format_number(r.mean_roundness) << ',' << io::format_number(r.std_roundness) << ','
        << r.trials << '\n';
  }
}

void write_gordon_csv(std::ostream& out, const SimulationReport& report) {
  out << "n,p,trials,mean_sqrt_smallest,se_sqrt_smallest,mean_sqrt_largest,se_sqrt_largest,"
         "lower_bound,upper_bound,holds\n";
  for (const auto& r : report.gordon) {
    out << r.n << ',' << r.p << ',' << r.trials << ',' << io::format_number(r.mean_sqrt_smallest)
        << ',' << io::format_number(r.se_sqrt_smallest) << ','
        << io::format_number(r.mean_sqrt_largest) << ',' << io::format_number(r.se_sqrt_largest)
        << ',' << io::format_number(r.lower_bound) << ',' << io::format_number(r.upper_bound)
        << ',' << (r.holds() ? 1 : 0) << '\n';
  }
}

}  // namespace orcsf::randmat
