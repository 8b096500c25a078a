#pragma once

#include <span>

namespace orcsf::stats {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);
/// Pearson correlation; NaN when either input is constant or sizes differ.
double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace orcsf::stats
