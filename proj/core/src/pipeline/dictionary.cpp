#include "orcsf/pipeline/dictionary.hpp"

#include <numeric>
#include <vector>

#include "orcsf/error.hpp"
#include "orcsf/rng.hpp"

namespace orcsf::pipeline {

std::string to_string(DictionarySource source) {
  return source == DictionarySource::RandomPatches ? "random_patches" : "sparse_filtering";
}

DictionarySource parse_source(const std::string& text) {
  if (text == "random_patches") return DictionarySource::RandomPatches;
  if (text == "sparse_filtering") return DictionarySource::SparseFiltering;
  throw InvalidParameter("unknown dictionary source '" + text +
                         "' (expected random_patches or sparse_filtering)");
}

Dictionary random_patches_dictionary(const FeatureMatrix& patches, Eigen::Index n,
                                     std::uint64_t seed) {
  if (n < 1 || n > patches.cols()) {
    throw InvalidParameter("random_patches_dictionary: need 1 <= n <= p (n = " +
                           std::to_string(n) + ", p = " + std::to_string(patches.cols()) + ")");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(patches.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  Dictionary dict;
  dict.source = DictionarySource::RandomPatches;
  dict.atoms.resize(n, patches.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto remaining = static_cast<std::uint64_t>(order.size()) - static_cast<std::uint64_t>(i);
    const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.below(remaining));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    const auto column = patches.col(order[static_cast<std::size_t>(i)]);
    const double norm = column.norm();
    dict.atoms.row(i) = column.transpose() / (norm > 0.0 ? norm : 1.0);
  }
  return dict;
}

}  // namespace orcsf::pipeline
