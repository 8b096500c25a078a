#pragma once

#include <cstdint>
#include <string>

#include "orcsf/spectral.hpp"

namespace orcsf::pipeline {

enum class DictionarySource { RandomPatches, SparseFiltering };

std::string to_string(DictionarySource source);
DictionarySource parse_source(const std::string& text);

/// n x l matrix of atoms stored as rows.
struct Dictionary {
  Eigen::MatrixXd atoms;
  DictionarySource source = DictionarySource::RandomPatches;

  Eigen::Index size() const { return atoms.rows(); }
};

/// n distinct columns of the preprocessed patch matrix (l x p), chosen with
/// `seed`, each scaled to unit Euclidean norm and stacked as rows.
/// All-zero patches stay zero. Throws InvalidParameter when n > p or n < 1.
Dictionary random_patches_dictionary(const FeatureMatrix& patches, Eigen::Index n,
                                     std::uint64_t seed);

}  // namespace orcsf::pipeline
