#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "orcsf/orc.hpp"
#include "orcsf/pipeline/cifar.hpp"
#include "orcsf/pipeline/dictionary.hpp"
#include "orcsf/pipeline/encoder.hpp"
#include "orcsf/pipeline/patches.hpp"
#include "orcsf/pipeline/svm.hpp"
#include "orcsf/sparsefilter.hpp"

namespace orcsf::pipeline {

struct ExperimentConfig {
  Eigen::Index features = 64;
  bool normalize = true;
  bool whiten = true;
  DictionarySource source = DictionarySource::RandomPatches;
  bool orc = false;
  orc::OrcPolicy orc_policy{};

  std::size_t train_images = 2000;
  std::size_t test_images = 1000;
  std::size_t patches = 10000;
  int patch_size = 9;

  double alpha = 0.25;
  double var_floor = 10.0;
  double eps_zca = 0.1;
  SvmConfig svm{};

  std::size_t max_iterations = 200;
  std::size_t snapshot_every = 20;
  /// Accuracies are measured at every eval_every-th snapshot (0: only for the
  /// reported model). Each measurement retrains the classifier.
  std::size_t eval_every = 1;
  sf::OptimizerKind optimizer = sf::OptimizerKind::Lbfgs;

  std::uint64_t seed = 1;
  unsigned jobs = 1;
  /// Fill the wall-clock `seconds` column (breaks byte-for-byte reproducibility).
  bool record_time = false;

  void validate() const;
};

/// Image subsets and raw training patches; depends only on the image counts,
/// patch settings and seed, so a configuration grid can share it.
struct PreparedData {
  ImageDataset train;
  ImageDataset test;
  PatchSet patches;
};

/// Seeds: training subset derive_seed(seed, 1), test subset derive_seed(seed, 2),
/// patch positions derive_seed(seed, 3).
PreparedData prepare_data(const Cifar10& data, const ExperimentConfig& config);

struct ReportRow {
  Eigen::Index features;
  bool normalize;
  bool whiten;
  DictionarySource source;
  bool orc;
  double roundness;
  double train_accuracy;
  double test_accuracy;
  std::size_t iterations;  ///< iterations behind the reported model (the ORC pick when ORC is on)
  std::optional<double> seconds;
};

struct TraceRow {
  std::size_t iteration;
  double roundness;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
};

struct ExperimentResult {
  ReportRow row;
  std::vector<TraceRow> trace;  ///< Sparse Filtering snapshots; empty for Random Patches
  sf::IterateTrace sf_trace;
  /// Pearson correlation of roundness and test accuracy over the snapshots
  /// where accuracy was measured (needs at least two).
  std::optional<double> correlation;
  std::optional<orc::OrcSelection> selection;  ///< ORC pick over the recorded trace
  std::size_t selected_iteration = 0;
  std::string whitening_fingerprint;  ///< empty without whitening
  Eigen::MatrixXd dictionary;
};

struct Evaluation {
  double roundness;
  double train_accuracy;
  double test_accuracy;
};

/// Encodes both image sets with `dictionary`, trains the classifier on the
/// training features and scores both sets. Roundness is that of
/// dictionary * preprocessed_patches.
Evaluation evaluate_dictionary(const Eigen::MatrixXd& dictionary, const Preprocessing& prep,
                               const FeatureMatrix& preprocessed_patches, const PreparedData& data,
                               const ExperimentConfig& config);

/// Runs one configuration end to end. Dictionary seed derive_seed(seed, 4),
/// Sparse Filtering initialization derive_seed(seed, 5), classifier
/// derive_seed(seed, 6).
ExperimentResult run_experiment(const PreparedData& data, const ExperimentConfig& config);

/// Header `n,normalize,whiten,source,orc,roundness,train_acc,test_acc,iterations,seconds`.
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const ReportRow& row);
/// Header `iteration,roundness,train_acc,test_acc`; missing accuracies are empty.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace orcsf::pipeline
