#include "orcsf/pipeline/experiment.hpp"

#include <chrono>
#include <ostream>

#include "orcsf/error.hpp"
#include "orcsf/io.hpp"
#include "orcsf/rng.hpp"
#include "orcsf/stats.hpp"

namespace orcsf::pipeline {
namespace {

std::vector<int> as_ints(const std::vector<std::uint8_t>& labels) {
  return {labels.begin(), labels.end()};
}

const char* on_off(bool v) { return v ? "on" : "off"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (features < 1) throw InvalidParameter("experiment: n must be >= 1");
  if (train_images < 10 || test_images < 1) {
    throw InvalidParameter("experiment: need >= 10 training images and >= 1 test image");
  }
  if (patches < 1) throw InvalidParameter("experiment: patch count must be >= 1");
  if (!(alpha >= 0.0)) throw InvalidParameter("experiment: alpha must be >= 0");
  if (!(var_floor >= 0.0)) throw InvalidParameter("experiment: var_floor must be >= 0");
  if (!(eps_zca > 0.0)) throw InvalidParameter("experiment: eps_zca must be > 0");
  if (max_iterations < 1 || snapshot_every < 1) {
    throw InvalidParameter("experiment: max_iterations and snapshot_every must be >= 1");
  }
  orc_policy.validate();
}

PreparedData prepare_data(const Cifar10& data, const ExperimentConfig& config) {
  config.validate();
  PreparedData out;
  out.train = subsample(data.train, config.train_images, derive_seed(config.seed, 1));
  out.test = subsample(data.test, config.test_images, derive_seed(config.seed, 2));
  out.patches =
      extract_random_patches(out.train, config.patches, config.patch_size, derive_seed(config.seed, 3));
  return out;
}

Evaluation evaluate_dictionary(const Eigen::MatrixXd& dictionary, const Preprocessing& prep,
                               const FeatureMatrix& preprocessed_patches, const PreparedData& data,
                               const ExperimentConfig& config) {
  Evaluation out{};
  out.roundness = spectral::roundness(dictionary * preprocessed_patches);

  const Encoder encoder(dictionary, prep, EncoderOptions{config.alpha, config.patch_size, 4});
  const Eigen::MatrixXd train_features = encoder.encode_all(data.train, config.jobs);
  const Eigen::MatrixXd test_features = encoder.encode_all(data.test, config.jobs);
  const std::vector<int> train_labels = as_ints(data.train.labels);
  const std::vector<int> test_labels = as_ints(data.test.labels);

  SvmConfig svm = config.svm;
  svm.seed = derive_seed(config.seed, 6);
  const LinearSvm classifier = train_classifier(train_features, train_labels, svm);
  out.train_accuracy = evaluate(classifier, train_features, train_labels);
  out.test_accuracy = evaluate(classifier, test_features, test_labels);
  return out;
}

ExperimentResult run_experiment(const PreparedData& data, const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  Preprocessing prep;
  prep.contrast = config.normalize;
  prep.var_floor = config.var_floor;
  prep.whiten = config.whiten;
  FeatureMatrix x = data.patches.values;
  if (prep.contrast) contrast_normalize_inplace(x, prep.var_floor);
  if (prep.whiten) {
    prep.whitening = fit_whitening(x, config.eps_zca);
    x = prep.whitening->apply(x);
  }

  ExperimentResult result;
  if (prep.whitening) result.whitening_fingerprint = prep.whitening->fingerprint();

  Evaluation final_eval{};
  std::size_t iterations = 0;
  if (config.source == DictionarySource::RandomPatches) {
    result.dictionary = random_patches_dictionary(x, config.features, derive_seed(config.seed, 4)).atoms;
    final_eval = evaluate_dictionary(result.dictionary, prep, x, data, config);
  } else {
    sf::SFConfig sfc;
    sfc.features = config.features;
    sfc.max_iterations = config.max_iterations;
    sfc.snapshot_every = config.snapshot_every;
    sfc.optimizer = config.optimizer;
    sfc.seed = derive_seed(config.seed, 5);
    sfc.keep_snapshots = true;

    std::optional<orc::OrcMonitor> monitor;
    if (config.orc) monitor.emplace(config.orc_policy);
    sf::TrainResult trained = sf::train(x, sfc, monitor ? &*monitor : nullptr);
    iterations = trained.selected_iteration;
    result.selected_iteration = trained.selected_iteration;
    result.dictionary = trained.weights.matrix;
    result.selection = orc::orc_select(orc::roundness_trace(trained.trace), config.orc_policy);

    std::optional<Evaluation> selected_eval;
    std::vector<double> sampled_roundness;
    std::vector<double> sampled_accuracy;
    for (std::size_t i = 0; i < trained.trace.size(); ++i) {
      const sf::IterateRecord& record = trained.trace[i];
      TraceRow row{record.iteration, record.roundness, std::nullopt, std::nullopt};
      const bool sampled = config.eval_every > 0 && (i + 1) % config.eval_every == 0;
      const bool is_selected = record.iteration == trained.selected_iteration;
      if (sampled || is_selected) {
        Evaluation e = evaluate_dictionary(*record.weights, prep, x, data, config);
        if (sampled) {
          row.train_accuracy = e.train_accuracy;
          row.test_accuracy = e.test_accuracy;
          sampled_roundness.push_back(record.roundness);
          sampled_accuracy.push_back(e.test_accuracy);
        }
        if (is_selected) selected_eval = e;
      }
      result.trace.push_back(row);
    }
    if (sampled_roundness.size() >= 2) {
      result.correlation = stats::pearson(sampled_roundness, sampled_accuracy);
    }
    final_eval = selected_eval ? *selected_eval
                               : evaluate_dictionary(result.dictionary, prep, x, data, config);
    for (auto& record : trained.trace) record.weights.reset();
    result.sf_trace = std::move(trained.trace);
  }

  ReportRow& row = result.row;
  row.features = config.features;
  row.normalize = config.normalize;
  row.whiten = config.whiten;
  row.source = config.source;
  row.orc = config.orc;
  row.roundness = final_eval.roundness;
  row.train_accuracy = final_eval.train_accuracy;
  row.test_accuracy = final_eval.test_accuracy;
  row.iterations = iterations;
  if (config.record_time) {
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

void write_report_header(std::ostream& out) {
  out << "n,normalize,whiten,source,orc,roundness,train_acc,test_acc,iterations,seconds\n";
}

void write_report_row(std::ostream& out, const ReportRow& row) {
  out << row.features << ',' << on_off(row.normalize) << ',' << on_off(row.whiten) << ','
      << to_string(row.source) << ',' << on_off(row.orc) << ',' << io::format_number(row.roundness)
      << ',' << io::format_number(row.train_accuracy) << ','
      << io::format_number(row.test_accuracy) << ',' << row.iterations << ','
      << (row.seconds ? io::format_number(*row.seconds) : std::string()) << '\n';
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iteration,roundness,train_acc,test_acc\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << io::format_number(r.roundness) << ','
        << (r.train_accuracy ? io::format_number(*r.train_accuracy) : std::string()) << ','
        << (r.test_accuracy ? io::format_number(*r.test_accuracy) : std::string()) << '\n';
  }
}

}  // namespace orcsf::pipeline
