#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "fetch.hpp"
#include "orcsf/error.hpp"
#include "orcsf/io.hpp"
#include "orcsf/orc.hpp"
#include "orcsf/pipeline/experiment.hpp"
#include "orcsf/randmat.hpp"
#include "orcsf/rng.hpp"
#include "orcsf/sparsefilter.hpp"

namespace fs = std::filesystem;

namespace orcsf::cli {
namespace {

/// A usage problem detected after CLI11 parsing succeeded.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_output_dir() {
  if (const char* env = std::getenv("ORCSF_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "orcsf-out";
}

bool parse_on_off(const std::string& text) {
  if (text == "on" || text == "true" || text == "yes" || text == "1") return true;
  if (text == "off" || text == "false" || text == "no" || text == "0") return false;
  throw UsageError("expected on/off, got '" + text + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, const char* flag, Parse parse) {
  std::vector<T> values;
  for (const auto& item : io::split_list(text)) {
    try {
      values.push_back(parse(item));
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "': " + e.what());
    }
  }
  if (values.empty()) throw UsageError(std::string(flag) + ": empty list");
  return values;
}

std::vector<Eigen::Index> parse_counts(const std::string& text, const char* flag) {
  return parse_list<Eigen::Index>(text, flag, [&](const std::string& s) {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 1) throw UsageError(std::string(flag) + ": '" + s + "' is not a positive integer");
    return static_cast<Eigen::Index>(v);
  });
}

std::string file_tag(double value) {
  std::string s = io::format_number(value);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Manifest and config files

std::string option_key(const CLI::Option* opt) {
  std::string name = opt->get_single_name();
  while (!name.empty() && name.front() == '-') name.erase(name.begin());
  return name;
}

bool is_flag(const CLI::Option* opt) { return opt->get_expected_min() == 0; }

bool skip_in_manifest(const std::string& key) {
  return key.empty() || key == "help" || key == "config";
}

io::KeyValues resolved_options(CLI::App* sub) {
  io::KeyValues entries;
  for (CLI::Option* opt : sub->get_options()) {
    const std::string key = option_key(opt);
    if (skip_in_manifest(key)) continue;
    std::string value;
    if (is_flag(opt)) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

void write_manifest(const fs::path& dir, const std::string& command, CLI::App* sub) {
  std::ostringstream text;
  text << "# orcsf " << kVersion << "\n# command: " << command << '\n';
  io::write_key_values(text, resolved_options(sub));
  io::write_text_file(dir / "manifest", text.str());
}

/// Replaces "--config FILE" by the option tokens the file describes.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> out;
  CLI::App* current = &app;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0 && args[i] != "--config") {
      try {
        if (CLI::App* sub = current->get_subcommand(args[i])) current = sub;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    if (args[i] != "--config") {
      out.push_back(args[i]);
      continue;
    }
    if (i + 1 >= args.size()) throw UsageError("--config requires a file");
    const io::KeyValues entries = io::read_key_values(args[++i]);
    for (const auto& [key, value] : entries) {
      CLI::Option* opt = nullptr;
      try {
        opt = current->get_option("--" + key);
      } catch (const CLI::OptionNotFound&) {
        throw UsageError("config " + args[i] + ": unknown key '" + key + "'");
      }
      if (is_flag(opt)) {
        if (parse_on_off(value)) out.push_back("--" + key);
      } else {
        out.push_back("--" + key);
        out.push_back(value);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct ToeplitzArgs {
  std::vector<double> rho;
  std::string n_list = "100,250,500,1000";
  std::string p_grid;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct GordonArgs {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
};

std::string gnuplot_script(const std::vector<double>& rhos, const std::vector<Eigen::Index>& n_list) {
  std::ostringstream s;
  s << "# Roundness against sample count; run: gnuplot roundness_curves.gp\n"
       "set datafile separator ','\n"
       "set logscale x\n"
       "set xlabel 'samples p'\n"
       "set ylabel 'mean roundness'\n"
       "set yrange [0:1]\n"
       "set key bottom right\n"
       "set terminal pngcairo size 1200,500\n"
       "set output 'roundness_curves.png'\n"
       "set multiplot layout 1,"
    << rhos.size() << "\n";
  std::string ns;
  for (auto n : n_list) ns += (ns.empty() ? "" : " ") + std::to_string(n);
  for (double rho : rhos) {
    s << "set title 'rho = " << io::format_number(rho) << "'\n"
      << "plot for [n in '" << ns << "'] 'toeplitz_rho" << file_tag(rho)
      << "_aggregate.csv' every ::1 using ($2 == n ? $3 : 1/0):4 with linespoints title 'n = '.n\n";
  }
  s << "unset multiplot\n";
  return s.str();
}

int cmd_toeplitz(const ToeplitzArgs& a, const fs::path& out_dir, CLI::App* sub, std::ostream& out) {
  if (a.rho.empty()) throw UsageError("simulate toeplitz: at least one --rho is required");
  const auto n_list = parse_counts(a.n_list, "--n-list");
  const auto p_grid = a.p_grid.empty() ? randmat::default_p_grid() : parse_counts(a.p_grid, "--p-grid");
  if (a.trials < 1) throw UsageError("--trials must be >= 1");

  write_manifest(out_dir, "simulate toeplitz", sub);
  randmat::CurveOptions options;
  options.jobs = std::max(1u, a.jobs);
  for (double rho : a.rho) {
    const auto report = randmat::roundness_curve(rho, n_list, p_grid, a.trials, a.seed, options);
    std::ostringstream trials, aggregate;
    randmat::write_trials_csv(trials, report);
    randmat::write_aggregate_csv(aggregate, report);
    const std::string stem = "toeplitz_rho" + file_tag(rho);
    io::write_text_file(out_dir / (stem + "_trials.csv"), trials.str());
    io::write_text_file(out_dir / (stem + "_aggregate.csv"), aggregate.str());
    out << "wrote " << (out_dir / (stem + "_aggregate.csv")).string() << '\n';
  }
  io::write_text_file(out_dir / "roundness_curves.gp", gnuplot_script(a.rho, n_list));
  return kSuccess;
}

int cmd_gordon(const GordonArgs& a, const fs::path& out_dir, CLI::App* sub, std::ostream& out,
               std::ostream& err) {
  if (a.n < 1 || a.p <= a.n) throw UsageError("simulate gordon: requires p > n >= 1");
  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  write_manifest(out_dir, "simulate gordon", sub);
  const auto report = randmat::gordon_check(a.n, a.p, a.trials, a.seed);
  std::ostringstream csv;
  randmat::write_gordon_csv(csv, report);
  io::write_text_file(out_dir / "gordon.csv", csv.str());

  const auto& row = report.gordon.front();
  out << "E[sqrt(sigma_n/p)] = " << io::format_number(row.mean_sqrt_smallest) << " (lower bound "
      << io::format_number(row.lower_bound) << ")\n"
      << "E[sqrt(sigma_1/p)] = " << io::format_number(row.mean_sqrt_largest) << " (upper bound "
      << io::format_number(row.upper_bound) << ")\n";
  if (!row.holds()) {
    err << "gordon check failed: estimates violate the bounds by more than 3 standard errors\n";
    return kFailure;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sf-train

struct SfTrainArgs {
  std::string cifar;
  std::string patches;
  Eigen::Index n = 64;
  std::size_t max_iter = 200;
  std::size_t snapshot_every = 20;
  bool orc = false;
  std::size_t orc_patience = 1;
  double orc_min_delta = 0.0;
  std::string optimizer = "lbfgs";
  std::size_t patch_count = 10000;
  std::size_t train_images = 2000;
  std::string normalize = "on";
  std::string whiten = "on";
  double var_floor = 10.0;
  double eps_zca = 0.1;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
};

sf::OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "lbfgs") return sf::OptimizerKind::Lbfgs;
  if (text == "adam") return sf::OptimizerKind::Adam;
  throw UsageError("--optimizer must be lbfgs or adam");
}

int cmd_sf_train(const SfTrainArgs& a, const fs::path& out_dir, CLI::App* sub, std::ostream& out,
                 std::ostream& err) {
  if (a.cifar.empty() == a.patches.empty()) {
    throw UsageError("sf-train: give exactly one of --cifar or --patches");
  }
  const bool normalize = parse_on_off(a.normalize);
  const bool whiten = parse_on_off(a.whiten);
  const sf::OptimizerKind optimizer = parse_optimizer(a.optimizer);
  orc::OrcPolicy policy{a.orc_patience, a.orc_min_delta};
  policy.validate();

  write_manifest(out_dir, "sf-train", sub);

  FeatureMatrix x;
  if (!a.cifar.empty()) {
    const fs::path dir = pipeline::find_cifar10(a.cifar);
    if (dir.empty()) throw Error("no CIFAR-10 batch files under " + a.cifar);
    const pipeline::Cifar10 data = pipeline::load_cifar10(dir);
    const auto images = pipeline::subsample(data.train, a.train_images, derive_seed(a.seed, 1));
    x = pipeline::extract_random_patches(images, a.patch_count, 9, derive_seed(a.seed, 3)).values;
  } else {
    const fs::path file = a.patches;
    x = file.extension() == ".csv" ? io::load_samples_csv(file) : io::load_matrix(file);
  }
  if (normalize) pipeline::contrast_normalize_inplace(x, a.var_floor);
  if (whiten) x = pipeline::fit_whitening(x, a.eps_zca).apply(x);

  sf::SFConfig config;
  config.features = a.n;
  config.max_iterations = a.max_iter;
  config.snapshot_every = a.snapshot_every;
  config.optimizer = optimizer;
  config.epsilon = a.epsilon;
  config.seed = derive_seed(a.seed, 5);

  std::optional<orc::OrcMonitor> monitor;
  if (a.orc) monitor.emplace(policy);
  sf::TrainResult result;
  try {
    result = sf::train(x, config, monitor ? &*monitor : nullptr);
  } catch (const DivergenceError& e) {
    io::save_matrix(out_dir / "last_finite_weights.bin", e.last_finite_iterate());
    err << "training diverged: " << e.what() << "\nlast finite iterate (iteration "
        << e.iteration() << ") saved to " << (out_dir / "last_finite_weights.bin").string() << '\n';
    return kFailure;
  }

  std::ostringstream trace;
  sf::write_trace_csv(trace, result.trace);
  io::write_text_file(out_dir / "trace.csv", trace.str());
  io::save_matrix(out_dir / "weights.bin", result.weights.matrix);

  std::ostringstream summary;
  io::write_key_values(summary, {{"iterations", std::to_string(result.iterations)},
                                 {"selected_iteration", std::to_string(result.selected_iteration)},
                                 {"halted_by_orc", result.halted_by_monitor ? "true" : "false"},
                                 {"converged", result.converged ? "true" : "false"}});
  io::write_text_file(out_dir / "summary.txt", summary.str());
  out << "trained " << result.iterations << " iterations; weights from iteration "
      << result.selected_iteration << " written to " << (out_dir / "weights.bin").string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineArgs {
  std::string cifar;
  std::string n = "64";
  std::string normalize = "on";
  std::string whiten = "on";
  std::string source = "random_patches";
  std::string orc = "off";
  std::size_t orc_patience = 1;
  double orc_min_delta = 0.0;
  std::size_t subsample_train = 2000;
  std::size_t subsample_test = 1000;
  std::size_t patches = 10000;
  double alpha = 0.25;
  double var_floor = 10.0;
  double eps_zca = 0.1;
  double lambda = 1e-4;
  std::size_t epochs = 20;
  std::size_t max_iter = 200;
  std::size_t snapshot_every = 20;
  std::size_t eval_every = 1;
  std::string optimizer = "lbfgs";
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  bool full_scale = false;
  bool timing = false;
};

std::string cell_tag(const pipeline::ExperimentConfig& c) {
  auto oo = [](bool v) { return v ? "on" : "off"; };
  return "n" + std::to_string(c.features) + "_norm" + oo(c.normalize) + "_white" + oo(c.whiten) +
         "_" + pipeline::to_string(c.source) + "_orc" + oo(c.orc);
}

int cmd_pipeline(const PipelineArgs& a, const fs::path& out_dir, CLI::App* sub, std::ostream& out,
                 std::ostream& err) {
  const auto ns = parse_counts(a.n, "--n");
  const auto normalizes = parse_list<bool>(a.normalize, "--normalize", parse_on_off);
  const auto whitens = parse_list<bool>(a.whiten, "--whiten", parse_on_off);
  const auto sources = parse_list<pipeline::DictionarySource>(a.source, "--source", [](const std::string& s) {
    try {
      return pipeline::parse_source(s);
    } catch (const InvalidParameter& e) {
      throw UsageError(e.what());
    }
  });
  const auto orcs = parse_list<bool>(a.orc, "--orc", parse_on_off);
  const sf::OptimizerKind optimizer = parse_optimizer(a.optimizer);

  pipeline::ExperimentConfig base;
  base.orc_policy = {a.orc_patience, a.orc_min_delta};
  base.train_images = a.subsample_train;
  base.test_images = a.subsample_test;
  if (a.full_scale) {
    base.train_images = 50000;
    base.test_images = 10000;
    err << "warning: --full-scale runs on all 60000 images and can take many hours\n";
  }
  base.patches = a.patches;
  base.alpha = a.alpha;
  base.var_floor = a.var_floor;
  base.eps_zca = a.eps_zca;
  base.svm.lambda = a.lambda;
  base.svm.epochs = a.epochs;
  base.max_iterations = a.max_iter;
  base.snapshot_every = a.snapshot_every;
  base.eval_every = a.eval_every;
  base.optimizer = optimizer;
  base.seed = a.seed;
  base.record_time = a.timing;

  std::vector<pipeline::ExperimentConfig> cells;
  for (auto n : ns) {
    for (bool norm : normalizes) {
      for (bool white : whitens) {
        for (auto source : sources) {
          for (bool orc : orcs) {
            pipeline::ExperimentConfig c = base;
            c.features = n;
            c.normalize = norm;
            c.whiten = white;
            c.source = source;
            c.orc = orc;
            try {
              c.validate();
            } catch (const InvalidParameter& e) {
              throw UsageError(e.what());
            }
            cells.push_back(c);
          }
        }
      }
    }
  }
  if (cells.empty()) throw UsageError("pipeline: empty configuration grid");

  const fs::path dir = pipeline::find_cifar10(a.cifar);
  if (dir.empty()) {
    err << "pipeline: CIFAR-10 batches not found (looked at --cifar, $ORCSF_CIFAR10_DIR, "
           "data/cifar-10-batches-bin); run 'orcsf fetch-cifar10' first\n";
    return kFailure;
  }
  write_manifest(out_dir, "pipeline", sub);
  const pipeline::Cifar10 data = pipeline::load_cifar10(dir);
  const pipeline::PreparedData prepared = pipeline::prepare_data(data, base);

  std::vector<std::optional<pipeline::ExperimentResult>> results(cells.size());
  std::vector<std::string> failures(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = pipeline::run_experiment(prepared, cells[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> threads;
  for (unsigned j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::ostringstream report;
  pipeline::write_report_header(report);
  bool any_failed = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string tag = cell_tag(cells[i]);
    if (!results[i]) {
      any_failed = true;
      const auto& c = cells[i];
      report << c.features << ',' << (c.normalize ? "on" : "off") << ',' << (c.whiten ? "on" : "off")
             << ',' << pipeline::to_string(c.source) << ',' << (c.orc ? "on" : "off")
             << ",failed,,,,\n";
      err << "cell " << tag << " failed: " << failures[i] << '\n';
      continue;
    }
    const auto& r = *results[i];
    pipeline::write_report_row(report, r.row);
    io::KeyValues summary{{"whitening_fingerprint", r.whitening_fingerprint.empty() ? "none" : r.whitening_fingerprint},
                          {"selected_iteration", std::to_string(r.selected_iteration)},
                          {"correlation", r.correlation ? io::format_number(*r.correlation) : ""}};
    std::ostringstream s;
    io::write_key_values(s, summary);
    io::write_text_file(out_dir / ("run_" + tag + ".txt"), s.str());
    if (!r.trace.empty()) {
      std::ostringstream trace;
      pipeline::write_trace_csv(trace, r.trace);
      io::write_text_file(out_dir / ("trace_" + tag + ".csv"), trace.str());
    }
  }
  io::write_text_file(out_dir / "report.csv", report.str());
  out << "wrote " << (out_dir / "report.csv").string() << " (" << cells.size() << " rows)\n";
  return any_failed ? kFailure : kSuccess;
}

// ---------------------------------------------------------------------------
// fetch-cifar10

struct FetchArgs {
  std::string dest = "data";
  std::string url = kCifarUrl;
  std::string expect_sha256;
};

int cmd_fetch(const FetchArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dest = a.dest;
  const fs::path archive = dest / "cifar-10-binary.tar.gz";
  download(a.url, archive);
  const Digests d = file_digests(archive);
  out << "sha256 " << d.sha256 << "\nmd5    " << d.md5 << '\n';
  const bool ok = a.expect_sha256.empty() ? d.md5 == kCifarMd5 : d.sha256 == a.expect_sha256;
  if (!ok) {
    err << "checksum mismatch for " << archive.string() << '\n';
    return kFailure;
  }
  const std::size_t files = extract_tar_gz(archive, dest);
  out << "extracted " << files << " files under " << (dest / "cifar-10-batches-bin").string() << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"orcsf: spectral roundness, Sparse Filtering with ORC early stopping, and an "
               "image-classification pipeline"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string out_dir = default_output_dir();
  std::string config_unused;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (default $ORCSF_OUTPUT_DIR or ./orcsf-out)");
    sub->add_option("--config", config_unused, "key=value file whose keys mirror the flags");
  };

  // simulate
  CLI::App* simulate = app.add_subcommand("simulate", "Random-matrix simulations");
  simulate->require_subcommand(1);
  ToeplitzArgs toeplitz;
  CLI::App* toeplitz_cmd = simulate->add_subcommand("toeplitz", "Roundness curves of Toeplitz-correlated Gaussian matrices");
  toeplitz_cmd->add_option("--rho", toeplitz.rho, "Correlation parameter(s) in [0, 1)")
      ->required()
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  toeplitz_cmd->add_option("--n-list", toeplitz.n_list, "Feature counts, comma separated");
  toeplitz_cmd->add_option("--p-grid", toeplitz.p_grid, "Sample counts (default: 12 log-spaced in [10, 10^4])");
  toeplitz_cmd->add_option("--trials", toeplitz.trials, "Trials per (n, p) cell");
  toeplitz_cmd->add_option("--seed", toeplitz.seed, "Master seed");
  toeplitz_cmd->add_option("--jobs", toeplitz.jobs, "Worker threads");
  add_common(toeplitz_cmd);

  GordonArgs gordon;
  CLI::App* gordon_cmd = simulate->add_subcommand("gordon", "Monte Carlo check of the Gaussian singular value bounds");
  gordon_cmd->add_option("--n", gordon.n, "Rows")->required();
  gordon_cmd->add_option("--p", gordon.p, "Columns (p > n)")->required();
  gordon_cmd->add_option("--trials", gordon.trials, "Trials");
  gordon_cmd->add_option("--seed", gordon.seed, "Master seed");
  add_common(gordon_cmd);

  // sf-train
  SfTrainArgs sft;
  CLI::App* sf_cmd = app.add_subcommand("sf-train", "Train Sparse Filtering, optionally with ORC early stopping");
  sf_cmd->add_option("--cifar", sft.cifar, "CIFAR-10 batch directory");
  sf_cmd->add_option("--patches", sft.patches, "Patch file: CSV (one sample per line) or binary matrix (l x p)");
  sf_cmd->add_option("--n", sft.n, "Learned features");
  sf_cmd->add_option("--max-iter", sft.max_iter, "Optimizer iterations");
  sf_cmd->add_option("--snapshot-every", sft.snapshot_every, "Snapshot cadence in iterations");
  sf_cmd->add_flag("--orc", sft.orc, "Stop early by the Optimal Roundness Criterion");
  sf_cmd->add_option("--orc-patience", sft.orc_patience, "Snapshots without a new record before stopping");
  sf_cmd->add_option("--orc-min-delta", sft.orc_min_delta, "Margin a new roundness record must exceed");
  sf_cmd->add_option("--optimizer", sft.optimizer, "lbfgs or adam");
  sf_cmd->add_option("--patch-count", sft.patch_count, "Random patches drawn from CIFAR-10");
  sf_cmd->add_option("--train-images", sft.train_images, "Training images patches are drawn from");
  sf_cmd->add_option("--normalize", sft.normalize, "Contrast normalization on/off");
  sf_cmd->add_option("--whiten", sft.whiten, "ZCA whitening on/off");
  sf_cmd->add_option("--var-floor", sft.var_floor, "Contrast normalization variance floor");
  sf_cmd->add_option("--eps-zca", sft.eps_zca, "Whitening eigenvalue regularizer");
  sf_cmd->add_option("--epsilon", sft.epsilon, "Soft-absolute smoothing constant");
  sf_cmd->add_option("--seed", sft.seed, "Master seed");
  add_common(sf_cmd);

  // pipeline
  PipelineArgs pl;
  CLI::App* pl_cmd = app.add_subcommand("pipeline", "Run a grid of image-classification experiments");
  pl_cmd->add_option("--cifar", pl.cifar, "CIFAR-10 batch directory");
  pl_cmd->add_option("--n", pl.n, "Dictionary sizes, comma separated");
  pl_cmd->add_option("--normalize", pl.normalize, "Contrast normalization: on, off or on,off");
  pl_cmd->add_option("--whiten", pl.whiten, "ZCA whitening: on, off or on,off");
  pl_cmd->add_option("--source", pl.source, "random_patches and/or sparse_filtering");
  pl_cmd->add_option("--orc", pl.orc, "ORC early stopping: on, off or on,off");
  pl_cmd->add_option("--orc-patience", pl.orc_patience, "Snapshots without a new record before stopping");
  pl_cmd->add_option("--orc-min-delta", pl.orc_min_delta, "Margin a new roundness record must exceed");
  pl_cmd->add_option("--subsample-train", pl.subsample_train, "Training images used");
  pl_cmd->add_option("--subsample-test", pl.subsample_test, "Test images used");
  pl_cmd->add_option("--patches", pl.patches, "Random patches for dictionary learning");
  pl_cmd->add_option("--alpha", pl.alpha, "Soft threshold");
  pl_cmd->add_option("--var-floor", pl.var_floor, "Contrast normalization variance floor");
  pl_cmd->add_option("--eps-zca", pl.eps_zca, "Whitening eigenvalue regularizer");
  pl_cmd->add_option("--lambda", pl.lambda, "SVM L2 penalty");
  pl_cmd->add_option("--epochs", pl.epochs, "SVM epochs");
  pl_cmd->add_option("--max-iter", pl.max_iter, "Sparse Filtering iterations");
  pl_cmd->add_option("--snapshot-every", pl.snapshot_every, "Snapshot cadence in iterations");
  pl_cmd->add_option("--eval-every", pl.eval_every, "Measure accuracies at every k-th snapshot (0: reported model only)");
  pl_cmd->add_option("--optimizer", pl.optimizer, "lbfgs or adam");
  pl_cmd->add_option("--seed", pl.seed, "Master seed");
  pl_cmd->add_option("--jobs", pl.jobs, "Grid cells run in parallel");
  pl_cmd->add_flag("--full-scale", pl.full_scale, "Use all 50000/10000 images");
  pl_cmd->add_flag("--timing", pl.timing, "Fill the wall-clock seconds column");
  add_common(pl_cmd);

  // fetch-cifar10
  FetchArgs fetch;
  CLI::App* fetch_cmd = app.add_subcommand("fetch-cifar10", "Download and verify the CIFAR-10 binary archive");
  fetch_cmd->add_option("--dest", fetch.dest, "Destination directory");
  fetch_cmd->add_option("--url", fetch.url, "Archive URL");
  fetch_cmd->add_option("--expect-sha256", fetch.expect_sha256, "Pin the archive SHA-256 instead of the published MD5");

  std::vector<std::string> tokens;
  try {
    tokens = expand_config(app, args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    CLI::App* culprit = &app;
    for (CLI::App* sub : app.get_subcommands()) {
      culprit = sub;
      for (CLI::App* inner : sub->get_subcommands()) culprit = inner;
    }
    err << culprit->help();
    return kUsage;
  }

  try {
    if (*toeplitz_cmd) return cmd_toeplitz(toeplitz, out_dir, toeplitz_cmd, out);
    if (*gordon_cmd) return cmd_gordon(gordon, out_dir, gordon_cmd, out, err);
    if (*sf_cmd) return cmd_sf_train(sft, out_dir, sf_cmd, out, err);
    if (*pl_cmd) return cmd_pipeline(pl, out_dir, pl_cmd, out, err);
    if (*fetch_cmd) return cmd_fetch(fetch, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace orcsf::cli
