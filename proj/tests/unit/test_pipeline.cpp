#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "orcsf/error.hpp"
#include "orcsf/pipeline/cifar.hpp"
#include "orcsf/pipeline/dictionary.hpp"
#include "orcsf/pipeline/encoder.hpp"
#include "orcsf/pipeline/experiment.hpp"
#include "orcsf/pipeline/patches.hpp"
#include "orcsf/pipeline/preprocess.hpp"
#include "orcsf/pipeline/svm.hpp"
#include "orcsf/randmat.hpp"
#include "orcsf/rng.hpp"
#include "../support/synthetic.hpp"

using namespace orcsf;
using namespace orcsf::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("orcsf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::uint8_t> gradient_image() {
  std::vector<std::uint8_t> img(kImageBytes);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) img[c * 1024 + y * 32 + x] = static_cast<std::uint8_t>(c * 80 + y * 2 + x);
  return img;
}

}  // namespace

// --- CIFAR loader --------------------------------------------------------

TEST(Cifar, TwoRecordRoundTrip) {
  const fs::path dir = temp_dir("two_records");
  ImageDataset ds;
  const auto img = gradient_image();
  ds.append(img, 3);
  ds.append(img, 7);
  write_cifar_batch(dir / "b.bin", ds);
  EXPECT_EQ(fs::file_size(dir / "b.bin"), 2 * kRecordBytes);
  const auto back = load_cifar_batch(dir / "b.bin", Split::Train);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.labels[0], 3);
  EXPECT_EQ(back.labels[1], 7);
  EXPECT_EQ(back.pixels, ds.pixels);
}

TEST(Cifar, TruncatedRecordOffset) {
  const fs::path dir = temp_dir("truncated");
  write_cifar_batch(dir / "b.bin", synth::synthetic_images(3, 1));
  fs::resize_file(dir / "b.bin", 3 * kRecordBytes - 100);
  try {
    load_cifar_batch(dir / "b.bin", Split::Train);
    FAIL() << "expected IngestionError";
  } catch (const CorruptionError&) {
    FAIL() << "wrong error type";
  } catch (const IngestionError& e) {
    EXPECT_EQ(e.offset(), 2 * kRecordBytes);
    EXPECT_NE(e.file().find("b.bin"), std::string::npos);
  }
}

TEST(Cifar, BadLabel) {
  const fs::path dir = temp_dir("bad_label");
  write_cifar_batch(dir / "b.bin", synth::synthetic_images(2, 1));
  {
    std::fstream f(dir / "b.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(kRecordBytes));
    f.put(static_cast<char>(12));
  }
  try {
    load_cifar_batch(dir / "b.bin", Split::Train);
    FAIL() << "expected CorruptionError";
  } catch (const CorruptionError& e) {
    EXPECT_EQ(e.offset(), kRecordBytes);
  }
}

TEST(Cifar, MissingFileAndWrongCount) {
  const fs::path dir = temp_dir("missing");
  EXPECT_THROW(load_cifar_batch(dir / "nope.bin", Split::Train), IngestionError);
  write_cifar_batch(dir / "b.bin", synth::synthetic_images(2, 1));
  EXPECT_THROW(load_cifar_batch(dir / "b.bin", Split::Train, 3), IngestionError);
  EXPECT_THROW(load_cifar10(dir), IngestionError);
}

TEST(Cifar, SubsampleKeepsOrder) {
  const auto ds = synth::synthetic_images(50, 2);
  const auto a = subsample(ds, 20, 9);
  const auto b = subsample(ds, 20, 9);
  EXPECT_EQ(a.pixels, b.pixels);
  EXPECT_EQ(a.size(), 20u);
  EXPECT_EQ(subsample(ds, 80, 9).size(), 50u);
}

// --- patches ---------------------------------------------------------------

TEST(Patches, WholeImagePatch) {
  const auto ds = synth::synthetic_images(4, 3);
  const auto ps = extract_random_patches(ds, 10, 32, 1);
  EXPECT_EQ(ps.length(), 3072);
  for (const auto& o : ps.origins) {
    EXPECT_EQ(o.x, 0);
    EXPECT_EQ(o.y, 0);
  }
  // Channel-major then row-major equals the plane layout of the image.
  for (Eigen::Index k = 0; k < 3072; ++k) {
    EXPECT_EQ(ps.values(k, 0), ds.image(ps.origins[0].image)[static_cast<std::size_t>(k)]);
  }
}

TEST(Patches, DeskScaleShapeAndDeterminism) {
  const auto ds = synth::synthetic_images(20, 4);
  const auto a = extract_random_patches(ds, 10000, 9, 5);
  EXPECT_EQ(a.length(), 243);
  EXPECT_EQ(a.count(), 10000);
  const auto b = extract_random_patches(ds, 10000, 9, 5);
  EXPECT_EQ(a.origins, b.origins);
  for (const auto& o : a.origins) {
    EXPECT_GE(o.x, 0);
    EXPECT_LE(o.x, 23);
    EXPECT_LE(o.y, 23);
  }
}

TEST(Patches, PatchLayout) {
  const auto img = gradient_image();
  std::vector<double> out(243);
  copy_patch(img, 9, 4, 6, out.data());
  for (int c = 0; c < 3; ++c)
    for (int dy = 0; dy < 9; ++dy)
      for (int dx = 0; dx < 9; ++dx)
        EXPECT_EQ(out[c * 81 + dy * 9 + dx], img[c * 1024 + (6 + dy) * 32 + 4 + dx]);
}

TEST(DensePatches, Counts) {
  const auto img = gradient_image();
  EXPECT_EQ(extract_dense_patches(img, 32).count(), 1);
  const auto ps = extract_dense_patches(img, 9);
  ASSERT_EQ(ps.count(), 576);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      const auto& o = ps.origins[static_cast<std::size_t>(y * 24 + x)];
      EXPECT_EQ(o.x, x);
      EXPECT_EQ(o.y, y);
    }
  }
}

// --- preprocessing -----------------------------------------------------------

TEST(Contrast, ConstantPatchFlagged) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(5, 2, 7.0);
  p(0, 1) = 1.0;
  const auto r = contrast_normalize(p, 0.0);
  EXPECT_EQ(r.flagged, 1u);
  EXPECT_TRUE(r.values.col(0).isZero(0.0));
  EXPECT_TRUE(r.values.allFinite());
}

TEST(Contrast, AffineIdentity) {
  Eigen::VectorXd v(6);
  v << 0, 255, 10, 200, 50, 128;
  const double var = (v.array() - v.mean()).square().mean();
  const auto r = contrast_normalize(v, 10.0).values;
  const double mean = r.mean();
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR((r.array() - mean).square().mean(), var / (var + 10.0), 1e-12);
}

TEST(Contrast, SecondApplicationFactor) {
  const auto x = contrast_normalize(Eigen::MatrixXd(randmat::sample_gaussian(20, 3, 1)), 0.0).values;
  const auto y = contrast_normalize(x, 10.0).values;
  EXPECT_LE((y - x * std::sqrt(1.0 / 11.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Whitening, IsotropicInputNearIdentity) {
  const auto x = randmat::sample_gaussian(10, 200000, 3);
  const auto t = fit_whitening(x, 1e-9);
  EXPECT_LE((t.matrix - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_EQ(t.matrix, t.matrix.transpose());
}

TEST(Whitening, FittedCovarianceOffDiagonal) {
  const auto ds = synth::synthetic_images(200, 5);
  auto patches = extract_random_patches(ds, 10000, 9, 6).values;
  contrast_normalize_inplace(patches, 10.0);
  const auto t = fit_whitening(patches, 0.1);
  const auto cov = sample_covariance(apply_whitening(t, patches));
  Eigen::MatrixXd off = cov;
  off.diagonal().setZero();
  EXPECT_LE(off.cwiseAbs().maxCoeff(), 0.05);
  EXPECT_FALSE(t.underdetermined);
  EXPECT_EQ(t.fingerprint().size(), 16u);
  EXPECT_EQ(t.fingerprint(), fit_whitening(patches, 0.1).fingerprint());
}

TEST(Whitening, IncreasesRoundness) {
  const auto ds = synth::synthetic_images(100, 7);
  auto patches = extract_random_patches(ds, 3000, 9, 8).values;
  const double raw = spectral::roundness(patches);
  contrast_normalize_inplace(patches, 10.0);
  const double white = spectral::roundness(fit_whitening(patches, 0.1).apply(patches));
  EXPECT_GT(white, raw);
}

TEST(Whitening, Underdetermined) {
  EXPECT_TRUE(fit_whitening(randmat::sample_gaussian(10, 5, 1), 0.1).underdetermined);
}

// --- dictionary ----------------------------------------------------------------

TEST(Dictionary, PermutationWhenNEqualsP) {
  const auto x = randmat::sample_gaussian(6, 9, 2);
  const auto d = random_patches_dictionary(x, 9, 3);
  std::set<Eigen::Index> used;
  for (Eigen::Index i = 0; i < 9; ++i) {
    for (Eigen::Index j = 0; j < 9; ++j) {
      if ((d.atoms.row(i).transpose() - x.col(j).normalized()).cwiseAbs().maxCoeff() < 1e-15) used.insert(j);
    }
  }
  EXPECT_EQ(used.size(), 9u);
}

TEST(Dictionary, UnitRowsAndErrors) {
  const auto x = randmat::sample_gaussian(243, 1000, 4);
  for (Eigen::Index n : {243, 486}) {
    const auto d = random_patches_dictionary(x, n, 5);
    EXPECT_EQ(d.size(), n);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(d.atoms.row(i).norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(random_patches_dictionary(x, 1001, 1), InvalidParameter);
  EXPECT_EQ(parse_source("sparse_filtering"), DictionarySource::SparseFiltering);
  EXPECT_EQ(to_string(DictionarySource::RandomPatches), "random_patches");
  EXPECT_THROW(parse_source("kmeans"), InvalidParameter);
}

// --- encoder -------------------------------------------------------------------

TEST(Pooling, BruteForceOracle) {
  Rng rng(6);
  const Eigen::Index n = 5;
  const Eigen::MatrixXd z = rng.normal_matrix(n, 576);
  const auto pooled = max_pool(z, 24, 4);
  ASSERT_EQ(pooled.size(), 16 * n);
  for (int cy = 0; cy < 4; ++cy) {
    for (int cx = 0; cx < 4; ++cx) {
      for (Eigen::Index f = 0; f < n; ++f) {
        double m = -1e300;
        for (int y = cy * 6; y < cy * 6 + 6; ++y)
          for (int x = cx * 6; x < cx * 6 + 6; ++x) m = std::max(m, z(f, y * 24 + x));
        EXPECT_EQ(pooled((cy * 4 + cx) * n + f), m);
      }
    }
  }
}

TEST(Pooling, PartitionExhaustive) {
  // Each grid position is the unique maximum of a one-hot map in exactly one cell.
  for (int pos = 0; pos < 576; ++pos) {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 576);
    z(0, pos) = 1.0;
    EXPECT_EQ(max_pool(z, 24, 4).sum(), 1.0);
  }
}

namespace {

Preprocessing fitted_prep(const ImageDataset& ds, FeatureMatrix* pre_out = nullptr) {
  Preprocessing prep;
  auto patches = extract_random_patches(ds, 2000, 9, 11).values;
  contrast_normalize_inplace(patches, prep.var_floor);
  prep.whitening = fit_whitening(patches, 0.1);
  if (pre_out != nullptr) *pre_out = prep.whitening->apply(patches);
  return prep;
}

}  // namespace

TEST(Encoder, LengthAndThreshold) {
  const auto ds = synth::synthetic_images(30, 8);
  FeatureMatrix pre;
  const auto prep = fitted_prep(ds, &pre);
  for (Eigen::Index n : {243, 486}) {
    const auto d = random_patches_dictionary(pre, n, 1).atoms;
    EXPECT_EQ(Encoder(d, prep).feature_length(), 16 * n);
  }
  const auto d = random_patches_dictionary(pre, 16, 1).atoms;
  EncoderOptions big;
  big.alpha = 1e9;
  EXPECT_TRUE(Encoder(d, prep, big).encode(ds.image(0)).isZero(0.0));
}

TEST(Encoder, MatchesUnfoldedReference) {
  const auto ds = synth::synthetic_images(30, 9);
  FeatureMatrix pre;
  const auto prep = fitted_prep(ds, &pre);
  const auto d = random_patches_dictionary(pre, 12, 2).atoms;
  const Encoder enc(d, prep);
  const auto dense = extract_dense_patches(ds.image(3), 9).values;
  const Eigen::MatrixXd z = soft_threshold(d * preprocess(dense, prep), 0.25);
  const auto expected = max_pool(z, 24, 4);
  EXPECT_LE((enc.encode(ds.image(3)) - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Encoder, AlphaMonotone) {
  const auto ds = synth::synthetic_images(10, 10);
  FeatureMatrix pre;
  const auto prep = fitted_prep(ds, &pre);
  const auto d = random_patches_dictionary(pre, 8, 3).atoms;
  Eigen::VectorXd previous;
  for (double alpha : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0}) {
    EncoderOptions o;
    o.alpha = alpha;
    const auto v = Encoder(d, prep, o).encode(ds.image(1));
    if (previous.size() > 0) EXPECT_TRUE((v.array() <= previous.array()).all());
    previous = v;
  }
}

TEST(Encoder, ParallelMatchesSerial) {
  const auto ds = synth::synthetic_images(12, 11);
  FeatureMatrix pre;
  const auto prep = fitted_prep(ds, &pre);
  const Encoder enc(random_patches_dictionary(pre, 8, 4).atoms, prep);
  EXPECT_EQ(enc.encode_all(ds, 1), enc.encode_all(ds, 3));
}

TEST(Encoder, MissingWhiteningIsConfigError) {
  Preprocessing prep;
  prep.whiten = true;
  EXPECT_THROW(Encoder(Eigen::MatrixXd::Identity(243, 243), prep), ConfigError);
  EXPECT_THROW(preprocess(Eigen::MatrixXd::Zero(243, 1), prep), ConfigError);
}

// --- classifier ------------------------------------------------------------------

TEST(Svm, SeparableToy) {
  Eigen::MatrixXd x(2, 10);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    const int label = i % 2;
    x(0, i) = (label ? 2.0 : -2.0) + 0.1 * i;
    x(1, i) = 0.3 * ((i * 7) % 5);
    y[static_cast<std::size_t>(i)] = label;
  }
  SvmConfig c;
  c.epochs = 50;
  const auto svm = train_classifier(x, y, c);
  EXPECT_EQ(evaluate(svm, x, y), 1.0);
}

TEST(Svm, FeaturePermutationSymmetry) {
  Rng rng(12);
  const Eigen::MatrixXd x = rng.normal_matrix(6, 60);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) y[static_cast<std::size_t>(i)] = (x(0, i) + x(3, i) > 0 ? 1 : 0) + (x(5, i) > 0.5 ? 1 : 0);
  const Eigen::MatrixXd xt = rng.normal_matrix(6, 40);
  std::vector<int> yt(40);
  for (int i = 0; i < 40; ++i) yt[static_cast<std::size_t>(i)] = (xt(0, i) + xt(3, i) > 0 ? 1 : 0) + (xt(5, i) > 0.5 ? 1 : 0);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 4, 2, 0, 5, 1, 3;
  const auto a = train_classifier(x, y);
  const auto b = train_classifier(perm * x, y);
  EXPECT_DOUBLE_EQ(evaluate(a, xt, yt), evaluate(b, perm * xt, yt));
}

TEST(Svm, HugeLambdaGivesMajorityRate) {
  Rng rng(13);
  const Eigen::MatrixXd x = rng.normal_matrix(4, 50);
  std::vector<int> y(50);
  for (int i = 0; i < 50; ++i) y[static_cast<std::size_t>(i)] = i < 30 ? 0 : (i < 40 ? 1 : 2);
  SvmConfig c;
  c.lambda = 1e9;
  const auto svm = train_classifier(x, y, c);
  EXPECT_LE(svm.weights.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_DOUBLE_EQ(evaluate(svm, x, y), 0.6);
}

TEST(Svm, Errors) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 12);
  std::vector<int> y(12, 0);
  y[0] = 2;  // class 1 absent
  EXPECT_THROW(train_classifier(x, y), InvalidInput);
  std::vector<int> few{0, 1, 0};
  EXPECT_THROW(train_classifier(Eigen::MatrixXd::Random(2, 3), few), InvalidInput);
}

// --- experiment ------------------------------------------------------------------

namespace {

Cifar10 small_cifar() {
  Cifar10 c;
  c.train = synth::synthetic_images(300, 21);
  c.test = synth::synthetic_images(100, 22, Split::Test);
  return c;
}

ExperimentConfig small_experiment() {
  ExperimentConfig e;
  e.features = 16;
  e.train_images = 200;
  e.test_images = 100;
  e.patches = 3000;
  e.max_iterations = 20;
  e.snapshot_every = 5;
  return e;
}

}  // namespace

TEST(Experiment, RandomPatchesDeterministic) {
  const auto data = small_cifar();
  const auto cfg = small_experiment();
  const auto prepared = prepare_data(data, cfg);
  const auto a = run_experiment(prepared, cfg);
  const auto b = run_experiment(prepared, cfg);
  std::ostringstream ra, rb;
  write_report_header(ra);
  write_report_row(ra, a.row);
  write_report_header(rb);
  write_report_row(rb, b.row);
  EXPECT_EQ(ra.str(), rb.str());
  EXPECT_EQ(ra.str().substr(0, ra.str().find('\n')),
            "n,normalize,whiten,source,orc,roundness,train_acc,test_acc,iterations,seconds");
  EXPECT_GE(a.row.roundness, 0.0);
  EXPECT_LE(a.row.roundness, 1.0);
  EXPECT_GE(a.row.test_accuracy, 0.0);
  EXPECT_LE(a.row.test_accuracy, 1.0);
  EXPECT_FALSE(a.row.seconds.has_value());
  EXPECT_EQ(a.whitening_fingerprint.size(), 16u);
  // The synthetic classes are easy; the pipeline must beat chance clearly.
  EXPECT_GT(a.row.test_accuracy, 0.5);
}

TEST(Experiment, SparseFilteringTraceAndOrc) {
  const auto data = small_cifar();
  auto cfg = small_experiment();
  cfg.source = DictionarySource::SparseFiltering;
  const auto prepared = prepare_data(data, cfg);
  const auto plain = run_experiment(prepared, cfg);
  ASSERT_EQ(plain.trace.size(), 4u);
  for (const auto& t : plain.trace) {
    EXPECT_TRUE(t.test_accuracy.has_value());
    EXPECT_GE(t.roundness, 0.0);
    EXPECT_LE(t.roundness, 1.0);
  }
  ASSERT_TRUE(plain.selection.has_value());
  cfg.orc = true;
  const auto with_orc = run_experiment(prepared, cfg);
  EXPECT_EQ(with_orc.row.iterations, with_orc.selected_iteration);
  double best = 0.0;
  for (const auto& t : with_orc.trace) best = std::max(best, t.roundness);
  EXPECT_DOUBLE_EQ(with_orc.row.roundness, best);
  std::ostringstream trace;
  write_trace_csv(trace, plain.trace);
  EXPECT_EQ(trace.str().substr(0, trace.str().find('\n')), "iteration,roundness,train_acc,test_acc");
}

TEST(Experiment, SparseEvaluationCadence) {
  const auto data = small_cifar();
  auto cfg = small_experiment();
  cfg.source = DictionarySource::SparseFiltering;
  cfg.eval_every = 2;
  const auto r = run_experiment(prepare_data(data, cfg), cfg);
  ASSERT_EQ(r.trace.size(), 4u);
  EXPECT_FALSE(r.trace[0].test_accuracy.has_value());
  EXPECT_TRUE(r.trace[1].test_accuracy.has_value());
  std::ostringstream out;
  write_trace_csv(out, r.trace);
  EXPECT_NE(out.str().find("\n5,"), std::string::npos);
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig c;
  c.features = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = ExperimentConfig{};
  c.alpha = -1.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
}
