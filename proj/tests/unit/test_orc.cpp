#include <gtest/gtest.h>

#include <algorithm>

#include "orcsf/error.hpp"
#include "orcsf/orc.hpp"
#include "orcsf/rng.hpp"

using namespace orcsf;
using namespace orcsf::orc;

namespace {

RoundnessTrace make_trace(std::initializer_list<double> values) {
  RoundnessTrace t;
  std::size_t k = 0;
  for (double v : values) t.push_back({++k * 10, v});
  return t;
}

}  // namespace

TEST(OrcSelect, LastStrictRecord) {
  const auto s = orc_select(make_trace({0.1, 0.2, 0.3, 0.25}));
  EXPECT_EQ(s.position, 2u);
  EXPECT_EQ(s.iteration, 30u);
  EXPECT_DOUBLE_EQ(s.roundness, 0.3);
  EXPECT_FALSE(s.terminal);
}

TEST(OrcSelect, IncreasingFallsBackToFinal) {
  const auto s = orc_select(make_trace({0.1, 0.2, 0.3}));
  EXPECT_EQ(s.position, 2u);
  EXPECT_TRUE(s.terminal);
}

TEST(OrcSelect, DecreasingPicksFirst) {
  const auto s = orc_select(make_trace({0.3, 0.2, 0.1}));
  EXPECT_EQ(s.position, 0u);
  EXPECT_FALSE(s.terminal);
}

TEST(OrcSelect, SingleEntryIsTerminal) {
  const auto s = orc_select(make_trace({0.4}));
  EXPECT_EQ(s.position, 0u);
  EXPECT_TRUE(s.terminal);
}

TEST(OrcSelect, TiesAreNotRecords) {
  const auto s = orc_select(make_trace({0.2, 0.2}));
  EXPECT_EQ(s.position, 0u);
  EXPECT_FALSE(s.terminal);
}

TEST(OrcSelect, MinDeltaRaisesTheBar) {
  OrcPolicy p;
  p.min_delta = 0.05;
  const auto s = orc_select(make_trace({0.1, 0.12, 0.2, 0.21}), p);
  EXPECT_EQ(s.position, 2u);
  EXPECT_FALSE(s.terminal);
}

TEST(OrcSelect, Errors) {
  EXPECT_THROW(orc_select({}), InvalidInput);
  RoundnessTrace bad{{10, 0.1}, {10, 0.2}};
  EXPECT_THROW(orc_select(bad), InvalidInput);
  OrcPolicy p;
  p.patience = 0;
  EXPECT_THROW(p.validate(), InvalidParameter);
  p = OrcPolicy{};
  p.min_delta = -1.0;
  EXPECT_THROW(p.validate(), InvalidParameter);
}

TEST(OrcMonitor, HaltsAfterOneFailure) {
  OrcMonitor m(OrcPolicy{1, 0.0});
  EXPECT_FALSE(m.push(1, 0.1));
  EXPECT_FALSE(m.push(2, 0.2));
  EXPECT_TRUE(m.push(3, 0.15));
  EXPECT_TRUE(m.halted());
  EXPECT_EQ(m.selected_iteration(), 2u);
  EXPECT_DOUBLE_EQ(*m.record_roundness(), 0.2);
}

TEST(OrcMonitor, PatienceTwo) {
  OrcMonitor m(OrcPolicy{2, 0.0});
  EXPECT_FALSE(m.push(1, 0.1));
  EXPECT_FALSE(m.push(2, 0.2));
  EXPECT_FALSE(m.push(3, 0.19));
  EXPECT_FALSE(m.push(4, 0.25));
  EXPECT_EQ(m.selected_iteration(), 4u);
  EXPECT_FALSE(m.halted());
}

TEST(OrcMonitor, MonotoneNeverHaltsInTraining) {
  // A separable problem whose roundness the evaluator reports as increasing.
  Rng rng(1);
  const Eigen::MatrixXd x = rng.normal_matrix(8, 40);
  std::size_t calls = 0;
  OrcMonitor m(OrcPolicy{}, [&](const Eigen::MatrixXd&) { return 0.01 * static_cast<double>(++calls); });
  sf::SFConfig c;
  c.features = 4;
  c.max_iterations = 30;
  c.snapshot_every = 5;
  c.lbfgs.gradient_tol = 0.0;
  const auto r = sf::train(x, c, &m);
  EXPECT_FALSE(r.halted_by_monitor);
  EXPECT_EQ(r.iterations, 30u);
  EXPECT_EQ(r.selected_iteration, 30u);
  EXPECT_EQ(calls, 6u);
}

TEST(OrcMonitor, ReturnsRecordWeights) {
  Rng rng(2);
  const Eigen::MatrixXd x = rng.normal_matrix(8, 40);
  const std::vector<double> stream{0.1, 0.3, 0.2, 0.25};
  std::size_t calls = 0;
  OrcMonitor m(OrcPolicy{1, 0.0}, [&](const Eigen::MatrixXd&) { return stream[calls++]; });
  sf::SFConfig c;
  c.features = 4;
  c.max_iterations = 40;
  c.snapshot_every = 5;
  c.keep_snapshots = true;
  c.lbfgs.gradient_tol = 0.0;
  const auto r = sf::train(x, c, &m);
  EXPECT_TRUE(r.halted_by_monitor);
  EXPECT_EQ(r.iterations, 15u);
  EXPECT_EQ(r.selected_iteration, 10u);
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.weights.matrix, *r.trace[1].weights);
}

TEST(OrcProperty, OfflineOnlineConsistency) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.below(15);
    RoundnessTrace t;
    for (std::size_t k = 0; k < len; ++k) t.push_back({k + 1, rng.uniform()});
    OrcMonitor m(OrcPolicy{1, 0.0});
    std::size_t stop = len;
    for (std::size_t k = 0; k < len; ++k) {
      if (m.push(t[k].iteration, t[k].roundness)) {
        stop = k + 1;
        break;
      }
    }
    const RoundnessTrace prefix(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(stop));
    const auto s = orc_select(prefix);
    EXPECT_EQ(*m.selected_iteration(), s.iteration);
    double best = 0.0;
    for (const auto& pt : prefix) best = std::max(best, pt.roundness);
    EXPECT_EQ(s.roundness, best);
    EXPECT_EQ(*m.record_roundness(), best);
  }
}

TEST(OrcProperty, SelectedIsPrefixMaximumWithPatience) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    OrcMonitor m(OrcPolicy{1 + rng.below(3), 0.0});
    double best = -1.0;
    for (std::size_t k = 1; k <= 20; ++k) {
      const double r = rng.uniform();
      best = std::max(best, r);
      if (m.push(k, r)) break;
    }
    EXPECT_EQ(*m.record_roundness(), best);
  }
}

TEST(RoundnessTrace, FromIterateTrace) {
  sf::IterateTrace it{{5, 1.0, 1.0, false, 0.2, std::nullopt}, {10, 0.9, 0.9, false, 0.3, std::nullopt}};
  const auto t = roundness_trace(it);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].iteration, 10u);
  EXPECT_DOUBLE_EQ(t[1].roundness, 0.3);
}
