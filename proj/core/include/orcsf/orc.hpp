#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "orcsf/sparsefilter.hpp"

namespace orcsf::orc {

struct RoundnessPoint {
  std::size_t iteration;
  double roundness;
};

/// (iteration, roundness) pairs with strictly increasing iterations.
using RoundnessTrace = std::vector<RoundnessPoint>;

struct OrcPolicy {
  /// Consecutive snapshots without a new record tolerated before halting.
  std::size_t patience = 1;
  /// A value is a record only if it exceeds every earlier value by more than this.
  double min_delta = 0.0;

  void validate() const;
};

struct OrcSelection {
  std::size_t position;   ///< index into the trace
  std::size_t iteration;  ///< iteration of the selected entry
  double roundness;
  /// The final entry is itself a record: roundness never stopped increasing,
  /// so the last (limit) transform is used.
  bool terminal;
};

/// Offline selection: the last record of the trace.
/// Throws InvalidInput on an empty trace or non-increasing iterations.
OrcSelection orc_select(const RoundnessTrace& trace, const OrcPolicy& policy = {});

RoundnessTrace roundness_trace(const sf::IterateTrace& trace);

/// Online ORC: keeps the running record and requests a halt once `patience`
/// consecutive snapshots fail to set a new one. On halt the selected weights
/// are those of the record snapshot. One monitor per training run.
class OrcMonitor final : public sf::Monitor {
 public:
  using Evaluator = std::function<double(const Eigen::MatrixXd& weights)>;

  /// Without an evaluator the roundness stored in each snapshot record is used.
  explicit OrcMonitor(OrcPolicy policy, Evaluator evaluator = {});

  /// Feeds one roundness value; returns true when training should halt.
  bool push(std::size_t iteration, double roundness);

  bool observe(const sf::IterateRecord& record, const Eigen::MatrixXd& weights) override;
  const Eigen::MatrixXd* selected_weights() const override;
  std::optional<std::size_t> selected_iteration() const override;

  std::optional<double> record_roundness() const { return best_; }
  bool halted() const { return halted_; }

 private:
  OrcPolicy policy_;
  Evaluator evaluator_;
  std::optional<double> best_;
  std::optional<double> running_max_;
  std::size_t best_iteration_ = 0;
  std::size_t failures_ = 0;
  bool halted_ = false;
  std::optional<Eigen::MatrixXd> best_weights_;
};

}  // namespace orcsf::orc
