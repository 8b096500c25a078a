#include "orcsf/orc.hpp"

#include <string>

#include "orcsf/error.hpp"

namespace orcsf::orc {

void OrcPolicy::validate() const {
  if (patience < 1) throw InvalidParameter("OrcPolicy: patience must be >= 1");
  if (!(min_delta >= 0.0)) throw InvalidParameter("OrcPolicy: min_delta must be >= 0");
}

OrcSelection orc_select(const RoundnessTrace& trace, const OrcPolicy& policy) {
  policy.validate();
  if (trace.empty()) throw InvalidInput("orc_select: empty roundness trace");

  std::size_t selected = 0;
  double running_max = trace.front().roundness;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].iteration <= trace[k - 1].iteration) {
      throw InvalidInput("orc_select: iterations must be strictly increasing (entry " +
                         std::to_string(k) + ")");
    }
    if (trace[k].roundness > running_max + policy.min_delta) selected = k;
    running_max = std::max(running_max, trace[k].roundness);
  }
  return {selected, trace[selected].iteration, trace[selected].roundness,
          selected + 1 == trace.size()};
}

RoundnessTrace roundness_trace(const sf::IterateTrace& trace) {
  RoundnessTrace out;
  out.reserve(trace.size());
  for (const auto& r : trace) out.push_back({r.iteration, r.roundness});
  return out;
}

OrcMonitor::OrcMonitor(OrcPolicy policy, Evaluator evaluator)
    : policy_(policy), evaluator_(std::move(evaluator)) {
  policy_.validate();
}

bool OrcMonitor::push(std::size_t iteration, double roundness) {
  if (!running_max_ || roundness > *running_max_ + policy_.min_delta) {
    best_ = roundness;
    best_iteration_ = iteration;
    failures_ = 0;
  } else {
    ++failures_;
  }
  running_max_ = running_max_ ? std::max(*running_max_, roundness) : roundness;
  halted_ = failures_ >= policy_.patience;
  return halted_;
}

bool OrcMonitor::observe(const sf::IterateRecord& record, const Eigen::MatrixXd& weights) {
  const double r = evaluator_ ? evaluator_(weights) : record.roundness;
  const bool halt = push(record.iteration, r);
  if (failures_ == 0) best_weights_ = weights;
  return halt;
}

const Eigen::MatrixXd* OrcMonitor::selected_weights() const {
  return best_weights_ ? &*best_weights_ : nullptr;
}

std::optional<std::size_t> OrcMonitor::selected_iteration() const {
  if (!best_) return std::nullopt;
  return best_iteration_;
}

}  // namespace orcsf::orc
