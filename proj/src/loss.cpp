#include "procnets/loss.hpp"

#include <cmath>
#include <string>

#include "procnets/errors.hpp"
#include "procnets/nn.hpp"

namespace procnets {

bool regression_target_representable(const OffsetPair& target) {
  return std::abs(target.theta_c) < 1.0 && std::abs(target.theta_l) < 1.0;
}

LossReport composite_loss(const ProposalMap& map, const AssignmentBatch& batch,
                          const std::vector<std::vector<double>>& step_probs,
                          const std::vector<int>& step_targets,
                          const LossWeights& weights) {
  if (batch.positives.empty() && batch.negatives.empty()) {
    throw Error(ErrorKind::invalid_argument, "composite_loss: empty batch");
  }
  if (step_probs.size() != step_targets.size() || step_probs.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "composite_loss: step probabilities and targets disagree");
  }
  LossReport report;

  double cla = 0.0;
  for (const PositiveSample& pos : batch.positives) {
    cla += bce(map.scores.at(pos.anchor_row, pos.frame), 1);
  }
  for (const AnchorPlacement& neg : batch.negatives) {
    cla += bce(map.scores.at(neg.anchor_row, neg.frame), 0);
  }
  report.l_cla =
      cla / static_cast<double>(batch.positives.size() + batch.negatives.size());

  double reg = 0.0;
  int reg_count = 0;
  for (const PositiveSample& pos : batch.positives) {
    if (!regression_target_representable(pos.target)) continue;
    const double pred[2] = {map.offsets_c.at(pos.anchor_row, pos.frame),
                            map.offsets_l.at(pos.anchor_row, pos.frame)};
    const double target[2] = {pos.target.theta_c, pos.target.theta_l};
    reg += smooth_l1(pred, target);
    ++reg_count;
  }
  report.l_reg = reg_count > 0 ? reg / reg_count : 0.0;

  double seq = 0.0;
  for (size_t t = 0; t < step_probs.size(); ++t) {
    const int target = step_targets[t];
    if (target < 0 || target >= static_cast<int>(step_probs[t].size())) {
      throw Error(ErrorKind::invalid_argument,
                  "composite_loss: step target out of range");
    }
    seq += -std::log(std::max(step_probs[t][target], 1e-300));
  }
  report.l_seq = seq / static_cast<double>(step_probs.size());

  report.total =
      report.l_cla + weights.alpha_r * report.l_reg + weights.alpha_s * report.l_seq;
  if (!std::isfinite(report.total)) {
    std::string which = !std::isfinite(report.l_cla)   ? "l_cla"
                        : !std::isfinite(report.l_reg) ? "l_reg"
                                                       : "l_seq";
    throw Error(ErrorKind::training, "non-finite loss component " + which);
  }
  return report;
}

}  // namespace procnets
