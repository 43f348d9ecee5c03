#pragma once

#include <vector>

#include "procnets/anchors.hpp"
#include "procnets/proposal.hpp"

namespace procnets {

struct LossWeights {
  double alpha_r = 1.0;
  double alpha_s = 1.0;
};

struct LossReport {
  double l_cla = 0.0;
  double l_reg = 0.0;
  double l_seq = 0.0;
  double total = 0.0;
};

// Positives whose encoded target offsets saturate the tanh range (|theta| >= 1)
// cannot be regressed and are excluded from l_reg; they still count for l_cla.
bool regression_target_representable(const OffsetPair& target);

// Composite objective: procedureness BCE over the sampled placements, smooth
// L1 over the representable positive offsets, and the per-step sequence cross
// entropy averaged over all steps including the end step.
LossReport composite_loss(const ProposalMap& map, const AssignmentBatch& batch,
                          const std::vector<std::vector<double>>& step_probs,
                          const std::vector<int>& step_targets,
                          const LossWeights& weights);

}  // namespace procnets
