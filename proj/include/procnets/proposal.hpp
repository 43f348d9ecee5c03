#pragma once

#include <vector>

#include "procnets/array.hpp"
#include "procnets/encoder.hpp"
#include "procnets/nn.hpp"

namespace procnets {

// Per-anchor, per-frame proposal head output. Scores sit in (0,1) after the
// sigmoid, offsets in (-1,1) after the tanh.
struct ProposalMap {
  Array2 scores;     // K x L
  Array2 offsets_c;  // K x L
  Array2 offsets_l;  // K x L
};

// One temporal convolution per anchor length; kernel width of row k equals
// the anchor length l_k.
struct ProposalHeadParams {
  std::vector<int> anchor_lengths;
  std::vector<ConvParams> convs;
  int feature_dim = 0;

  ProposalHeadParams() = default;
  ProposalHeadParams(std::vector<int> anchor_lengths_, int feature_dim_);
  void init(Rng& rng);
};

ProposalMap propose(const ProposalHeadParams& p, const ContextFeatures& context);

// dscores/doffsets_* are gradients with respect to the post-activation maps.
// Accumulates conv parameter grads and the context feature gradient.
void propose_backward(ProposalHeadParams& p, const ContextFeatures& context,
                      const ProposalMap& map, const Array2& dscores,
                      const Array2& doffsets_c, const Array2& doffsets_l,
                      Array2* dcontext);

}  // namespace procnets
