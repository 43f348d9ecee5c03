#pragma once

#include <vector>

#include "procnets/config.hpp"
#include "procnets/decoder.hpp"
#include "procnets/encoder.hpp"
#include "procnets/proposal.hpp"

namespace procnets {

// Every learnable array of the encoder, proposal head and sequential decoder,
// with dimensions resolved from a run configuration.
struct ProcNetModel {
  int num_frames = 0;
  int feature_dim = 0;
  int hidden = 0;
  std::vector<int> anchor_lengths;
  int pool_h = 0;
  int pool_w = 0;
  int grid_rows = 0;
  int grid_cols = 0;
  int num_candidates = 0;  // M

  EncoderParams encoder;
  ProposalHeadParams head;
  DecoderParams decoder;

  static ProcNetModel build(const RunConfig& config);
  void init_params(Rng& rng);

  std::vector<ParamSlot*> slots();
  std::vector<const ParamSlot*> slots() const;
  void zero_grads();
};

}  // namespace procnets
