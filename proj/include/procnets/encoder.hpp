#pragma once

#include "procnets/array.hpp"
#include "procnets/nn.hpp"

namespace procnets {

// Per-frame feature matrix, one row per sampled frame.
using VideoFeatures = Array2;
// Frame-wise context-aware features, same shape as the input video.
using ContextFeatures = Array2;

// Bi-directional recurrence over the frame features, concatenation with the
// raw features, and a linear reduction back to the feature dimension.
struct EncoderParams {
  LstmParams fwd;
  LstmParams bwd;
  ParamSlot reduce_w;  // D x (D + 2H)
  ParamSlot reduce_b;  // D x 1
  int feature_dim = 0;
  int hidden = 0;

  EncoderParams() = default;
  EncoderParams(int feature_dim_, int hidden_);
  void init(Rng& rng);
};

struct EncoderCache {
  BilstmCache recurrence;
  Array2 concat;  // L x (D + 2H)
};

ContextFeatures encode_context(const EncoderParams& p, const VideoFeatures& x,
                               EncoderCache* cache);

// dcontext is the gradient into the returned context features. Input frame
// gradients are not needed anywhere and are dropped.
void encode_context_backward(EncoderParams& p, const EncoderCache& cache,
                             const Array2& dcontext);

}  // namespace procnets
