#include "procnets/encoder.hpp"

namespace procnets {

EncoderParams::EncoderParams(int feature_dim_, int hidden_)
    : fwd("encoder.fwd", feature_dim_, hidden_),
      bwd("encoder.bwd", feature_dim_, hidden_),
      reduce_w("encoder.reduce.w", feature_dim_, feature_dim_ + 2 * hidden_),
      reduce_b("encoder.reduce.b", feature_dim_, 1),
      feature_dim(feature_dim_),
      hidden(hidden_) {}

void EncoderParams::init(Rng& rng) {
  fwd.init(rng);
  bwd.init(rng);
  init_uniform(reduce_w.value, rng);
}

ContextFeatures encode_context(const EncoderParams& p, const VideoFeatures& x,
                               EncoderCache* cache) {
  require_shape(x, x.rows, p.feature_dim, "encode_context input");
  const int frames = x.rows;
  const int d = p.feature_dim;
  const int h = p.hidden;
  EncoderCache local;
  EncoderCache& c = cache != nullptr ? *cache : local;
  Array2 states = bilstm(p.fwd, p.bwd, x, &c.recurrence);
  c.concat = Array2(frames, d + 2 * h);
  for (int t = 0; t < frames; ++t) {
    double* row = c.concat.row(t);
    std::copy(x.row(t), x.row(t) + d, row);
    std::copy(states.row(t), states.row(t) + 2 * h, row + d);
  }
  Array2 out(frames, d);
  for (int t = 0; t < frames; ++t) {
    affine(p.reduce_w.value, p.reduce_b.value,
           std::span<const double>(c.concat.row(t), d + 2 * h),
           std::span<double>(out.row(t), d));
  }
  return out;
}

void encode_context_backward(EncoderParams& p, const EncoderCache& cache,
                             const Array2& dcontext) {
  const int frames = dcontext.rows;
  const int d = p.feature_dim;
  const int h = p.hidden;
  Array2 dconcat(frames, d + 2 * h);
  for (int t = 0; t < frames; ++t) {
    affine_backward(p.reduce_w.value,
                    std::span<const double>(cache.concat.row(t), d + 2 * h),
                    std::span<const double>(dcontext.row(t), d),
                    &p.reduce_w.grad, &p.reduce_b.grad,
                    std::span<double>(dconcat.row(t), d + 2 * h));
  }
  Array2 dstates(frames, 2 * h);
  for (int t = 0; t < frames; ++t) {
    std::copy(dconcat.row(t) + d, dconcat.row(t) + d + 2 * h, dstates.row(t));
  }
  bilstm_backward(p.fwd, p.bwd, dstates, cache.recurrence, nullptr);
}

}  // namespace procnets
