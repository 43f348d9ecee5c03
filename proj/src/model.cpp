#include "procnets/model.hpp"

namespace procnets {

ProcNetModel ProcNetModel::build(const RunConfig& config) {
  config.validate();
  ProcNetModel model;
  model.num_frames = config.num_frames;
  model.feature_dim = config.feature_dim;
  model.hidden = config.hidden;
  model.anchor_lengths = build_anchor_lengths(
      config.anchor_min_len, config.anchor_interval, config.anchor_count);
  model.pool_h = config.pool_h;
  model.pool_w = config.pool_w;
  const int k = static_cast<int>(model.anchor_lengths.size());
  model.grid_rows = (k + config.pool_h - 1) / config.pool_h;
  model.grid_cols = (config.num_frames + config.pool_w - 1) / config.pool_w;
  model.num_candidates = model.grid_rows * model.grid_cols;
  model.encoder = EncoderParams(config.feature_dim, config.hidden);
  model.head = ProposalHeadParams(model.anchor_lengths, config.feature_dim);
  model.decoder =
      DecoderParams(model.num_candidates, config.hidden, config.feature_dim);
  return model;
}

void ProcNetModel::init_params(Rng& rng) {
  encoder.init(rng);
  head.init(rng);
  decoder.init(rng);
}

std::vector<ParamSlot*> ProcNetModel::slots() {
  std::vector<ParamSlot*> out = {
      &encoder.fwd.wx, &encoder.fwd.wh, &encoder.fwd.b,
      &encoder.bwd.wx, &encoder.bwd.wh, &encoder.bwd.b,
      &encoder.reduce_w, &encoder.reduce_b,
  };
  for (auto& conv : head.convs) {
    out.push_back(&conv.w);
    out.push_back(&conv.b);
  }
  out.push_back(&decoder.lstm.wx);
  out.push_back(&decoder.lstm.wh);
  out.push_back(&decoder.lstm.b);
  out.push_back(&decoder.out_w);
  out.push_back(&decoder.out_b);
  out.push_back(&decoder.embedding);
  out.push_back(&decoder.content_w);
  out.push_back(&decoder.content_b);
  return out;
}

std::vector<const ParamSlot*> ProcNetModel::slots() const {
  auto mutable_slots = const_cast<ProcNetModel*>(this)->slots();
  return std::vector<const ParamSlot*>(mutable_slots.begin(),
                                       mutable_slots.end());
}

void ProcNetModel::zero_grads() {
  for (ParamSlot* slot : slots()) slot->zero_grad();
}

}  // namespace procnets
