#include "procnets/proposal.hpp"

#include <cmath>
#include <string>

namespace procnets {

namespace {

std::string conv_name(int k) {
  return "head.k" + std::to_string(k);
}

}  // namespace

ProposalHeadParams::ProposalHeadParams(std::vector<int> anchor_lengths_,
                                       int feature_dim_)
    : anchor_lengths(std::move(anchor_lengths_)), feature_dim(feature_dim_) {
  convs.reserve(anchor_lengths.size());
  for (size_t k = 0; k < anchor_lengths.size(); ++k) {
    convs.emplace_back(conv_name(static_cast<int>(k)), anchor_lengths[k],
                       feature_dim);
  }
}

void ProposalHeadParams::init(Rng& rng) {
  for (auto& conv : convs) conv.init(rng);
}

ProposalMap propose(const ProposalHeadParams& p, const ContextFeatures& context) {
  if (p.convs.size() != p.anchor_lengths.size() || p.convs.empty()) {
    throw Error(ErrorKind::config,
                "proposal head has " + std::to_string(p.convs.size()) +
                    " conv sets for " + std::to_string(p.anchor_lengths.size()) +
                    " anchor lengths");
  }
  const int rows = static_cast<int>(p.anchor_lengths.size());
  const int frames = context.rows;
  ProposalMap map;
  map.scores = Array2(rows, frames);
  map.offsets_c = Array2(rows, frames);
  map.offsets_l = Array2(rows, frames);
  for (int k = 0; k < rows; ++k) {
    if (p.convs[k].kernel != p.anchor_lengths[k]) {
      throw Error(ErrorKind::config,
                  "conv kernel " + std::to_string(p.convs[k].kernel) +
                      " does not match anchor length " +
                      std::to_string(p.anchor_lengths[k]));
    }
    Array2 raw = temporal_conv(p.convs[k], context);  // L x 3
    for (int t = 0; t < frames; ++t) {
      map.scores.at(k, t) = sigmoid(raw.at(t, 0));
      map.offsets_c.at(k, t) = std::tanh(raw.at(t, 1));
      map.offsets_l.at(k, t) = std::tanh(raw.at(t, 2));
    }
  }
  return map;
}

void propose_backward(ProposalHeadParams& p, const ContextFeatures& context,
                      const ProposalMap& map, const Array2& dscores,
                      const Array2& doffsets_c, const Array2& doffsets_l,
                      Array2* dcontext) {
  const int rows = static_cast<int>(p.anchor_lengths.size());
  const int frames = context.rows;
  Array2 draw(frames, 3);
  for (int k = 0; k < rows; ++k) {
    for (int t = 0; t < frames; ++t) {
      const double s = map.scores.at(k, t);
      const double oc = map.offsets_c.at(k, t);
      const double ol = map.offsets_l.at(k, t);
      draw.at(t, 0) = dscores.at(k, t) * s * (1.0 - s);
      draw.at(t, 1) = doffsets_c.at(k, t) * (1.0 - oc * oc);
      draw.at(t, 2) = doffsets_l.at(k, t) * (1.0 - ol * ol);
    }
    temporal_conv_backward(p.convs[k], context, draw, dcontext);
  }
}

}  // namespace procnets
