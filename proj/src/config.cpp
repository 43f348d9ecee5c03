#include "procnets/config.hpp"

#include <algorithm>
#include <vector>

#include "json.hpp"
#include "procnets/errors.hpp"

namespace procnets {

using nlohmann::json;

void RunConfig::validate() const {
  if (num_frames < 1) throw Error(ErrorKind::config, "L must be >= 1");
  if (feature_dim < 1) throw Error(ErrorKind::config, "D must be >= 1");
  if (hidden < 1) throw Error(ErrorKind::config, "H must be >= 1");
  if (pool_h < 1 || pool_w < 1) throw Error(ErrorKind::config, "pooling kernel must be >= 1");
  if (samples_per_class < 1) throw Error(ErrorKind::config, "U must be >= 1");
  if (learning_rate <= 0.0) throw Error(ErrorKind::config, "learning_rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw Error(ErrorKind::config, "Adam betas must lie in [0, 1)");
  }
  if (epsilon <= 0.0) throw Error(ErrorKind::config, "epsilon must be positive");
  if (alpha_r < 0.0 || alpha_s < 0.0) {
    throw Error(ErrorKind::config, "loss weights must be non-negative");
  }
  if (s_max < 1) throw Error(ErrorKind::config, "s_max must be >= 1");
  if (beam_size < 1) throw Error(ErrorKind::config, "beam_size must be >= 1");
  if (n_uniform < 1 || n_eval_proposals < 1) {
    throw Error(ErrorKind::config, "proposal budgets must be >= 1");
  }
  if (!(pos_iou > neg_iou)) {
    throw Error(ErrorKind::config, "pos_iou must exceed neg_iou");
  }
  if (epochs < 0) throw Error(ErrorKind::config, "epochs must be >= 0");
  // Anchor grid knobs are checked by build_anchor_lengths.
}

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "L",           "D",          "H",          "anchor_min_len",
      "anchor_interval", "anchor_count", "h",    "w",
      "U",           "learning_rate", "beta1",   "beta2",
      "epsilon",     "alpha_r",    "alpha_s",    "s_max",
      "beam_size",   "nms_iou",    "n_uniform",  "n_eval_proposals",
      "tp_iou",      "pos_iou",    "neg_iou",    "epochs",
      "seed",        "drop_proposal_vec", "drop_location_emb",
      "drop_segment_content"};
  return keys;
}

template <typename T>
void read_field(const json& doc, const char* key, T& value) {
  if (doc.contains(key)) value = doc[key].get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("run config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::parse, "run config: expected a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorKind::config, "run config: unknown key '" + key + "'");
    }
  }
  RunConfig cfg;
  read_field(doc, "L", cfg.num_frames);
  read_field(doc, "D", cfg.feature_dim);
  read_field(doc, "H", cfg.hidden);
  read_field(doc, "anchor_min_len", cfg.anchor_min_len);
  read_field(doc, "anchor_interval", cfg.anchor_interval);
  read_field(doc, "anchor_count", cfg.anchor_count);
  read_field(doc, "h", cfg.pool_h);
  read_field(doc, "w", cfg.pool_w);
  read_field(doc, "U", cfg.samples_per_class);
  read_field(doc, "learning_rate", cfg.learning_rate);
  read_field(doc, "beta1", cfg.beta1);
  read_field(doc, "beta2", cfg.beta2);
  read_field(doc, "epsilon", cfg.epsilon);
  read_field(doc, "alpha_r", cfg.alpha_r);
  read_field(doc, "alpha_s", cfg.alpha_s);
  read_field(doc, "s_max", cfg.s_max);
  read_field(doc, "beam_size", cfg.beam_size);
  read_field(doc, "nms_iou", cfg.nms_iou);
  read_field(doc, "n_uniform", cfg.n_uniform);
  read_field(doc, "n_eval_proposals", cfg.n_eval_proposals);
  read_field(doc, "tp_iou", cfg.tp_iou);
  read_field(doc, "pos_iou", cfg.pos_iou);
  read_field(doc, "neg_iou", cfg.neg_iou);
  read_field(doc, "epochs", cfg.epochs);
  read_field(doc, "seed", cfg.seed);
  read_field(doc, "drop_proposal_vec", cfg.ablation.drop_proposal_vec);
  read_field(doc, "drop_location_emb", cfg.ablation.drop_location_emb);
  read_field(doc, "drop_segment_content", cfg.ablation.drop_segment_content);
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_json_text() const {
  json doc;
  doc["L"] = num_frames;
  doc["D"] = feature_dim;
  doc["H"] = hidden;
  doc["anchor_min_len"] = anchor_min_len;
  doc["anchor_interval"] = anchor_interval;
  doc["anchor_count"] = anchor_count;
  doc["h"] = pool_h;
  doc["w"] = pool_w;
  doc["U"] = samples_per_class;
  doc["learning_rate"] = learning_rate;
  doc["beta1"] = beta1;
  doc["beta2"] = beta2;
  doc["epsilon"] = epsilon;
  doc["alpha_r"] = alpha_r;
  doc["alpha_s"] = alpha_s;
  doc["s_max"] = s_max;
  doc["beam_size"] = beam_size;
  doc["nms_iou"] = nms_iou;
  doc["n_uniform"] = n_uniform;
  doc["n_eval_proposals"] = n_eval_proposals;
  doc["tp_iou"] = tp_iou;
  doc["pos_iou"] = pos_iou;
  doc["neg_iou"] = neg_iou;
  doc["epochs"] = epochs;
  doc["seed"] = seed;
  doc["drop_proposal_vec"] = ablation.drop_proposal_vec;
  doc["drop_location_emb"] = ablation.drop_location_emb;
  doc["drop_segment_content"] = ablation.drop_segment_content;
  return doc.dump(2);
}

}  // namespace procnets
