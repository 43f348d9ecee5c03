#pragma once

#include <cstdint>
#include <string>

#include "procnets/decoder.hpp"

namespace procnets {

// Every hyperparameter of a run. Serialized verbatim into run outputs so any
// result can be reproduced from its report.
struct RunConfig {
  int num_frames = 500;   // L
  int feature_dim = 512;  // D
  int hidden = 512;       // H, all recurrences
  int anchor_min_len = 3;
  int anchor_interval = 8;
  int anchor_count = 16;
  int pool_h = 8;
  int pool_w = 4;
  int samples_per_class = 100;  // U
  double learning_rate = 4e-5;
  double beta1 = 0.8;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double alpha_r = 1.0;
  double alpha_s = 1.0;
  int s_max = 16;
  int beam_size = 1;
  double nms_iou = 0.5;
  int n_uniform = 7;
  int n_eval_proposals = 10;
  double tp_iou = 0.5;
  double pos_iou = 0.8;
  double neg_iou = 0.2;
  int epochs = 10;
  uint64_t seed = 0;
  AblationFlags ablation;

  void validate() const;
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  AdamHyper adam() const {
    return AdamHyper{learning_rate, beta1, beta2, epsilon};
  }
};

}  // namespace procnets
