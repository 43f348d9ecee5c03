#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "procnets/config.hpp"
#include "procnets/dataio.hpp"
#include "procnets/loss.hpp"
#include "procnets/metrics.hpp"
#include "procnets/model.hpp"

namespace procnets {

struct Checkpoint {
  RunConfig config;
  ProcNetModel model;
  int epoch = 0;
  std::string rng_state;
};

// Fresh model with seeded initialization, ready to train.
Checkpoint make_checkpoint(const RunConfig& config);

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Full single-video pass with a fixed assignment batch: encode, propose,
// pool, teacher-forced decode, composite loss; optionally backpropagates into
// every parameter. Exposed for the gradient suite and the overfit harness.
LossReport video_loss(ProcNetModel& model, const Array2& features,
                      const std::vector<Segment>& gts,
                      const AssignmentBatch& batch, const LossWeights& weights,
                      const AblationFlags& ablation, bool accumulate_grads);

struct TrainLogEntry {
  int epoch = 0;
  double l_cla = 0.0;
  double l_reg = 0.0;
  double l_seq = 0.0;
  double total = 0.0;
  double val_jaccard = 0.0;  // percent
  double val_miou = 0.0;     // percent
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
  double best_val_jaccard = 0.0;
};

// Per-video gradient steps over the shuffled train split, one Adam update per
// video; validation Jaccard/mIoU per epoch; the best-validation parameters
// are restored into the checkpoint at the end. When out_dir is non-empty the
// run writes config.json, train_log.txt and checkpoint.pn there.
TrainResult train(Checkpoint& ck, const Dataset& data,
                  const std::string& out_dir);

// Ordered segment predictions with per-step emission probabilities.
// beam_override 0 uses the configured beam size.
std::vector<ScoredSegment> infer_video(const Checkpoint& ck,
                                       const Array2& features,
                                       int beam_override);

enum class Method { procnets_lstm, procnets_nms, uniform };

const char* method_name(Method method);
Method parse_method(const std::string& name);

// Uniform needs no checkpoint; the learned methods do.
EvalReport evaluate(const Checkpoint* ck, const Dataset& data, Split split,
                    Method method, int beam_override);

struct PermutationResult {
  EvalReport original;
  EvalReport permuted;
};

PermutationResult permutation_experiment(const Checkpoint& ck,
                                         const Dataset& data, Split split);

// JSON emission used by the CLI and the C API.
std::string eval_report_to_json(const EvalReport& report, Method method,
                                Split split, const RunConfig* config);
std::string permutation_to_json(const PermutationResult& result, Split split,
                                const RunConfig& config);
std::string predictions_to_json(
    const std::vector<std::pair<std::string, std::vector<ScoredSegment>>>& preds);
std::string dataset_stats_json(const Dataset& data,
                               const std::optional<Split>& split);

// Runs inference over a split, canonically ordered by video id.
std::vector<std::pair<std::string, std::vector<ScoredSegment>>> infer_split(
    const Checkpoint& ck, const Dataset& data, Split split, int beam_override);

}  // namespace procnets
