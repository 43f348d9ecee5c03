#pragma once

#include <vector>

#include "procnets/anchors.hpp"
#include "procnets/array.hpp"
#include "procnets/nn.hpp"
#include "procnets/proposal.hpp"

namespace procnets {

struct GridCell {
  double score = 0.0;
  int anchor_row = 0;
  int frame = 0;
  Segment segment;
};

// Max-pooled, column-flattened candidate set. Cell m lives at
// (row m % rows, col m / rows); the proposal vector holds the winning scores
// in the same order.
struct CandidateGrid {
  int rows = 0;
  int cols = 0;
  std::vector<GridCell> cells;
  std::vector<double> proposal_vector;

  int size() const { return static_cast<int>(cells.size()); }
};

// Pools the score map with an h x w kernel and matching stride. Each cell
// keeps its window's best-scoring placement (ties to smaller anchor row, then
// smaller frame) and the segment decoded from that placement's offsets.
CandidateGrid build_candidate_grid(const ProposalMap& map, int pool_h,
                                   int pool_w,
                                   const std::vector<int>& anchor_lengths,
                                   int num_frames);

// Max-IoU candidate for a ground-truth segment; ties go to the smaller flat
// index. When nothing overlaps, the candidate with the closest center wins.
int nearest_candidate(const Segment& gt, const CandidateGrid& grid);

// Sequential prediction over grid candidates: LSTM over steps whose input is
// the tuple (proposal vector, location embedding, segment content).
struct DecoderParams {
  LstmParams lstm;      // input 3M, hidden H
  ParamSlot out_w;      // (M+1) x H
  ParamSlot out_b;      // (M+1) x 1
  ParamSlot embedding;  // (M+1) x M; row M is the start token
  ParamSlot content_w;  // M x D
  ParamSlot content_b;  // M x 1
  int num_candidates = 0;  // M
  int hidden = 0;
  int feature_dim = 0;

  DecoderParams() = default;
  DecoderParams(int num_candidates_, int hidden_, int feature_dim_);
  void init(Rng& rng);

  int start_token() const { return num_candidates; }
  int end_token() const { return num_candidates; }
};

// Which thirds of the decoder input to blank out.
struct AblationFlags {
  bool drop_proposal_vec = false;
  bool drop_location_emb = false;
  bool drop_segment_content = false;
};

// Mean of the raw frame features over the segment extent.
std::vector<double> mean_pool(const Array2& features, const Segment& seg);

// Mean-pooled features reduced to the proposal-vector length.
std::vector<double> segment_content(const DecoderParams& p,
                                    const Array2& features, const Segment& seg);

// Embedding row for a candidate index, or for the start token when
// token == p.start_token().
std::vector<double> location_embedding(const DecoderParams& p, int token);

struct TeacherForcedStep {
  int target = 0;           // class index, end token on the last step
  int embedding_row = 0;    // row consumed by this step's input
  Segment content_segment;  // extent pooled for this step's input
  std::vector<double> pooled;
  std::vector<double> input;
  std::vector<double> hidden;
  std::vector<double> probs;
  LstmStepCache lstm;
};

struct TeacherForcedRun {
  std::vector<TeacherForcedStep> steps;
  std::vector<std::vector<double>> step_probs() const;
  std::vector<int> targets() const;
};

// Teacher forcing over the ground-truth sequence (sorted by start): step t
// consumes the embedding/content of ground-truth segment t-1 (start token and
// whole-video content at t=1) and is scored against target t; the final step
// targets the end token.
TeacherForcedRun sequence_forward_teacher_forced(
    const DecoderParams& p, const CandidateGrid& grid, const Array2& features,
    const std::vector<Segment>& gts, const std::vector<int>& gt_candidates,
    const AblationFlags& ablation);

// Backpropagates the per-step cross-entropy (scaled by loss_scale, typically
// alpha_s / num_steps) through the recurrence. dproposal_vector accumulates
// the gradient into the shared proposal vector input.
void sequence_backward_teacher_forced(DecoderParams& p,
                                      const TeacherForcedRun& run,
                                      double loss_scale,
                                      const AblationFlags& ablation,
                                      std::vector<double>& dproposal_vector);

struct Emission {
  int candidate = 0;
  double probability = 0.0;  // this step's softmax mass on the emitted class
  Segment segment;
};

// Beam search over candidate sequences scored by the sum of log
// probabilities. A hypothesis completes when it emits the end token or
// reaches s_max steps; emitted candidates are masked within a hypothesis.
// beam_size 1 is greedy argmax chaining.
std::vector<Emission> decode(const DecoderParams& p, const CandidateGrid& grid,
                             const Array2& features, int beam_size, int s_max,
                             const AblationFlags& ablation);

// Greedy score-descending selection with an IoU cutoff against already kept
// segments; at most n survivors, returned in start order.
std::vector<ScoredSegment> nms_select(std::vector<ScoredSegment> candidates,
                                      double iou_thresh, int n);

// n contiguous equal segments covering [0, num_frames); remainder frames go
// to the last segment.
std::vector<Segment> uniform_segments(int num_frames, int n);

}  // namespace procnets
