#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "procnets/errors.hpp"
#include "procnets/rng.hpp"

namespace procnets {

// Half-open frame interval [start, end).
struct Segment {
  int start = 0;
  int end = 1;

  Segment() = default;
  Segment(int s, int e);  // throws on s < 0 or e <= s

  int length() const { return end - start; }
  double center() const { return 0.5 * (start + end); }
  bool operator==(const Segment&) const = default;
};

struct ScoredSegment {
  Segment segment;
  double score = 0.0;
};

// A fixed-length candidate interval centered on a frame.
struct Anchor {
  int center = 0;
  int length = 1;
};

// Relative center shift and log length ratio between an anchor and a target.
struct OffsetPair {
  double theta_c = 0.0;
  double theta_l = 0.0;
};

// Arithmetic progression of odd anchor lengths. min_len must be odd and
// interval even so every produced length stays odd.
std::vector<int> build_anchor_lengths(int min_len, int interval, int count);

OffsetPair encode_offsets(const Anchor& anchor, const Segment& gt);

// Continuous (center, length) the offsets map the anchor to, before any
// rounding or clipping.
std::pair<double, double> decode_center_length(const Anchor& anchor,
                                               const OffsetPair& offsets);

// Integer decode: round the continuous endpoints, clip to [0, num_frames),
// keep at least one frame.
Segment decode_segment(const Anchor& anchor, const OffsetPair& offsets,
                       int num_frames);

// Integer extent [start, end) of the raw anchor; may stick out of the video.
std::pair<int64_t, int64_t> anchor_extent(const Anchor& anchor);

double interval_iou(int64_t s1, int64_t e1, int64_t s2, int64_t e2);
double iou(const Segment& a, const Segment& b);

struct AnchorPlacement {
  int anchor_row = 0;  // index into the anchor length list
  int frame = 0;       // anchor center
};

struct PositiveSample {
  int anchor_row = 0;
  int frame = 0;
  OffsetPair target;
  int gt_index = 0;
};

struct AssignmentBatch {
  std::vector<PositiveSample> positives;
  std::vector<AnchorPlacement> negatives;
};

// Labels every (length, center) placement against the ground truth: positive
// when IoU with some gt reaches pos_thresh (paired with the max-IoU gt,
// earlier start on ties), negative when IoU with every gt stays below
// neg_thresh, ignored otherwise. Samples up to samples_per_class positives
// and tops the batch up with negatives to 2*samples_per_class.
AssignmentBatch assign_training_samples(const std::vector<int>& anchor_lengths,
                                        int num_frames,
                                        const std::vector<Segment>& gts,
                                        double pos_thresh, double neg_thresh,
                                        int samples_per_class, Rng& rng);

}  // namespace procnets
