#include "procnets/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "procnets/errors.hpp"

namespace procnets {

Segment::Segment(int s, int e) : start(s), end(e) {
  if (s < 0 || e <= s) {
    throw Error(ErrorKind::invalid_argument,
                "invalid segment [" + std::to_string(s) + ", " +
                    std::to_string(e) + ")");
  }
}

std::vector<int> build_anchor_lengths(int min_len, int interval, int count) {
  if (min_len < 1 || min_len % 2 == 0) {
    throw Error(ErrorKind::config, "anchor min length must be odd and positive, got " +
                                       std::to_string(min_len));
  }
  if (interval % 2 != 0 || interval < 0) {
    throw Error(ErrorKind::config, "anchor interval must be even and non-negative, got " +
                                       std::to_string(interval));
  }
  if (count < 1) {
    throw Error(ErrorKind::config, "anchor count must be at least 1, got " +
                                       std::to_string(count));
  }
  std::vector<int> lengths(count);
  for (int k = 0; k < count; ++k) lengths[k] = min_len + k * interval;
  return lengths;
}

OffsetPair encode_offsets(const Anchor& anchor, const Segment& gt) {
  OffsetPair out;
  out.theta_c = (gt.center() - anchor.center) / anchor.length;
  out.theta_l = std::log(static_cast<double>(gt.length()) / anchor.length);
  return out;
}

std::pair<double, double> decode_center_length(const Anchor& anchor,
                                               const OffsetPair& offsets) {
  const double c = anchor.center + offsets.theta_c * anchor.length;
  const double l = anchor.length * std::exp(offsets.theta_l);
  return {c, l};
}

Segment decode_segment(const Anchor& anchor, const OffsetPair& offsets,
                       int num_frames) {
  const auto [c, l] = decode_center_length(anchor, offsets);
  int64_t start = std::llround(c - 0.5 * l);
  int64_t end = std::llround(c + 0.5 * l);
  start = std::clamp<int64_t>(start, 0, num_frames - 1);
  end = std::clamp<int64_t>(end, start + 1, num_frames);
  Segment seg;
  seg.start = static_cast<int>(start);
  seg.end = static_cast<int>(end);
  return seg;
}

std::pair<int64_t, int64_t> anchor_extent(const Anchor& anchor) {
  const int64_t start = anchor.center - (anchor.length - 1) / 2;
  return {start, start + anchor.length};
}

double interval_iou(int64_t s1, int64_t e1, int64_t s2, int64_t e2) {
  const int64_t inter =
      std::max<int64_t>(0, std::min(e1, e2) - std::max(s1, s2));
  if (inter == 0) return 0.0;
  const int64_t uni = (e1 - s1) + (e2 - s2) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const Segment& a, const Segment& b) {
  return interval_iou(a.start, a.end, b.start, b.end);
}

namespace {

// Partial Fisher-Yates: the first `take` entries of `pool` become a uniform
// sample without replacement.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T>& pool, size_t take,
                                          Rng& rng) {
  take = std::min(take, pool.size());
  for (size_t i = 0; i < take; ++i) {
    const size_t j =
        i + static_cast<size_t>(rng.below(static_cast<int64_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  return std::vector<T>(pool.begin(), pool.begin() + take);
}

}  // namespace

AssignmentBatch assign_training_samples(const std::vector<int>& anchor_lengths,
                                        int num_frames,
                                        const std::vector<Segment>& gts,
                                        double pos_thresh, double neg_thresh,
                                        int samples_per_class, Rng& rng) {
  if (pos_thresh <= neg_thresh) {
    throw Error(ErrorKind::config, "positive IoU threshold must exceed the negative one");
  }
  std::vector<PositiveSample> positives;
  std::vector<AnchorPlacement> negatives;
  for (int k = 0; k < static_cast<int>(anchor_lengths.size()); ++k) {
    Anchor anchor{0, anchor_lengths[k]};
    for (int t = 0; t < num_frames; ++t) {
      anchor.center = t;
      const auto [as, ae] = anchor_extent(anchor);
      double best = 0.0;
      int best_gt = -1;
      for (int g = 0; g < static_cast<int>(gts.size()); ++g) {
        const double v = interval_iou(as, ae, gts[g].start, gts[g].end);
        const bool wins =
            v > best || (v == best && best_gt >= 0 && v > 0.0 &&
                         gts[g].start < gts[best_gt].start);
        if (wins) {
          best = v;
          best_gt = g;
        }
      }
      if (best >= pos_thresh) {
        positives.push_back(
            {k, t, encode_offsets(anchor, gts[best_gt]), best_gt});
      } else if (best < neg_thresh) {
        negatives.push_back({k, t});
      }
    }
  }
  if (negatives.empty()) {
    throw Error(ErrorKind::training,
                "no negative anchor placements available for assignment");
  }
  AssignmentBatch batch;
  const size_t u = static_cast<size_t>(samples_per_class);
  batch.positives = sample_without_replacement(positives, u, rng);
  const size_t want_neg = 2 * u - batch.positives.size();
  batch.negatives = sample_without_replacement(negatives, want_neg, rng);
  return batch;
}

}  // namespace procnets
