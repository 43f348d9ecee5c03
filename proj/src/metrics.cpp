#include "procnets/metrics.hpp"

#include <algorithm>

#include "procnets/errors.hpp"

namespace procnets {

namespace {

int64_t intersection(const Segment& a, const Segment& b) {
  return std::max<int64_t>(
      0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

void require_gts(const std::vector<Segment>& gts) {
  if (gts.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "metric requires at least one ground-truth segment");
  }
}

}  // namespace

double jaccard_score(const std::vector<Segment>& preds,
                     const std::vector<Segment>& gts) {
  require_gts(gts);
  if (preds.empty()) return 0.0;
  double total = 0.0;
  for (const Segment& gt : gts) {
    double best = 0.0;
    for (const Segment& pred : preds) {
      best = std::max(best, static_cast<double>(intersection(gt, pred)) /
                                static_cast<double>(pred.length()));
    }
    total += best;
  }
  return total / static_cast<double>(gts.size());
}

double miou_score(const std::vector<Segment>& preds,
                  const std::vector<Segment>& gts) {
  require_gts(gts);
  if (preds.empty()) return 0.0;
  double total = 0.0;
  for (const Segment& gt : gts) {
    double best = 0.0;
    for (const Segment& pred : preds) best = std::max(best, iou(gt, pred));
    total += best;
  }
  return total / static_cast<double>(gts.size());
}

Prf prf_at_iou(const std::vector<ScoredSegment>& preds,
               const std::vector<Segment>& gts, double tiou) {
  require_gts(gts);
  Prf out;
  if (preds.empty()) return out;
  std::vector<ScoredSegment> ordered = preds;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ScoredSegment& a, const ScoredSegment& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.segment.start != b.segment.start) {
                       return a.segment.start < b.segment.start;
                     }
                     return a.segment.end < b.segment.end;
                   });
  std::vector<bool> matched(gts.size(), false);
  int tp = 0;
  for (const ScoredSegment& pred : ordered) {
    int best_gt = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (matched[g]) continue;
      const double v = iou(pred.segment, gts[g]);
      if (v >= tiou && v > best_iou) {
        best_iou = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      matched[best_gt] = true;
      ++tp;
    }
  }
  out.recall = static_cast<double>(tp) / static_cast<double>(gts.size());
  out.precision = static_cast<double>(tp) / static_cast<double>(preds.size());
  out.f1 = (out.recall + out.precision) > 0.0
               ? 2.0 * out.recall * out.precision / (out.recall + out.precision)
               : 0.0;
  return out;
}

EvalReport aggregate_eval(std::vector<VideoEval> videos) {
  EvalReport report;
  report.videos = std::move(videos);
  if (report.videos.empty()) return report;
  for (const VideoEval& v : report.videos) {
    report.jaccard += v.jaccard;
    report.miou += v.miou;
    report.recall += v.recall;
    report.precision += v.precision;
    report.f1 += v.f1;
  }
  const double inv = 1.0 / static_cast<double>(report.videos.size());
  report.jaccard *= inv;
  report.miou *= inv;
  report.recall *= inv;
  report.precision *= inv;
  report.f1 *= inv;
  return report;
}

}  // namespace procnets
