#pragma once

#include <string>
#include <vector>

#include "procnets/anchors.hpp"

namespace procnets {

// Mean over ground-truth segments of the best intersection-over-prediction.
// Empty predictions score 0. Requires at least one ground-truth segment.
double jaccard_score(const std::vector<Segment>& preds,
                     const std::vector<Segment>& gts);

// Same with intersection over union.
double miou_score(const std::vector<Segment>& preds,
                  const std::vector<Segment>& gts);

struct Prf {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

// Greedy one-to-one matching by descending score: a prediction is a true
// positive when its IoU with some still-unmatched ground truth reaches tiou.
Prf prf_at_iou(const std::vector<ScoredSegment>& preds,
               const std::vector<Segment>& gts, double tiou);

struct VideoEval {
  std::string id;
  double jaccard = 0.0;   // percent
  double miou = 0.0;      // percent
  double recall = 0.0;    // percent
  double precision = 0.0; // percent
  double f1 = 0.0;        // percent
  int num_predictions = 0;
};

struct EvalReport {
  double jaccard = 0.0;
  double miou = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  std::vector<VideoEval> videos;
};

// Per-video values averaged into the corpus numbers, all as percentages.
EvalReport aggregate_eval(std::vector<VideoEval> videos);

}  // namespace procnets
