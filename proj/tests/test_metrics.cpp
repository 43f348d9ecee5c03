#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "procnets/metrics.hpp"
#include "procnets/rng.hpp"

using namespace procnets;

// Enumeration oracle: builds the full pairwise overlap tables first and only
// then reduces, independent of the shipped implementations.
namespace oracle {

double overlap(const Segment& a, const Segment& b) {
  return std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

double jaccard(const std::vector<Segment>& preds,
               const std::vector<Segment>& gts) {
  if (preds.empty()) return 0.0;
  std::vector<std::vector<double>> ratio(gts.size(),
                                         std::vector<double>(preds.size()));
  for (size_t g = 0; g < gts.size(); ++g) {
    for (size_t p = 0; p < preds.size(); ++p) {
      ratio[g][p] = overlap(gts[g], preds[p]) / preds[p].length();
    }
  }
  double total = 0.0;
  for (const auto& row : ratio) {
    total += *std::max_element(row.begin(), row.end());
  }
  return total / gts.size();
}

double miou(const std::vector<Segment>& preds, const std::vector<Segment>& gts) {
  if (preds.empty()) return 0.0;
  std::vector<std::vector<double>> table(gts.size(),
                                         std::vector<double>(preds.size()));
  for (size_t g = 0; g < gts.size(); ++g) {
    for (size_t p = 0; p < preds.size(); ++p) {
      const double inter = overlap(gts[g], preds[p]);
      table[g][p] = inter / (gts[g].length() + preds[p].length() - inter);
    }
  }
  double total = 0.0;
  for (const auto& row : table) {
    total += *std::max_element(row.begin(), row.end());
  }
  return total / gts.size();
}

Prf prf(std::vector<ScoredSegment> preds, const std::vector<Segment>& gts,
        double tiou) {
  Prf out;
  if (preds.empty()) return out;
  std::stable_sort(preds.begin(), preds.end(),
                   [](const ScoredSegment& a, const ScoredSegment& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.segment.start != b.segment.start) {
                       return a.segment.start < b.segment.start;
                     }
                     return a.segment.end < b.segment.end;
                   });
  std::vector<std::vector<double>> table(preds.size(),
                                         std::vector<double>(gts.size()));
  for (size_t p = 0; p < preds.size(); ++p) {
    for (size_t g = 0; g < gts.size(); ++g) {
      const double inter = overlap(preds[p].segment, gts[g]);
      table[p][g] =
          inter / (preds[p].segment.length() + gts[g].length() - inter);
    }
  }
  std::vector<bool> taken(gts.size(), false);
  int tp = 0;
  for (size_t p = 0; p < preds.size(); ++p) {
    int pick = -1;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || table[p][g] < tiou) continue;
      if (pick < 0 || table[p][g] > table[p][pick]) pick = static_cast<int>(g);
    }
    if (pick >= 0) {
      taken[pick] = true;
      ++tp;
    }
  }
  out.recall = double(tp) / gts.size();
  out.precision = double(tp) / preds.size();
  out.f1 = (out.recall + out.precision) > 0
               ? 2 * out.recall * out.precision / (out.recall + out.precision)
               : 0.0;
  return out;
}

}  // namespace oracle

namespace {

std::vector<Segment> random_segments(Rng& rng, int max_count, int frames) {
  const int count = 1 + static_cast<int>(rng.below(max_count));
  std::vector<Segment> out;
  for (int i = 0; i < count; ++i) {
    const int start = static_cast<int>(rng.below(frames - 1));
    const int len = 1 + static_cast<int>(rng.below(std::min(12, frames - start)));
    out.emplace_back(start, start + len);
  }
  return out;
}

}  // namespace

TEST_CASE("jaccard hand values") {
  const std::vector<Segment> gts = {Segment(10, 20)};
  CHECK(jaccard_score(gts, gts) == doctest::Approx(1.0));
  const std::vector<Segment> preds = {Segment(10, 30), Segment(0, 5)};
  CHECK(jaccard_score(preds, gts) == doctest::Approx(0.5));
  // Predictions contained in a whole-video ground truth are perfect.
  const std::vector<Segment> whole = {Segment(0, 70)};
  const std::vector<Segment> inside = {Segment(5, 12), Segment(30, 44)};
  CHECK(jaccard_score(inside, whole) == doctest::Approx(1.0));
  CHECK(jaccard_score({}, gts) == 0.0);
  CHECK_THROWS_AS(jaccard_score(preds, {}), Error);
}

TEST_CASE("miou hand values") {
  const std::vector<Segment> gts = {Segment(10, 20)};
  CHECK(miou_score(gts, gts) == doctest::Approx(1.0));
  // Union of [10,20) and [10,30) covers [10,30): 10 / 20.
  const std::vector<Segment> preds = {Segment(10, 30), Segment(0, 5)};
  CHECK(miou_score(preds, gts) == doctest::Approx(10.0 / 20.0));
  // Uniform七-way split against a whole-video ground truth.
  const std::vector<Segment> whole = {Segment(0, 70)};
  std::vector<Segment> uniform;
  for (int i = 0; i < 7; ++i) uniform.emplace_back(10 * i, 10 * i + 10);
  CHECK(miou_score(uniform, whole) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("prf hand values") {
  const std::vector<Segment> gts = {Segment(0, 10), Segment(20, 30)};
  SUBCASE("ground truth padded with junk recalls everything") {
    const std::vector<ScoredSegment> preds = {{Segment(0, 10), 0.9},
                                              {Segment(20, 30), 0.8},
                                              {Segment(50, 60), 0.7},
                                              {Segment(70, 80), 0.6}};
    const Prf prf = prf_at_iou(preds, gts, 0.5);
    CHECK(prf.recall == doctest::Approx(1.0));
    CHECK(prf.precision == doctest::Approx(0.5));
  }
  SUBCASE("0.9 IoU counts as a true positive") {
    const std::vector<ScoredSegment> preds = {{Segment(0, 9), 0.9},
                                              {Segment(50, 60), 0.8}};
    CHECK(iou(Segment(0, 9), Segment(0, 10)) == doctest::Approx(0.9));
    const Prf prf = prf_at_iou(preds, gts, 0.5);
    CHECK(prf.recall == doctest::Approx(0.5));
    CHECK(prf.precision == doctest::Approx(0.5));
    CHECK(prf.f1 == doctest::Approx(0.5));
  }
  SUBCASE("no overlap at all") {
    const std::vector<ScoredSegment> preds = {{Segment(40, 45), 0.9}};
    const Prf prf = prf_at_iou(preds, gts, 0.5);
    CHECK(prf.recall == 0.0);
    CHECK(prf.precision == 0.0);
    CHECK(prf.f1 == 0.0);
  }
}

TEST_CASE("metrics agree with the enumeration oracle") {
  Rng rng(202);
  for (int trial = 0; trial < 1000; ++trial) {
    const int frames = 40 + static_cast<int>(rng.below(60));
    const auto gts = random_segments(rng, 8, frames);
    const auto pred_segments = random_segments(rng, 8, frames);
    std::vector<ScoredSegment> preds;
    for (const Segment& s : pred_segments) {
      preds.push_back({s, rng.uniform()});
    }

    const double jac = jaccard_score(pred_segments, gts);
    const double mio = miou_score(pred_segments, gts);
    CHECK(std::abs(jac - oracle::jaccard(pred_segments, gts)) <= 1e-12);
    CHECK(std::abs(mio - oracle::miou(pred_segments, gts)) <= 1e-12);
    CHECK(jac >= mio - 1e-12);

    const Prf mine = prf_at_iou(preds, gts, 0.5);
    const Prf ref = oracle::prf(preds, gts, 0.5);
    CHECK(std::abs(mine.recall - ref.recall) <= 1e-12);
    CHECK(std::abs(mine.precision - ref.precision) <= 1e-12);
    CHECK(std::abs(mine.f1 - ref.f1) <= 1e-12);
  }
}

TEST_CASE("metrics ignore prediction order") {
  Rng rng(203);
  const auto gts = random_segments(rng, 5, 80);
  auto preds = random_segments(rng, 6, 80);
  const double jac = jaccard_score(preds, gts);
  const double mio = miou_score(preds, gts);
  std::vector<ScoredSegment> scored;
  for (size_t i = 0; i < preds.size(); ++i) {
    scored.push_back({preds[i], 0.1 * static_cast<double>(i + 1)});
  }
  const Prf prf = prf_at_iou(scored, gts, 0.5);

  std::reverse(preds.begin(), preds.end());
  std::reverse(scored.begin(), scored.end());
  CHECK(jaccard_score(preds, gts) == doctest::Approx(jac).epsilon(1e-15));
  CHECK(miou_score(preds, gts) == doctest::Approx(mio).epsilon(1e-15));
  const Prf prf2 = prf_at_iou(scored, gts, 0.5);
  CHECK(prf2.recall == doctest::Approx(prf.recall).epsilon(1e-15));
  CHECK(prf2.precision == doctest::Approx(prf.precision).epsilon(1e-15));
}

TEST_CASE("aggregation averages per-video percentages") {
  std::vector<VideoEval> videos(2);
  videos[0].id = "a";
  videos[0].jaccard = 80.0;
  videos[0].miou = 40.0;
  videos[1].id = "b";
  videos[1].jaccard = 60.0;
  videos[1].miou = 20.0;
  const EvalReport report = aggregate_eval(videos);
  CHECK(report.jaccard == doctest::Approx(70.0));
  CHECK(report.miou == doctest::Approx(30.0));
  CHECK(report.videos.size() == 2);
}
