#include <cmath>
#include <numbers>

#include "doctest.h"
#include "procnets/anchors.hpp"
#include "procnets/proposal.hpp"

using namespace procnets;

namespace {

Array2 random_array(int rows, int cols, Rng& rng, double scale = 0.5) {
  Array2 out(rows, cols);
  for (double& v : out.data) v = rng.uniform(-scale, scale);
  return out;
}

}  // namespace

TEST_CASE("zero parameters give scores 0.5 and offsets 0") {
  ProposalHeadParams head({3, 11}, 4);
  Rng rng(51);
  Array2 context = random_array(8, 4, rng);
  const ProposalMap map = propose(head, context);
  CHECK(map.scores.rows == 2);
  CHECK(map.scores.cols == 8);
  for (double v : map.scores.data) CHECK(v == 0.5);
  for (double v : map.offsets_c.data) CHECK(v == 0.0);
  for (double v : map.offsets_l.data) CHECK(v == 0.0);
}

TEST_CASE("map shapes follow the anchor count and frame count") {
  const auto lengths = build_anchor_lengths(3, 8, 16);
  ProposalHeadParams head(lengths, 4);
  Rng rng(53);
  head.init(rng);
  Array2 context = random_array(500, 4, rng);
  const ProposalMap map = propose(head, context);
  CHECK(map.scores.rows == 16);
  CHECK(map.scores.cols == 500);
  CHECK(map.offsets_c.rows == 16);
  CHECK(map.offsets_l.cols == 500);
}

TEST_CASE("activations stay strictly inside their ranges") {
  const auto lengths = build_anchor_lengths(3, 4, 4);
  ProposalHeadParams head(lengths, 6);
  Rng rng(57);
  head.init(rng);
  Array2 context = random_array(32, 6, rng, 2.0);
  const ProposalMap map = propose(head, context);
  for (double v : map.scores.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  for (double v : map.offsets_c.data) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
  // Bounded log-ratio keeps decoded lengths within (l/e, l*e).
  for (int k = 0; k < map.offsets_l.rows; ++k) {
    for (int t = 0; t < map.offsets_l.cols; ++t) {
      const auto [c, l] = decode_center_length(
          Anchor{t, lengths[k]}, OffsetPair{map.offsets_c.at(k, t),
                                            map.offsets_l.at(k, t)});
      CHECK(l > lengths[k] / std::numbers::e);
      CHECK(l < lengths[k] * std::numbers::e);
    }
  }
}

TEST_CASE("receptive field is limited to the kernel radius") {
  const std::vector<int> lengths = {3, 11};
  ProposalHeadParams head(lengths, 4);
  Rng rng(59);
  head.init(rng);
  Array2 context = random_array(16, 4, rng);
  const ProposalMap base = propose(head, context);
  context.at(9, 1) += 1.0;
  const ProposalMap moved = propose(head, context);
  for (int k = 0; k < 2; ++k) {
    const int radius = (lengths[k] - 1) / 2;
    for (int t = 0; t < 16; ++t) {
      const bool in_range = std::abs(t - 9) <= radius;
      const bool changed =
          std::abs(moved.scores.at(k, t) - base.scores.at(k, t)) > 0.0;
      if (!in_range) CHECK_FALSE(changed);
    }
    // The centered frame itself always reacts.
    CHECK(std::abs(moved.scores.at(k, 9) - base.scores.at(k, 9)) > 0.0);
  }
}

TEST_CASE("frame zero of a width-11 row uses five padded frames") {
  // With all-ones kernel weights, out[0] counts only the in-range frames.
  ProposalHeadParams head({11}, 1);
  for (double& v : head.convs[0].w.value.data) v = 1.0;
  Array2 context(8, 1, 1.0);
  const ProposalMap map = propose(head, context);
  // At frame 0 the kernel covers positions -5..5, so 6 real frames.
  CHECK(map.scores.at(0, 0) == doctest::Approx(sigmoid(6.0)));
  // At frame 5 it covers 0..10, clipped to the 8 real frames.
  CHECK(map.scores.at(0, 5) == doctest::Approx(sigmoid(8.0)));
}

TEST_CASE("mismatched conv parameters are rejected") {
  ProposalHeadParams head({3, 11}, 4);
  head.anchor_lengths = {3, 13};  // out of sync with conv kernels
  Rng rng(61);
  Array2 context = random_array(8, 4, rng);
  CHECK_THROWS_AS(propose(head, context), Error);
}

TEST_CASE("proposal head gradient matches finite differences") {
  const std::vector<int> lengths = {3, 5};
  ProposalHeadParams head(lengths, 3);
  Rng rng(63);
  head.init(rng);
  ParamSlot context_slot("context", 7, 3);
  context_slot.value = random_array(7, 3, rng);
  Array2 ws = random_array(2, 7, rng);
  Array2 wc = random_array(2, 7, rng);
  Array2 wl = random_array(2, 7, rng);

  auto loss_fn = [&]() {
    const ProposalMap map = propose(head, context_slot.value);
    double loss = 0.0;
    for (int k = 0; k < 2; ++k) {
      for (int t = 0; t < 7; ++t) {
        loss += ws.at(k, t) * map.scores.at(k, t) +
                wc.at(k, t) * map.offsets_c.at(k, t) +
                wl.at(k, t) * map.offsets_l.at(k, t);
      }
    }
    return loss;
  };

  const ProposalMap map = propose(head, context_slot.value);
  propose_backward(head, context_slot.value, map, ws, wc, wl,
                   &context_slot.grad);
  const auto report = grad_check(
      loss_fn,
      {&head.convs[0].w, &head.convs[0].b, &head.convs[1].w, &head.convs[1].b,
       &context_slot},
      1e-5, 1e-4);
  CHECK(report.passed);
}
