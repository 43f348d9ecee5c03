#include "doctest.h"
#include "procnets/encoder.hpp"

using namespace procnets;

namespace {

Array2 random_array(int rows, int cols, Rng& rng, double scale = 0.5) {
  Array2 out(rows, cols);
  for (double& v : out.data) v = rng.uniform(-scale, scale);
  return out;
}

}  // namespace

TEST_CASE("encoder output keeps the input width") {
  Rng rng(31);
  SUBCASE("desk scale") {
    EncoderParams p(16, 8);
    p.init(rng);
    CHECK(p.reduce_w.value.cols == 32);  // D + 2H
    Array2 x = random_array(20, 16, rng);
    const Array2 out = encode_context(p, x, nullptr);
    CHECK(out.rows == 20);
    CHECK(out.cols == 16);
  }
  SUBCASE("paper-width reduction") {
    EncoderParams p(512, 512);
    CHECK(p.reduce_w.value.cols == 1536);
    CHECK(p.reduce_w.value.rows == 512);
  }
}

TEST_CASE("encoder with zero parameters returns zeros") {
  EncoderParams p(6, 4);
  Rng rng(33);
  Array2 x = random_array(9, 6, rng);
  const Array2 out = encode_context(p, x, nullptr);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("context features depend on every frame") {
  Rng rng(37);
  EncoderParams p(5, 4);
  p.init(rng);
  Array2 x = random_array(12, 5, rng);
  const Array2 base = encode_context(p, x, nullptr);
  x.at(11, 2) += 0.5;  // perturb the last frame
  const Array2 moved = encode_context(p, x, nullptr);
  double delta = 0.0;
  for (int c = 0; c < 5; ++c) delta += std::abs(moved.at(0, c) - base.at(0, c));
  CHECK(delta > 1e-8);
}

TEST_CASE("encoder gradient matches finite differences") {
  Rng rng(41);
  EncoderParams p(4, 3);
  p.init(rng);
  Array2 x = random_array(6, 4, rng);
  Array2 weights = random_array(6, 4, rng);

  auto loss_fn = [&]() {
    const Array2 out = encode_context(p, x, nullptr);
    double loss = 0.0;
    for (int t = 0; t < out.rows; ++t) {
      for (int c = 0; c < out.cols; ++c) loss += weights.at(t, c) * out.at(t, c);
    }
    return loss;
  };

  EncoderCache cache;
  encode_context(p, x, &cache);
  encode_context_backward(p, cache, weights);
  const auto report = grad_check(
      loss_fn,
      {&p.fwd.wx, &p.fwd.wh, &p.fwd.b, &p.bwd.wx, &p.bwd.wh, &p.bwd.b,
       &p.reduce_w, &p.reduce_b},
      1e-5, 1e-4);
  CHECK(report.passed);
}
