#include <cmath>
#include <vector>

#include "doctest.h"
#include "procnets/nn.hpp"

using namespace procnets;

namespace {

Array2 random_array(int rows, int cols, Rng& rng, double scale = 0.5) {
  Array2 out(rows, cols);
  for (double& v : out.data) v = rng.uniform(-scale, scale);
  return out;
}

}  // namespace

TEST_CASE("affine basic cases") {
  Array2 w(2, 2);
  Array2 b(2, 1);
  std::vector<double> x = {1.0, 2.0};
  std::vector<double> y(2);

  affine(w, b, x, y);  // zero weights
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);

  w.at(0, 0) = 1.0;
  w.at(1, 1) = 1.0;
  affine(w, b, x, y);  // identity
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(2.0));

  w.at(0, 0) = 1.0;
  w.at(0, 1) = 1.0;
  w.at(1, 0) = 0.0;
  w.at(1, 1) = 2.0;
  b.data = {1.0, 0.0};
  x = {3.0, 4.0};
  affine(w, b, x, y);
  CHECK(y[0] == doctest::Approx(8.0));
  CHECK(y[1] == doctest::Approx(8.0));
}

TEST_CASE("affine rejects mismatched shapes") {
  Array2 w(2, 3);
  Array2 b(2, 1);
  std::vector<double> x = {1.0, 2.0};  // needs 3
  std::vector<double> y(2);
  CHECK_THROWS_WITH_AS(affine(w, b, x, y),
                       doctest::Contains("2x3"), Error);
}

TEST_CASE("lstm zero parameters give zero state") {
  LstmParams p("p", 3, 4);
  std::vector<double> x = {0.3, -0.2, 0.9};
  std::vector<double> h(4, 0.0), c(4, 0.0), h_out(4), c_out(4);
  lstm_step(p, x, h, c, h_out, c_out, nullptr);
  for (double v : h_out) CHECK(v == 0.0);
  for (double v : c_out) CHECK(v == 0.0);
}

TEST_CASE("lstm hidden state stays inside (-1, 1)") {
  Rng rng(42);
  LstmParams p("p", 4, 6);
  p.wx.value = random_array(24, 4, rng, 3.0);
  p.wh.value = random_array(24, 6, rng, 3.0);
  p.b.value = random_array(24, 1, rng, 3.0);
  std::vector<double> h(6, 0.0), c(6, 0.0), h_out(6), c_out(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.uniform(-5.0, 5.0);
    lstm_step(p, x, h, c, h_out, c_out, nullptr);
    h = h_out;
    c = c_out;
    for (double v : h) {
      CHECK(v > -1.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("lstm single-step gradient matches finite differences") {
  Rng rng(7);
  LstmParams p("p", 3, 4);
  p.init(rng);
  p.b.value = random_array(16, 1, rng, 0.3);
  ParamSlot x_slot("x", 3, 1);
  x_slot.value = random_array(3, 1, rng);
  const std::vector<double> h0(4, 0.1), c0(4, -0.2);
  const std::vector<double> weight_h = {0.7, -0.3, 0.5, 0.2};
  const std::vector<double> weight_c = {-0.4, 0.6, 0.1, -0.9};

  auto loss_fn = [&]() {
    std::vector<double> h(4), c(4);
    lstm_step(p, x_slot.value.data, h0, c0, h, c, nullptr);
    double loss = 0.0;
    for (int i = 0; i < 4; ++i) loss += weight_h[i] * h[i] + weight_c[i] * c[i];
    return loss;
  };

  LstmStepCache cache;
  std::vector<double> h(4), c(4);
  lstm_step(p, x_slot.value.data, h0, c0, h, c, &cache);
  std::vector<double> dh_prev(4), dc_prev(4);
  lstm_step_backward(p, cache, weight_h, weight_c, dh_prev, dc_prev,
                     x_slot.grad.data);

  const auto report = grad_check(
      loss_fn, {&p.wx, &p.wh, &p.b, &x_slot}, 1e-5, 1e-4);
  CHECK(report.passed);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("bilstm single frame sees itself from both sides") {
  Rng rng(3);
  LstmParams fwd("f", 3, 4), bwd("b", 3, 4);
  fwd.init(rng);
  bwd.init(rng);
  Array2 x = random_array(1, 3, rng);
  Array2 out = bilstm(fwd, bwd, x, nullptr);
  CHECK(out.rows == 1);
  CHECK(out.cols == 8);

  std::vector<double> h0(4, 0.0), c0(4, 0.0), hf(4), cf(4), hb(4), cb(4);
  lstm_step(fwd, std::span<const double>(x.row(0), 3), h0, c0, hf, cf, nullptr);
  lstm_step(bwd, std::span<const double>(x.row(0), 3), h0, c0, hb, cb, nullptr);
  for (int j = 0; j < 4; ++j) {
    CHECK(out.at(0, j) == doctest::Approx(hf[j]));
    CHECK(out.at(0, 4 + j) == doctest::Approx(hb[j]));
  }
}

TEST_CASE("bilstm time reversal swaps the two halves") {
  Rng rng(5);
  LstmParams fwd("f", 3, 4), bwd("b", 3, 4);
  fwd.init(rng);
  bwd.init(rng);
  Array2 x = random_array(6, 3, rng);
  Array2 reversed(6, 3);
  for (int t = 0; t < 6; ++t) {
    std::copy(x.row(5 - t), x.row(5 - t) + 3, reversed.row(t));
  }
  // Swap the two directions' parameters for the reversed input.
  Array2 a = bilstm(fwd, bwd, x, nullptr);
  Array2 b = bilstm(bwd, fwd, reversed, nullptr);
  for (int t = 0; t < 6; ++t) {
    for (int j = 0; j < 4; ++j) {
      CHECK(a.at(t, j) == doctest::Approx(b.at(5 - t, 4 + j)));
      CHECK(a.at(t, 4 + j) == doctest::Approx(b.at(5 - t, j)));
    }
  }
}

TEST_CASE("bilstm output shape at desk scale") {
  Rng rng(11);
  LstmParams fwd("f", 16, 8), bwd("b", 16, 8);
  fwd.init(rng);
  bwd.init(rng);
  Array2 x = random_array(64, 16, rng);
  Array2 out = bilstm(fwd, bwd, x, nullptr);
  CHECK(out.rows == 64);
  CHECK(out.cols == 16);
}

TEST_CASE("bilstm rejects empty input") {
  LstmParams fwd("f", 3, 4), bwd("b", 3, 4);
  Array2 x(0, 3);
  CHECK_THROWS_AS(bilstm(fwd, bwd, x, nullptr), Error);
}

TEST_CASE("bilstm gradient matches finite differences") {
  Rng rng(13);
  LstmParams fwd("f", 3, 2), bwd("b", 3, 2);
  fwd.init(rng);
  bwd.init(rng);
  ParamSlot x_slot("x", 5, 3);
  x_slot.value = random_array(5, 3, rng);
  Array2 weights = random_array(5, 4, rng);

  auto loss_fn = [&]() {
    Array2 out = bilstm(fwd, bwd, x_slot.value, nullptr);
    double loss = 0.0;
    for (int t = 0; t < 5; ++t) {
      for (int j = 0; j < 4; ++j) loss += weights.at(t, j) * out.at(t, j);
    }
    return loss;
  };

  BilstmCache cache;
  bilstm(fwd, bwd, x_slot.value, &cache);
  bilstm_backward(fwd, bwd, weights, cache, &x_slot.grad);
  const auto report = grad_check(
      loss_fn,
      {&fwd.wx, &fwd.wh, &fwd.b, &bwd.wx, &bwd.wh, &bwd.b, &x_slot}, 1e-5,
      1e-4);
  CHECK(report.passed);
}

TEST_CASE("temporal conv zero weights and identity kernel") {
  ConvParams p("c", 3, 4);
  Rng rng(17);
  Array2 input = random_array(8, 4, rng);
  Array2 out = temporal_conv(p, input);
  for (double v : out.data) CHECK(v == 0.0);

  // Centered delta on channel 0 copies input feature channel 0.
  p.w.value.at(0, 1 * 4 + 0) = 1.0;
  out = temporal_conv(p, input);
  for (int t = 0; t < 8; ++t) {
    CHECK(out.at(t, 0) == doctest::Approx(input.at(t, 0)));
  }
}

TEST_CASE("temporal conv rejects even kernels") {
  CHECK_THROWS_AS(ConvParams("c", 4, 2), Error);
}

TEST_CASE("temporal conv gradient matches finite differences") {
  Rng rng(19);
  ConvParams p("c", 5, 4);
  p.init(rng);
  p.b.value = random_array(3, 1, rng, 0.2);
  ParamSlot x_slot("x", 8, 4);
  x_slot.value = random_array(8, 4, rng);
  Array2 weights = random_array(8, 3, rng);

  auto loss_fn = [&]() {
    Array2 out = temporal_conv(p, x_slot.value);
    double loss = 0.0;
    for (int t = 0; t < 8; ++t) {
      for (int ch = 0; ch < 3; ++ch) loss += weights.at(t, ch) * out.at(t, ch);
    }
    return loss;
  };

  temporal_conv_backward(p, x_slot.value, weights, &x_slot.grad);
  const auto report = grad_check(loss_fn, {&p.w, &p.b, &x_slot}, 1e-5, 1e-4);
  CHECK(report.passed);
}

TEST_CASE("loss primitives analytic values") {
  CHECK(bce(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(bce(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  // Saturated scores are clamped instead of producing infinities.
  CHECK(std::isfinite(bce(0.0, 1)));
  CHECK(std::isfinite(bce(1.0, 0)));

  const std::vector<double> pred1 = {0.5, 0.5};
  const std::vector<double> target0 = {0.0, 0.0};
  CHECK(smooth_l1(pred1, target0) == doctest::Approx(0.125));
  const std::vector<double> pred2 = {2.0, 2.0};
  CHECK(smooth_l1(pred2, target0) == doctest::Approx(1.5));

  const std::vector<double> uniform_logits(7, 0.37);
  for (int idx = 0; idx < 7; ++idx) {
    CHECK(softmax_ce(uniform_logits, idx, nullptr) ==
          doctest::Approx(std::log(7.0)).epsilon(1e-12));
  }
}

TEST_CASE("softmax produces a distribution") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(9);
    for (double& v : logits) v = rng.uniform(-30.0, 30.0);
    std::vector<double> probs(9);
    softmax(logits, probs);
    double sum = 0.0;
    for (double v : probs) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("adam first step moves by about the learning rate") {
  ParamSlot slot("w", 2, 2);
  slot.value.data = {1.0, -2.0, 3.0, 0.5};
  slot.grad.data = {0.4, -0.4, 0.4, 0.4};
  AdamHyper hyper;
  hyper.learning_rate = 0.01;
  const auto before = slot.value.data;
  adam_step(slot, hyper);
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(std::abs(slot.value.data[i] - before[i]) ==
          doctest::Approx(hyper.learning_rate).epsilon(1e-4));
  }
  // Gradient is cleared afterwards.
  for (double g : slot.grad.data) CHECK(g == 0.0);
}

TEST_CASE("adam with zero gradient leaves values unchanged") {
  ParamSlot slot("w", 1, 3);
  slot.value.data = {1.0, 2.0, 3.0};
  AdamHyper hyper;
  adam_step(slot, hyper);
  CHECK(slot.value.data == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("adam two steps shrink a quadratic") {
  ParamSlot slot("w", 1, 1);
  slot.value.data = {1.0};
  AdamHyper hyper;
  hyper.learning_rate = 0.1;
  for (int i = 0; i < 2; ++i) {
    slot.grad.data[0] = 2.0 * slot.value.data[0];
    adam_step(slot, hyper);
  }
  CHECK(slot.value.data[0] * slot.value.data[0] < 1.0);
}

TEST_CASE("adam rejects non-finite gradients by name") {
  ParamSlot slot("decoder.out.w", 1, 1);
  slot.grad.data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(slot, AdamHyper{}),
                       doctest::Contains("decoder.out.w"), Error);
}

TEST_CASE("grad_check is exact for quadratics and flags corrupted backward") {
  Rng rng(29);
  ParamSlot w("w", 3, 2);
  w.value = random_array(3, 2, rng);
  ParamSlot b("b", 3, 1);
  b.value = random_array(3, 1, rng);
  const std::vector<double> x = {0.7, -1.3};

  auto loss_fn = [&]() {
    std::vector<double> y(3);
    affine(w.value, b.value, x, y);
    double loss = 0.0;
    for (double v : y) loss += 0.5 * v * v;
    return loss;
  };

  std::vector<double> y(3);
  affine(w.value, b.value, x, y);
  affine_backward(w.value, x, y, &w.grad, &b.grad, std::span<double>());
  auto report = grad_check(loss_fn, {&w, &b}, 1e-5, 1e-8);
  CHECK(report.passed);
  CHECK(report.max_rel_err <= 1e-8);

  // Deliberately corrupted backward: scale one gradient.
  w.grad.data[0] *= 1.05;
  report = grad_check(loss_fn, {&w, &b}, 1e-5, 1e-4);
  CHECK_FALSE(report.passed);
  CHECK(report.entries[0].max_rel_err > 1e-2);
}
