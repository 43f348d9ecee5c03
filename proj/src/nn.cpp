#include "procnets/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace procnets {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void init_uniform(Array2& a, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(std::max(1, a.cols)));
  for (double& v : a.data) v = rng.uniform(-s, s);
}

void affine(const Array2& w, const Array2& b, std::span<const double> x,
            std::span<double> y) {
  if (static_cast<int>(x.size()) != w.cols ||
      static_cast<int>(y.size()) != w.rows ||
      (b.size() > 0 && b.rows != w.rows)) {
    std::ostringstream msg;
    msg << "affine: W is " << w.rows << "x" << w.cols << ", x has "
        << x.size() << " elements, y has " << y.size();
    throw Error(ErrorKind::dimension, msg.str());
  }
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = b.size() > 0 ? b.data[r] : 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

void affine_backward(const Array2& w, std::span<const double> x,
                     std::span<const double> dy, Array2* dw, Array2* db,
                     std::span<double> dx) {
  for (int r = 0; r < w.rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    if (dw != nullptr) {
      double* dwr = dw->row(r);
      for (int c = 0; c < w.cols; ++c) dwr[c] += g * x[c];
    }
    if (db != nullptr) db->data[r] += g;
    if (!dx.empty()) {
      const double* wr = w.row(r);
      for (int c = 0; c < w.cols; ++c) dx[c] += g * wr[c];
    }
  }
}

LstmParams::LstmParams(const std::string& prefix, int input_dim_, int hidden_)
    : wx(prefix + ".wx", 4 * hidden_, input_dim_),
      wh(prefix + ".wh", 4 * hidden_, hidden_),
      b(prefix + ".b", 4 * hidden_, 1),
      input_dim(input_dim_),
      hidden(hidden_) {}

void LstmParams::init(Rng& rng) {
  init_uniform(wx.value, rng);
  init_uniform(wh.value, rng);
  // biases stay zero
}

void lstm_step(const LstmParams& p, std::span<const double> x,
               std::span<const double> h_prev, std::span<const double> c_prev,
               std::span<double> h_out, std::span<double> c_out,
               LstmStepCache* cache) {
  const int h = p.hidden;
  if (static_cast<int>(x.size()) != p.input_dim ||
      static_cast<int>(h_prev.size()) != h ||
      static_cast<int>(c_prev.size()) != h) {
    std::ostringstream msg;
    msg << "lstm_step: input " << x.size() << " vs " << p.input_dim
        << ", state " << h_prev.size() << "/" << c_prev.size() << " vs " << h;
    throw Error(ErrorKind::dimension, msg.str());
  }
  std::vector<double> z(4 * h);
  affine(p.wx.value, p.b.value, x, z);
  for (int r = 0; r < 4 * h; ++r) {
    const double* wr = p.wh.value.row(r);
    double acc = z[r];
    for (int c = 0; c < h; ++c) acc += wr[c] * h_prev[c];
    z[r] = acc;
  }
  if (cache != nullptr) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->c_prev.assign(c_prev.begin(), c_prev.end());
    cache->gate_i.resize(h);
    cache->gate_f.resize(h);
    cache->gate_g.resize(h);
    cache->gate_o.resize(h);
    cache->c.resize(h);
    cache->tanh_c.resize(h);
  }
  for (int j = 0; j < h; ++j) {
    const double gi = sigmoid(z[j]);
    const double gf = sigmoid(z[h + j]);
    const double gg = std::tanh(z[2 * h + j]);
    const double go = sigmoid(z[3 * h + j]);
    const double c = gf * c_prev[j] + gi * gg;
    const double tc = std::tanh(c);
    c_out[j] = c;
    h_out[j] = go * tc;
    if (cache != nullptr) {
      cache->gate_i[j] = gi;
      cache->gate_f[j] = gf;
      cache->gate_g[j] = gg;
      cache->gate_o[j] = go;
      cache->c[j] = c;
      cache->tanh_c[j] = tc;
    }
  }
}

void lstm_step_backward(LstmParams& p, const LstmStepCache& cache,
                        std::span<const double> dh, std::span<const double> dc_in,
                        std::span<double> dh_prev, std::span<double> dc_prev,
                        std::span<double> dx) {
  const int h = p.hidden;
  std::vector<double> dz(4 * h);
  for (int j = 0; j < h; ++j) {
    const double gi = cache.gate_i[j];
    const double gf = cache.gate_f[j];
    const double gg = cache.gate_g[j];
    const double go = cache.gate_o[j];
    const double tc = cache.tanh_c[j];
    const double dho = dh[j];
    double dc = dc_in.empty() ? 0.0 : dc_in[j];
    dc += dho * go * (1.0 - tc * tc);
    const double d_o = dho * tc;
    const double d_i = dc * gg;
    const double d_g = dc * gi;
    const double d_f = dc * cache.c_prev[j];
    dc_prev[j] = dc * gf;
    dz[j] = d_i * gi * (1.0 - gi);
    dz[h + j] = d_f * gf * (1.0 - gf);
    dz[2 * h + j] = d_g * (1.0 - gg * gg);
    dz[3 * h + j] = d_o * go * (1.0 - go);
  }
  affine_backward(p.wx.value, cache.x, dz, &p.wx.grad, &p.b.grad, dx);
  std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
  affine_backward(p.wh.value, cache.h_prev, dz, &p.wh.grad, nullptr, dh_prev);
}

Array2 lstm_run(const LstmParams& p, const Array2& x, LstmSequenceCache* cache) {
  const int steps = x.rows;
  const int h = p.hidden;
  Array2 hidden_states(steps, h);
  std::vector<double> h_state(h, 0.0), c_state(h, 0.0);
  std::vector<double> h_next(h), c_next(h);
  if (cache != nullptr) cache->steps.resize(steps);
  for (int t = 0; t < steps; ++t) {
    LstmStepCache* sc = cache != nullptr ? &cache->steps[t] : nullptr;
    lstm_step(p, std::span<const double>(x.row(t), x.cols), h_state, c_state,
              h_next, c_next, sc);
    std::copy(h_next.begin(), h_next.end(), hidden_states.row(t));
    h_state = h_next;
    c_state = c_next;
  }
  return hidden_states;
}

void lstm_run_backward(LstmParams& p, const LstmSequenceCache& cache,
                       const Array2& dh, Array2* dx) {
  const int steps = static_cast<int>(cache.steps.size());
  const int h = p.hidden;
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
  std::vector<double> dh_total(h), dh_prev(h), dc_prev(h);
  for (int t = steps - 1; t >= 0; --t) {
    for (int j = 0; j < h; ++j) dh_total[j] = dh.at(t, j) + dh_next[j];
    std::span<double> dx_row =
        dx != nullptr ? std::span<double>(dx->row(t), dx->cols)
                      : std::span<double>();
    lstm_step_backward(p, cache.steps[t], dh_total, dc_next, dh_prev, dc_prev,
                       dx_row);
    dh_next = dh_prev;
    dc_next = dc_prev;
  }
}

Array2 bilstm(const LstmParams& fwd, const LstmParams& bwd, const Array2& x,
              BilstmCache* cache) {
  if (x.rows < 1) {
    throw Error(ErrorKind::invalid_argument, "bilstm: empty input sequence");
  }
  const int steps = x.rows;
  const int h = fwd.hidden;
  Array2 reversed(steps, x.cols);
  for (int t = 0; t < steps; ++t) {
    std::copy(x.row(steps - 1 - t), x.row(steps - 1 - t) + x.cols,
              reversed.row(t));
  }
  Array2 hf = lstm_run(fwd, x, cache != nullptr ? &cache->fwd : nullptr);
  Array2 hb = lstm_run(bwd, reversed, cache != nullptr ? &cache->bwd : nullptr);
  Array2 out(steps, 2 * h);
  for (int t = 0; t < steps; ++t) {
    std::copy(hf.row(t), hf.row(t) + h, out.row(t));
    std::copy(hb.row(steps - 1 - t), hb.row(steps - 1 - t) + h, out.row(t) + h);
  }
  return out;
}

void bilstm_backward(LstmParams& fwd, LstmParams& bwd, const Array2& dout,
                     const BilstmCache& cache, Array2* dx) {
  const int steps = dout.rows;
  const int h = fwd.hidden;
  Array2 dhf(steps, h);
  Array2 dhb(steps, h);  // in the reversed order the backward chain ran in
  for (int t = 0; t < steps; ++t) {
    for (int j = 0; j < h; ++j) {
      dhf.at(t, j) = dout.at(t, j);
      dhb.at(steps - 1 - t, j) = dout.at(t, h + j);
    }
  }
  lstm_run_backward(fwd, cache.fwd, dhf, dx);
  if (dx == nullptr) {
    lstm_run_backward(bwd, cache.bwd, dhb, nullptr);
  } else {
    Array2 dx_rev(steps, dx->cols);
    lstm_run_backward(bwd, cache.bwd, dhb, &dx_rev);
    for (int t = 0; t < steps; ++t) {
      const double* src = dx_rev.row(t);
      double* dst = dx->row(steps - 1 - t);
      for (int c = 0; c < dx->cols; ++c) dst[c] += src[c];
    }
  }
}

ConvParams::ConvParams(const std::string& prefix, int kernel_, int input_dim_)
    : w(prefix + ".w", 3, kernel_ * input_dim_),
      b(prefix + ".b", 3, 1),
      kernel(kernel_),
      input_dim(input_dim_) {
  if (kernel_ % 2 == 0) {
    throw Error(ErrorKind::config,
                "temporal conv kernel width must be odd, got " +
                    std::to_string(kernel_));
  }
}

void ConvParams::init(Rng& rng) { init_uniform(w.value, rng); }

Array2 temporal_conv(const ConvParams& p, const Array2& input) {
  require_shape(input, input.rows, p.input_dim, "temporal_conv input");
  const int steps = input.rows;
  const int d = p.input_dim;
  const int half = (p.kernel - 1) / 2;
  Array2 out(steps, 3);
  for (int t = 0; t < steps; ++t) {
    for (int ch = 0; ch < 3; ++ch) {
      const double* wr = p.w.value.row(ch);
      double acc = p.b.value.data[ch];
      for (int j = 0; j < p.kernel; ++j) {
        const int src = t + j - half;
        if (src < 0 || src >= steps) continue;  // zero padding
        const double* in_row = input.row(src);
        const double* wj = wr + j * d;
        for (int c = 0; c < d; ++c) acc += wj[c] * in_row[c];
      }
      out.at(t, ch) = acc;
    }
  }
  return out;
}

void temporal_conv_backward(ConvParams& p, const Array2& input,
                            const Array2& dout, Array2* dinput) {
  const int steps = input.rows;
  const int d = p.input_dim;
  const int half = (p.kernel - 1) / 2;
  for (int t = 0; t < steps; ++t) {
    for (int ch = 0; ch < 3; ++ch) {
      const double g = dout.at(t, ch);
      if (g == 0.0) continue;
      p.b.grad.data[ch] += g;
      double* dwr = p.w.grad.row(ch);
      const double* wr = p.w.value.row(ch);
      for (int j = 0; j < p.kernel; ++j) {
        const int src = t + j - half;
        if (src < 0 || src >= steps) continue;
        const double* in_row = input.row(src);
        double* dw = dwr + j * d;
        for (int c = 0; c < d; ++c) dw[c] += g * in_row[c];
        if (dinput != nullptr) {
          double* din = dinput->row(src);
          const double* wj = wr + j * d;
          for (int c = 0; c < d; ++c) din[c] += g * wj[c];
        }
      }
    }
  }
}

namespace {
constexpr double kBceClamp = 1e-7;
double clamp_score(double s) {
  return std::min(1.0 - kBceClamp, std::max(kBceClamp, s));
}
}  // namespace

double bce(double score, int label) {
  const double s = clamp_score(score);
  return label != 0 ? -std::log(s) : -std::log(1.0 - s);
}

double bce_grad(double score, int label) {
  const double s = clamp_score(score);
  return label != 0 ? -1.0 / s : 1.0 / (1.0 - s);
}

double smooth_l1(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw Error(ErrorKind::dimension, "smooth_l1: mismatched or empty vectors");
  }
  double total = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    const double a = std::abs(d);
    total += a < 1.0 ? 0.5 * d * d : a - 0.5;
  }
  return total / static_cast<double>(pred.size());
}

void smooth_l1_backward(std::span<const double> pred,
                        std::span<const double> target, double dloss,
                        std::span<double> dpred) {
  const double scale = dloss / static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    dpred[i] += scale * (std::abs(d) < 1.0 ? d : (d > 0.0 ? 1.0 : -1.0));
  }
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (size_t i = 0; i < probs.size(); ++i) probs[i] /= sum;
}

double softmax_ce(std::span<const double> logits, int target,
                  std::vector<double>* probs_out) {
  if (target < 0 || target >= static_cast<int>(logits.size())) {
    throw Error(ErrorKind::invalid_argument,
                "softmax_ce: target index " + std::to_string(target) +
                    " out of range for " + std::to_string(logits.size()) +
                    " classes");
  }
  std::vector<double> local;
  std::vector<double>& probs = probs_out != nullptr ? *probs_out : local;
  probs.resize(logits.size());
  softmax(logits, probs);
  return -std::log(std::max(probs[target], 1e-300));
}

void softmax_ce_backward(std::span<const double> probs, int target,
                         double dloss, std::span<double> dlogits) {
  for (size_t i = 0; i < probs.size(); ++i) {
    double g = probs[i];
    if (static_cast<int>(i) == target) g -= 1.0;
    dlogits[i] += dloss * g;
  }
}

GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamSlot*>& params,
                           double fd_step, double tolerance) {
  GradCheckReport report;
  for (ParamSlot* slot : params) {
    GradCheckEntry entry;
    entry.name = slot->name;
    for (size_t i = 0; i < slot->value.data.size(); ++i) {
      const double saved = slot->value.data[i];
      slot->value.data[i] = saved + fd_step;
      const double up = loss_fn();
      slot->value.data[i] = saved - fd_step;
      const double down = loss_fn();
      slot->value.data[i] = saved;
      const double numeric = (up - down) / (2.0 * fd_step);
      const double analytic = slot->grad.data[i];
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      entry.max_rel_err =
          std::max(entry.max_rel_err, std::abs(numeric - analytic) / denom);
    }
    entry.passed = entry.max_rel_err <= tolerance;
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.passed = report.passed && entry.passed;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace procnets
