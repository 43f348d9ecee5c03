#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "procnets/array.hpp"
#include "procnets/rng.hpp"

namespace procnets {

double sigmoid(double x);

// Fills a with uniform(-s, s), s = 1/sqrt(fan-in), fan-in = cols.
void init_uniform(Array2& a, Rng& rng);

// y = W x + b. b may be empty (treated as zero).
void affine(const Array2& w, const Array2& b, std::span<const double> x,
            std::span<double> y);

// Accumulates dW += dy x^T, db += dy, dx += W^T dy. Null/empty outputs are
// skipped.
void affine_backward(const Array2& w, std::span<const double> x,
                     std::span<const double> dy, Array2* dw, Array2* db,
                     std::span<double> dx);

// Single-layer LSTM cell. Gate rows of wx/wh/b are ordered input, forget,
// candidate, output.
struct LstmParams {
  ParamSlot wx;  // 4H x Din
  ParamSlot wh;  // 4H x H
  ParamSlot b;   // 4H x 1
  int input_dim = 0;
  int hidden = 0;

  LstmParams() = default;
  LstmParams(const std::string& prefix, int input_dim_, int hidden_);
  void init(Rng& rng);
};

struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> gate_i, gate_f, gate_g, gate_o, c, tanh_c;
};

void lstm_step(const LstmParams& p, std::span<const double> x,
               std::span<const double> h_prev, std::span<const double> c_prev,
               std::span<double> h_out, std::span<double> c_out,
               LstmStepCache* cache);

// dh is the total gradient into h_t, dc_in the gradient into c_t arriving
// from the following step. Accumulates parameter grads and, when non-empty,
// dx; writes dh_prev/dc_prev for the preceding step.
void lstm_step_backward(LstmParams& p, const LstmStepCache& cache,
                        std::span<const double> dh, std::span<const double> dc_in,
                        std::span<double> dh_prev, std::span<double> dc_prev,
                        std::span<double> dx);

struct LstmSequenceCache {
  std::vector<LstmStepCache> steps;
};

// Runs the cell over the rows of x front to back with zero initial state.
// Returns the L x H hidden states.
Array2 lstm_run(const LstmParams& p, const Array2& x, LstmSequenceCache* cache);

// dh holds per-row injected gradients; dx (optional) accumulates input grads.
void lstm_run_backward(LstmParams& p, const LstmSequenceCache& cache,
                       const Array2& dh, Array2* dx);

struct BilstmCache {
  LstmSequenceCache fwd, bwd;
};

// Row t of the result is [fwd_h_t ; bwd_h_t], width 2H. Empty input is an
// error.
Array2 bilstm(const LstmParams& fwd, const LstmParams& bwd, const Array2& x,
              BilstmCache* cache);
void bilstm_backward(LstmParams& fwd, LstmParams& bwd, const Array2& dout,
                     const BilstmCache& cache, Array2* dx);

// Temporal convolution over the rows of an L x D input, odd kernel width,
// zero padding of (k-1)/2 rows on each side, three output channels.
struct ConvParams {
  ParamSlot w;  // 3 x (k * D)
  ParamSlot b;  // 3 x 1
  int kernel = 0;
  int input_dim = 0;

  ConvParams() = default;
  ConvParams(const std::string& prefix, int kernel_, int input_dim_);
  void init(Rng& rng);
};

Array2 temporal_conv(const ConvParams& p, const Array2& input);  // L x 3
void temporal_conv_backward(ConvParams& p, const Array2& input,
                            const Array2& dout, Array2* dinput);

// Binary cross entropy on a probability. The score is clamped to
// [1e-7, 1 - 1e-7] before the logs; the gradient is evaluated at the clamped
// value.
double bce(double score, int label);
double bce_grad(double score, int label);

// Detection-style smooth L1: per element 0.5 d^2 for |d| < 1 else |d| - 0.5,
// averaged over elements.
double smooth_l1(std::span<const double> pred, std::span<const double> target);
void smooth_l1_backward(std::span<const double> pred,
                        std::span<const double> target, double dloss,
                        std::span<double> dpred);

void softmax(std::span<const double> logits, std::span<double> probs);
double softmax_ce(std::span<const double> logits, int target,
                  std::vector<double>* probs_out);
void softmax_ce_backward(std::span<const double> probs, int target,
                         double dloss, std::span<double> dlogits);

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  bool passed = true;
};

// Compares the analytic gradients already stored in each slot against central
// finite differences of loss_fn. loss_fn must be deterministic and read the
// live slot values.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<ParamSlot*>& params,
                           double fd_step, double tolerance);

}  // namespace procnets
