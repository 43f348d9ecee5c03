#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "procnets/errors.hpp"

namespace procnets {

// Dense row-major matrix of doubles. Vectors are stored as n x 1.
struct Array2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Array2() = default;
  Array2(int r, int c, double value = 0.0);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

  int size() const { return rows * cols; }
  void zero();
  bool same_shape(const Array2& other) const {
    return rows == other.rows && cols == other.cols;
  }
  bool all_finite() const;
};

// Throws a dimension error naming both shapes when they disagree.
void require_shape(const Array2& a, int rows, int cols, const std::string& what);

// A learnable array with its gradient and Adam accumulators.
struct ParamSlot {
  std::string name;
  Array2 value;
  Array2 grad;
  Array2 adam_m;
  Array2 adam_v;
  long step_count = 0;

  ParamSlot() = default;
  ParamSlot(std::string name_, int rows, int cols);

  void zero_grad() { grad.zero(); }
};

struct AdamHyper {
  double learning_rate = 4e-5;
  double beta1 = 0.8;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One Adam update with bias correction; zeroes the gradient afterwards.
// Non-finite gradients raise a training error naming the parameter.
void adam_step(ParamSlot& slot, const AdamHyper& hyper);

}  // namespace procnets
