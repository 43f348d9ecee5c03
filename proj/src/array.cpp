#include "procnets/array.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace procnets {

Array2::Array2(int r, int c, double value)
    : rows(r), cols(c), data(static_cast<size_t>(r) * c, value) {
  if (r < 0 || c < 0) {
    throw Error(ErrorKind::invalid_argument, "negative array dimensions");
  }
}

void Array2::zero() { std::fill(data.begin(), data.end(), 0.0); }

bool Array2::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_shape(const Array2& a, int rows, int cols, const std::string& what) {
  if (a.rows != rows || a.cols != cols) {
    std::ostringstream msg;
    msg << what << ": expected shape " << rows << "x" << cols << ", got "
        << a.rows << "x" << a.cols;
    throw Error(ErrorKind::dimension, msg.str());
  }
}

ParamSlot::ParamSlot(std::string name_, int rows, int cols)
    : name(std::move(name_)),
      value(rows, cols),
      grad(rows, cols),
      adam_m(rows, cols),
      adam_v(rows, cols) {}

void adam_step(ParamSlot& slot, const AdamHyper& hyper) {
  if (!slot.grad.all_finite()) {
    throw Error(ErrorKind::training,
                "non-finite gradient in parameter '" + slot.name + "'");
  }
  slot.step_count += 1;
  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(slot.step_count));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(slot.step_count));
  const size_t n = slot.value.data.size();
  for (size_t i = 0; i < n; ++i) {
    const double g = slot.grad.data[i];
    double& m = slot.adam_m.data[i];
    double& v = slot.adam_v.data[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    slot.value.data[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
  slot.zero_grad();
}

}  // namespace procnets
