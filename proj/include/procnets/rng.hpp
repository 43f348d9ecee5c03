#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace procnets {

// Deterministic xoshiro256** generator with hand-rolled distributions, so that
// sampling decisions and generated datasets do not depend on the standard
// library implementation. State round-trips through a text string for
// checkpointing.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // standard normal (Box-Muller)
  int64_t below(int64_t n);                // uniform in [0, n), n >= 1
  int64_t range_inclusive(int64_t lo, int64_t hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(static_cast<int64_t>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string state() const;
  void restore(const std::string& text);

 private:
  uint64_t s_[4];
};

}  // namespace procnets
