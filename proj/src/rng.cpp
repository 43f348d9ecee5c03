#include "procnets/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "procnets/errors.hpp"

namespace procnets {

namespace {

uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

int64_t Rng::below(int64_t n) {
  if (n <= 0) throw Error(ErrorKind::invalid_argument, "Rng::below requires n >= 1");
  const uint64_t un = static_cast<uint64_t>(n);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return static_cast<int64_t>(draw % un);
}

int64_t Rng::range_inclusive(int64_t lo, int64_t hi) {
  if (hi < lo) throw Error(ErrorKind::invalid_argument, "Rng::range_inclusive requires lo <= hi");
  return lo + below(hi - lo + 1);
}

std::string Rng::state() const {
  std::ostringstream out;
  out << s_[0] << ' ' << s_[1] << ' ' << s_[2] << ' ' << s_[3];
  return out.str();
}

void Rng::restore(const std::string& text) {
  std::istringstream in(text);
  uint64_t v[4];
  if (!(in >> v[0] >> v[1] >> v[2] >> v[3])) {
    throw Error(ErrorKind::format, "bad rng state string: '" + text + "'");
  }
  for (int i = 0; i < 4; ++i) s_[i] = v[i];
}

}  // namespace procnets
