#pragma once

#include <cstdint>
#include <random>

#include "ober/stable_hash.hpp"

namespace ober {

// mt19937_64 is bit-exact everywhere; the std distributions are not, so the
// draws are derived from raw engine output by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0,1).
  double unit() { return unit_double(engine_()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ober
