#pragma once

#include "oneside/simulate.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace oneside::testing {

// Epochs rounded to multiples of 2^-32 so that every sum and difference the
// path maps form is exact in double precision.
inline double dyadic(double t) { return std::ldexp(std::round(std::ldexp(t, 32)), -32); }

/// Free grid walk in lattice index units (value k means x = -1 + k h), with
/// dyadic epochs. Started at lattice index k0.
inline StepPath lattice_walk(const GrunwaldCoeffs& c, long k0, double T, std::uint64_t seed,
                             std::uint64_t index) {
  const JumpSampler jumps(c, 1e-3);
  Rng rng = make_stream(seed, index);
  StepPathBuilder b(static_cast<double>(k0));
  long k = k0;
  double t = 0.0;
  double last = 0.0;
  while (true) {
    t += jumps.holding(rng);
    const double e = dyadic(t);
    if (e > T) break;
    k += jumps.step(rng);
    if (e > last) {
      b.jump(e, static_cast<double>(k));
      last = e;
    }
  }
  return std::move(b).finish(T);
}

/// Lattice index path -> grid values -1 + 2k/(n+1).
inline StepPath to_grid(const StepPath& p, std::size_t n) {
  const Lattice lat{n};
  std::vector<double> v;
  v.reserve(p.values().size());
  for (double k : p.values()) v.push_back(lat.value(std::lround(k)));
  return StepPath(p.horizon(), lat.value(std::lround(p.initial())), p.epochs(), std::move(v));
}

}  // namespace oneside::testing
