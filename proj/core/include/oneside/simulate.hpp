#pragma once

#include "oneside/grunwald.hpp"
#include "oneside/paths.hpp"
#include "oneside/ratemat.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace oneside {

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t paths = 1;
  double x0 = 0.0;
  double T = 1.0;
  double tail_eps = 1e-3;

  void validate() const;
};

using Rng = std::mt19937_64;

/// Independent stream for path k of a run seeded with `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t k);

/// Worker count: explicit value, else ONESIDE_LEVY_THREADS, else hardware.
unsigned resolve_threads(unsigned requested);

/// Runs f(k) for k in [0, count) on `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f);

/// Jump law of the free grid walk: holding times Exp(-G_1), displacement
/// (j - 1) lattice steps with probability G_j / (-G_1) for j != 1.
class JumpSampler {
public:
  /// Mass beyond j_max is lumped into the last bucket; it must be < tail_eps.
  JumpSampler(const GrunwaldCoeffs& c, double tail_eps);
  double rate() const noexcept { return rate_; }
  double lumped_mass() const noexcept { return lumped_; }
  double holding(Rng& rng) const;
  long step(Rng& rng) const;

private:
  std::vector<double> cdf_;  ///< over j = 0, 2, 3, ..., j_max
  double rate_;
  double lumped_;
};

/// Overshoot law of the first passage strictly above the current level:
/// height j >= 1 with probability T_{j+1} / G_0.
class LadderSampler {
public:
  explicit LadderSampler(const GrunwaldCoeffs& c);
  long sample(Rng& rng) const;
  double probability(std::size_t j) const;

private:
  std::vector<double> cdf_;  ///< heights 1..j_max
  std::vector<double> pmf_;
};

StepPath simulate_cp(const GrunwaldCoeffs& c, const SimConfig& cfg, std::uint64_t path_index = 0);
StepPath simulate_ctmc(const RateMatrix& q, long i0, const SimConfig& cfg, std::uint64_t path_index = 0);

enum class SideRule { Free, Kill, FastForward, Reflect };

struct SideRules {
  SideRule left = SideRule::Free;
  SideRule right = SideRule::Free;
  static SideRules from(BoundaryPair bc);
};

struct ExcursionOptions {
  /// Steps simulated literally inside one excursion below the region before
  /// the remainder is completed from the ladder-height law.
  std::size_t literal_steps = 1000;
  /// Stop after this many visible moves of the mapped path.
  std::size_t max_mapped_jumps = std::numeric_limits<std::size_t>::max();
  std::size_t max_total_steps = 500'000'000;
};

/// Free grid walk on the lattice k = (x + 1)/h, h = 2/(n+1), generated until the
/// boundary-mapped path has at least `mapped_horizon` time or is absorbed.
///
/// Excursions outside fast-forward regions are shortened: above-excursions
/// re-enter at level n (the walk only steps down by one), below-excursions
/// are completed with i.i.d. ladder heights. Both leave the law of the mapped
/// path unchanged.
class BoundarySimulator {
public:
  BoundarySimulator(const GrunwaldCoeffs& c, std::size_t n, SideRules rules,
                    ExcursionOptions opts = {});
  StepPath run(long k0, double mapped_horizon, Rng& rng) const;
  const Lattice& lattice() const noexcept { return lattice_; }

private:
  JumpSampler jumps_;
  LadderSampler ladder_;
  Lattice lattice_;
  SideRules rules_;
  ExcursionOptions opts_;
};

/// Empirical time-t marginals (rows: times, columns: states 0..n+1) of the
/// boundary-mapped free walk started at state i0.
Eigen::MatrixXd mapped_marginals(const GrunwaldCoeffs& c, BoundaryPair bc, std::size_t n, long i0,
                                 std::span<const double> times, std::size_t paths,
                                 std::uint64_t seed, unsigned threads,
                                 ExcursionOptions opts = {});

/// Same marginals from direct simulation of the chain Q.
Eigen::MatrixXd ctmc_marginals(const RateMatrix& q, long i0, std::span<const double> times,
                               std::size_t paths, std::uint64_t seed, unsigned threads);

/// Absorption times of the chain Q from i0.
std::vector<double> ctmc_absorption_times(const RateMatrix& q, long i0, std::size_t paths,
                                          std::uint64_t seed, unsigned threads);

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace oneside
