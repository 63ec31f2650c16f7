#include "oneside/simulate.hpp"

#include "oneside/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

namespace oneside {

void SimConfig::validate() const {
  if (paths == 0) throw Error(ErrorCode::InvalidArgument, "paths must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(tail_eps > 0.0 && tail_eps <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "tail_eps must lie in (0, 1e-3]");
  }
  if (!std::isfinite(x0)) throw Error(ErrorCode::InvalidArgument, "x0 must be finite");
}

Rng make_stream(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    0x6f6e6573u};
  return Rng(seq);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ONESIDE_LEVY_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) f(k);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += threads) f(k);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

JumpSampler::JumpSampler(const GrunwaldCoeffs& c, double tail_eps) {
  rate_ = -c.g[1];
  lumped_ = std::max(0.0, c.tail[c.j_max + 1]) / rate_;
  if (lumped_ >= tail_eps) {
    throw Error(ErrorCode::TailUnreachable,
                "tail mass " + std::to_string(lumped_) + " beyond j_max exceeds tail_eps");
  }
  cdf_.reserve(c.j_max);
  long double acc = 0.0L;
  acc += c.g[0] / rate_;
  cdf_.push_back(static_cast<double>(acc));
  for (std::size_t j = 2; j <= c.j_max; ++j) {
    acc += c.g[j] / rate_;
    cdf_.push_back(static_cast<double>(acc));
  }
  cdf_.back() = 1.0;
}

double JumpSampler::holding(Rng& rng) const {
  return std::exponential_distribution<double>(rate_)(rng);
}

long JumpSampler::step(Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto cat = static_cast<long>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1));
  return cat == 0 ? -1 : cat;
}

LadderSampler::LadderSampler(const GrunwaldCoeffs& c) {
  const double g0 = c.g[0];
  pmf_.assign(c.j_max + 1, 0.0);
  cdf_.reserve(c.j_max);
  long double acc = 0.0L;
  for (std::size_t j = 1; j <= c.j_max; ++j) {
    pmf_[j] = c.tail[j + 1] / g0;
    acc += pmf_[j];
    cdf_.push_back(static_cast<double>(acc));
  }
  cdf_.back() = 1.0;
}

long LadderSampler::sample(Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<long>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1)) + 1;
}

double LadderSampler::probability(std::size_t j) const {
  return j < pmf_.size() ? pmf_[j] : 0.0;
}

StepPath simulate_cp(const GrunwaldCoeffs& c, const SimConfig& cfg, std::uint64_t path_index) {
  cfg.validate();
  const JumpSampler jumps(c, cfg.tail_eps);
  Rng rng = make_stream(cfg.seed, path_index);
  StepPathBuilder b(cfg.x0);
  double t = 0.0;
  long k = 0;
  while (true) {
    t += jumps.holding(rng);
    if (t > cfg.T) break;
    k += jumps.step(rng);
    b.jump(t, cfg.x0 + static_cast<double>(k) * c.h);
  }
  return std::move(b).finish(cfg.T);
}

namespace {

struct ChainTables {
  std::vector<std::vector<double>> cdf;
  std::vector<std::vector<long>> target;
  std::vector<double> rate;
};

ChainTables chain_tables(const RateMatrix& q) {
  ChainTables t;
  const auto size = static_cast<Eigen::Index>(q.size());
  t.cdf.resize(q.size());
  t.target.resize(q.size());
  t.rate.assign(q.size(), 0.0);
  for (Eigen::Index i = 0; i < size; ++i) {
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < size; ++j) {
      if (i == j || q.entries(i, j) <= 0.0) continue;
      acc += q.entries(i, j);
      t.cdf[i].push_back(static_cast<double>(acc));
      t.target[i].push_back(q.first_index + static_cast<long>(j));
    }
    t.rate[i] = static_cast<double>(acc);
    for (auto& v : t.cdf[i]) v /= t.rate[i];
    if (!t.cdf[i].empty()) t.cdf[i].back() = 1.0;
  }
  return t;
}

StepPath run_chain(const RateMatrix& q, const ChainTables& tab, long i0, double T, Rng& rng,
                   double* absorbed_at) {
  StepPathBuilder b(q.grid(i0));
  double t = 0.0;
  long i = i0;
  while (true) {
    const std::size_t r = q.row_of(i);
    if (tab.rate[r] <= 0.0) {
      if (absorbed_at) *absorbed_at = t;
      break;
    }
    t += std::exponential_distribution<double>(tab.rate[r])(rng);
    if (t > T) break;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto& cdf = tab.cdf[r];
    const auto pos = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), cdf.size() - 1);
    i = tab.target[r][pos];
    b.jump(t, q.grid(i));
  }
  return std::move(b).finish(T);
}

}  // namespace

StepPath simulate_ctmc(const RateMatrix& q, long i0, const SimConfig& cfg, std::uint64_t path_index) {
  if (!(cfg.T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  q.row_of(i0);
  const ChainTables tab = chain_tables(q);
  Rng rng = make_stream(cfg.seed, path_index);
  return run_chain(q, tab, i0, cfg.T, rng, nullptr);
}

SideRules SideRules::from(BoundaryPair bc) {
  SideRules r;
  r.left = bc.left == LeftBoundary::D ? SideRule::Kill
           : bc.left == LeftBoundary::N ? SideRule::FastForward
                                        : SideRule::Reflect;
  r.right = bc.right == RightBoundary::D ? SideRule::Kill : SideRule::FastForward;
  return r;
}

BoundarySimulator::BoundarySimulator(const GrunwaldCoeffs& c, std::size_t n, SideRules rules,
                                     ExcursionOptions opts)
    : jumps_(c, 1.0), ladder_(c), lattice_{n}, rules_(rules), opts_(opts) {
  if (std::abs(c.h - lattice_.h()) > 1e-12 * c.h) {
    throw Error(ErrorCode::HorizonMismatch, "coefficient mesh does not equal 2/(n+1)");
  }
  if (rules.right == SideRule::Reflect) {
    throw Error(ErrorCode::UnsupportedCombination, "reflection is only supported on the left");
  }
  // below-excursions reach at most literal_steps levels under the region, so a
  // lumped jump of j_max - 1 levels still lands above the grid
  if (rules.right != SideRule::Free && c.j_max < opts.literal_steps + n + 2) {
    throw Error(ErrorCode::TailUnreachable, "j_max too small for the excursion budget");
  }
}

StepPath BoundarySimulator::run(long k0, double mapped_horizon, Rng& rng) const {
  const long top = static_cast<long>(lattice_.n) + 1;
  const long n = top - 1;
  const bool kill_l = rules_.left == SideRule::Kill;
  const bool kill_r = rules_.right == SideRule::Kill;
  const bool ff_l = rules_.left == SideRule::FastForward;
  const bool ff_r = rules_.right == SideRule::FastForward;
  const bool refl = rules_.left == SideRule::Reflect;

  StepPathBuilder b(lattice_.value(k0));
  long k = k0;
  long push = 0;
  double t = 0.0;
  double mapped = 0.0;
  double horizon = 0.0;
  std::size_t excursion = 0;
  std::size_t total = 0;
  long visible = k0;
  std::size_t mapped_jumps = 0;

  while (true) {
    if (++total > opts_.max_total_steps) {
      throw Error(ErrorCode::InvalidArgument, "boundary simulation exceeded its step cap");
    }
    const long r = k + push;
    if ((kill_l && r <= 0) || (kill_r && r >= top)) {
      horizon = t + 1.0;
      break;
    }
    const double dt = jumps_.holding(rng);
    if (ff_r && r >= top) {
      t += dt;
      k -= r - n;
      b.jump(t, lattice_.value(k));
      continue;
    }
    if (ff_l && r <= 0) {
      t += dt;
      if (excursion < opts_.literal_steps) {
        ++excursion;
        k += jumps_.step(rng);
      } else {
        excursion = 0;
        while (k <= 0) k += ladder_.sample(rng);
      }
      b.jump(t, lattice_.value(k));
      continue;
    }
    excursion = 0;
    if (r != visible) {
      visible = r;
      if (++mapped_jumps >= opts_.max_mapped_jumps) {
        horizon = t + dt;
        break;
      }
    }
    if (mapped + dt >= mapped_horizon) {
      horizon = t + dt;
      break;
    }
    mapped += dt;
    t += dt;
    k += jumps_.step(rng);
    if (refl && k + push < 1) push = 1 - k;
    b.jump(t, lattice_.value(k));
  }
  return std::move(b).finish(horizon);
}

Eigen::MatrixXd mapped_marginals(const GrunwaldCoeffs& c, BoundaryPair bc, std::size_t n, long i0,
                                 std::span<const double> times, std::size_t paths,
                                 std::uint64_t seed, unsigned threads, ExcursionOptions opts) {
  const BoundarySimulator sim(c, n, SideRules::from(bc), opts);
  const double t_max = *std::max_element(times.begin(), times.end());
  const Lattice lat{n};
  const auto rows = static_cast<Eigen::Index>(times.size());
  const auto cols = static_cast<Eigen::Index>(n + 2);
  threads = resolve_threads(threads);
  std::vector<Eigen::MatrixXd> partial(threads, Eigen::MatrixXd::Zero(rows, cols));
  parallel_for(threads, threads, [&](std::size_t w) {
    for (std::size_t k = w; k < paths; k += threads) {
      Rng rng = make_stream(seed, k);
      const StepPath y = sim.run(i0, t_max, rng);
      const StepPath m = apply_boundary(y, bc, n);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto v = value_or_absorbed(m, times[static_cast<std::size_t>(r)]);
        if (!v) throw Error(ErrorCode::HorizonMismatch, "mapped path shorter than requested time");
        partial[w](r, lat.index(*v)) += 1.0;
      }
    }
  });
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& p : partial) out += p;
  return out / static_cast<double>(paths);
}

Eigen::MatrixXd ctmc_marginals(const RateMatrix& q, long i0, std::span<const double> times,
                               std::size_t paths, std::uint64_t seed, unsigned threads) {
  const ChainTables tab = chain_tables(q);
  const double t_max = *std::max_element(times.begin(), times.end());
  const auto rows = static_cast<Eigen::Index>(times.size());
  const auto cols = static_cast<Eigen::Index>(q.size());
  threads = resolve_threads(threads);
  std::vector<Eigen::MatrixXd> partial(threads, Eigen::MatrixXd::Zero(rows, cols));
  parallel_for(threads, threads, [&](std::size_t w) {
    for (std::size_t k = w; k < paths; k += threads) {
      Rng rng = make_stream(seed, k);
      const StepPath p = run_chain(q, tab, i0, t_max, rng, nullptr);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double v = p.value_at(times[static_cast<std::size_t>(r)]);
        const long idx = q.kind == MatrixKind::Restricted ? Lattice{q.n}.index(v)
                                                          : std::lround(v / q.h);
        partial[w](r, static_cast<Eigen::Index>(q.row_of(idx))) += 1.0;
      }
    }
  });
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& p : partial) out += p;
  return out / static_cast<double>(paths);
}

std::vector<double> ctmc_absorption_times(const RateMatrix& q, long i0, std::size_t paths,
                                          std::uint64_t seed, unsigned threads) {
  const ChainTables tab = chain_tables(q);
  std::vector<double> out(paths, 0.0);
  parallel_for(paths, resolve_threads(threads), [&](std::size_t k) {
    Rng rng = make_stream(seed, k);
    double at = std::numeric_limits<double>::infinity();
    run_chain(q, tab, i0, std::numeric_limits<double>::max(), rng, &at);
    out[k] = at;
  });
  return out;
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace oneside
