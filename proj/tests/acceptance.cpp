// Acceptance checks; one PASS/FAIL line per criterion.
#include "support.hpp"

#include "oneside/error.hpp"
#include "oneside/grunwald.hpp"
#include "oneside/paths.hpp"
#include "oneside/ratemat.hpp"
#include "oneside/scale.hpp"
#include "oneside/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace oneside;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), s, budget_s, in_time ? "" : ", over budget");
  for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const LaplaceExponent stable15 = LaplaceExponent::stable(1.5);

Outcome grunwald_oracle() {
  const double alpha = 1.5;
  double worst_rel = 0.0, worst_row = 0.0;
  bool signs = true;
  for (double h : {1.0, 0.5, 0.1}) {
    const std::size_t J = 64;
    const auto c = compute_coeffs(stable15, h, J);
    const auto dft = verify_coeffs_cauchy(stable15, h, J, 0.9);
    for (std::size_t j = 0; j <= J; ++j) {
      worst_rel = std::max(worst_rel, std::abs(dft.g[j] - c.g[j]) / std::abs(c.g[j]));
    }
    signs = signs && c.g[0] > 0.0 && c.g[1] < 0.0;
    for (std::size_t j = 2; j <= J; ++j) signs = signs && c.g[j] >= 0.0;
    // sum_{j > J} G_j = -h^{-alpha} (-1)^J binom(alpha - 1, J)
    long double r = 1.0L;
    for (std::size_t m = 0; m < J; ++m) r *= (static_cast<long double>(m) - (alpha - 1.0)) / (m + 1.0L);
    const long double remainder = -std::pow(static_cast<long double>(h), -alpha) * r;
    long double rhs = c.g[0];
    for (std::size_t j = 2; j <= J; ++j) rhs += c.g[j];
    rhs += remainder;
    worst_row = std::max(worst_row, static_cast<double>(std::abs(-c.g[1] - rhs) / std::abs(c.g[1])));
  }
  Outcome o;
  o.pass = worst_rel <= 1e-8 && worst_row <= 1e-10 && signs;
  o.detail = "max rel err vs Fourier inversion " + fmt("%.2e", worst_rel) + ", row identity " +
             fmt("%.2e", worst_row) + ", sign pattern " + (signs ? "ok" : "violated");
  return o;
}

Outcome matrix_validity() {
  double worst = 0.0, min_off = 0.0;
  bool holding = true;
  for (std::size_t n : {9, 99, 499}) {
    const double h = 2.0 / static_cast<double>(n + 1);
    const auto c = compute_coeffs(stable15, h, 4 * (n + 1));
    const double g0 = c.g[0], g1 = c.g[1];
    for (const auto bc : BoundaryPair::all()) {
      const auto q = build_restricted(stable15, c, n, bc);
      const auto rep = inspect_matrix(q, c);
      worst = std::max(worst, rep.max_row_sum / std::abs(g1));
      min_off = std::min(min_off, rep.min_off_diagonal / std::abs(g1));
      const auto last = static_cast<long>(n);
      if (bc.left == LeftBoundary::NStar) holding = holding && q.at(1, 1) == g0 + g1;
      if (bc.left == LeftBoundary::N) holding = holding && q.at(1, 1) == -g0;
      if (bc.left == LeftBoundary::D) holding = holding && q.at(1, 1) == g1;
      if (bc.right == RightBoundary::N) holding = holding && q.at(last, last) == -g0;
      if (bc.right == RightBoundary::D) holding = holding && q.at(last, last) == g1;
      holding = holding && rep.absorbing_rows_zero;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-10 && min_off >= -1e-12 && holding;
  o.detail = "max |row sum|/|G_1| " + fmt("%.2e", worst) + ", min off-diagonal/|G_1| " +
             fmt("%.2e", min_off) + ", holding rates " + (holding ? "exact" : "mismatch");
  return o;
}

Outcome stopped_resolvent() {
  const double h = 0.1;
  const std::size_t depth = 2000, above = 40;
  const auto c = compute_coeffs(stable15, h, depth + above + 2);
  const auto q = build_stopped(c, depth, above);
  const Eigen::VectorXd x = resolvent_transpose_e(q, 1.0, 0);
  const Eigen::VectorXd y = stopped_resolvent_closed_form(stable15, c, q, 1.0);
  const double sup = (x - y).cwiseAbs().maxCoeff();

  // beta chosen so that exp(-h depth varphi^{-1}(beta)) stays negligible
  std::vector<double> betas;
  for (double u : {0.8, 0.6, 0.5, 0.4, 0.3, 0.25, 0.2, 0.15}) betas.push_back(stable15.varphi(h, u));
  const auto lim = ergodic_limit_z(stable15, c, q, 0, betas);
  const double z0 = lim.z[static_cast<Eigen::Index>(q.row_of(0))];
  const double z1 = lim.z[static_cast<Eigen::Index>(q.row_of(1))];
  const double z2 = lim.z[static_cast<Eigen::Index>(q.row_of(2))];
  const double zerr = std::max({std::abs(z0), std::abs(z1 - 0.5), std::abs(z2 - 0.125)});
  Outcome o;
  o.pass = sup <= 1e-8 && zerr <= 1e-3;
  o.detail = "sup err vs closed form " + fmt("%.2e", sup) + "; extrapolated z0 " + fmt("%.2e", z0) +
             ", z1 " + fmt("%.6f", z1) + ", z2 " + fmt("%.6f", z2) + " (max err " + fmt("%.2e", zerr) + ")";
  o.notes.push_back("beta range " + fmt("%.3g", betas.back()) + " .. " + fmt("%.3g", betas.front()) +
                    ", raw beta x at smallest beta: z1 " +
                    fmt("%.6f", lim.raw[static_cast<Eigen::Index>(q.row_of(1))]));
  return o;
}

Outcome landing_law() {
  const std::size_t n = 99;
  ExcursionOptions opts;
  opts.max_mapped_jumps = 1;
  const double h = 2.0 / static_cast<double>(n + 1);
  const auto c = compute_coeffs(stable15, h, opts.literal_steps + n + 12);
  const BoundaryPair nn = BoundaryPair::parse("NN");
  const BoundarySimulator sim(c, n, SideRules::from(nn), opts);
  const Lattice lat{n};
  const std::size_t N = 100000;
  const std::size_t J = 8;
  std::vector<double> hold(N);
  std::vector<long> land(N);
  parallel_for(N, 0, [&](std::size_t k) {
    Rng rng = make_stream(4, k);
    const StepPath m = apply_boundary(sim.run(1, 1e300, rng), nn, n);
    hold[k] = m.epochs().at(0);
    land[k] = lat.index(m.values().at(0)) - 1;
  });
  const double mean = std::accumulate(hold.begin(), hold.end(), 0.0) / N;
  const double expected = 1.0 / c.G(0);
  const double mean_rel = std::abs(mean - expected) / expected;
  bool ok = mean_rel <= 0.01;
  double worst_z = 0.0;
  std::ostringstream probs;
  for (std::size_t j = 1; j <= J; ++j) {
    const double p = c.T(j + 1) / c.G(0);
    const double phat = static_cast<double>(std::count(land.begin(), land.end(), static_cast<long>(j))) / N;
    const double se = std::sqrt(p * (1.0 - p) / N);
    const double z = std::abs(phat - p) / se;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 3.0;
    probs << (j > 1 ? ", " : "") << fmt("%.4f", phat) << "/" << fmt("%.4f", p);
  }
  Outcome o;
  o.pass = ok;
  o.detail = "holding mean rel err " + fmt("%.2e", mean_rel) + ", landing j=1.." + std::to_string(J) +
             " worst |z| " + fmt("%.2f", worst_z);
  o.notes.push_back("empirical/exact: " + probs.str());
  return o;
}

Outcome law_equality() {
  const std::size_t n = 9;
  const double h = 2.0 / static_cast<double>(n + 1);
  const ExcursionOptions opts;
  const auto walk = compute_coeffs(stable15, h, opts.literal_steps + n + 12);
  const auto c = compute_coeffs(stable15, h, 4 * (n + 1));
  const std::vector<double> times{0.1, 0.5, 1.0};
  const long i0 = 5;
  double worst = 0.0;
  Outcome o;
  for (const auto bc : BoundaryPair::all()) {
    const auto q = build_restricted(stable15, c, n, bc);
    const Eigen::MatrixXd emp = mapped_marginals(walk, bc, n, i0, times, 100000, 5, 0, opts);
    std::ostringstream line;
    line << bc.label() << ":";
    for (std::size_t r = 0; r < times.size(); ++r) {
      const Eigen::VectorXd exact = semigroup_row(q, times[r], i0);
      const double tv = total_variation(emp.row(static_cast<Eigen::Index>(r)).transpose(), exact);
      worst = std::max(worst, tv);
      line << " " << fmt("%.4f", tv);
    }
    o.notes.push_back(line.str());
  }
  o.pass = worst <= 0.02;
  o.detail = "max TV over six boundary pairs and t in {0.1, 0.5, 1} " + fmt("%.4f", worst);
  return o;
}

Outcome pathwise() {
  const std::size_t n = 9;
  const double h = 2.0 / static_cast<double>(n + 1);
  const auto c = compute_coeffs(stable15, h, 400);
  const double top = static_cast<double>(n + 1);
  const std::size_t N = 10000;
  std::size_t ff_mis = 0, kill_mis = 0, nstar_mis = 0, dn_mis = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const StepPath p = testing::lattice_walk(c, 5, 4.0, 6, k);
    const StepPath both = fast_forward(p, Region::between(0.0, top));
    const StepPath up_then_down = fast_forward(fast_forward(p, Region::above(0.0)), Region::below(top));
    const StepPath down_then_up = fast_forward(fast_forward(p, Region::below(top)), Region::above(0.0));
    if (!(both == up_then_down) || !(both == down_then_up)) ++ff_mis;
    if (!(kill_left(kill_right(p, top), 0.0) == kill_right(kill_left(p, 0.0), top))) ++kill_mis;
    const StepPath grid = testing::to_grid(p, n);
    const StepPath nstar_n = apply_boundary(grid, BoundaryPair::parse("N*N"), n);
    const StepPath two_sided = testing::to_grid(reflect_two_sided(p, 1.0, top - 1.0).path, n);
    if (!(nstar_n == two_sided)) ++nstar_mis;
    // the two orders only differ in how much post-absorption time survives
    const StepPath dn = apply_boundary(grid, BoundaryPair::parse("DN"), n);
    const StepPath dn2 = testing::to_grid(fast_forward(kill_left(p, 0.0), Region::below(top)), n);
    const double common = std::min(dn.horizon(), dn2.horizon());
    if (!(dn.truncate(common) == dn2.truncate(common))) ++dn_mis;
  }
  Outcome o;
  o.pass = ff_mis == 0 && kill_mis == 0 && nstar_mis == 0;
  o.detail = std::to_string(N) + " paths; mismatches: fast-forward commutation " + std::to_string(ff_mis) +
             ", killing commutation " + std::to_string(kill_mis) + ", N*N vs two-sided reflection at h-1, 1-h " +
             std::to_string(nstar_mis);
  o.notes.push_back("DN = fast_forward(kill_left(p), below(1)) mismatches: " + std::to_string(dn_mis));

  // the two constructions agree in law: compare time-1 marginals
  const auto cc = compute_coeffs(stable15, h, 1000 + n + 12);
  const std::size_t M = 40000;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 2));
  Eigen::VectorXd b = a;
  for (std::size_t k = 0; k < M; ++k) {
    // horizon long enough that the fast-forwarded path still covers t = 1
    const StepPath p = testing::lattice_walk(cc, 5, 12.0, 8, k);
    const StepPath x = apply_boundary(testing::to_grid(p, n), BoundaryPair::parse("N*N"), n);
    if (x.horizon() < 1.0) continue;
    a[Lattice{n}.index(x.value_at(1.0))] += 1.0;
    b[std::lround(reflect_two_sided(p, 1.0, top - 1.0).path.value_at(1.0))] += 1.0;
  }
  o.notes.push_back("time-1 marginal TV between the two constructions: " +
                    fmt("%.4f", total_variation(a / a.sum(), b / b.sum())));
  return o;
}

Outcome scale_identities() {
  const ScaleKit kit(stable15, {1.0, 8192, 1.0});
  const auto x = kit.nodes();
  const std::vector<double> one(x.size(), 1.0);
  const auto Z = kit.Zq_apply(one);
  double zrel = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double ml = mittag_leffler(1.5, 1.0, std::pow(x[k], 1.5));
    zrel = std::max(zrel, std::abs(Z.values[k] - ml) / ml);
  }
  const auto w = kit.sample([&](double s) { return kit.W(s); });
  const auto zw = kit.Zq_apply(w);
  const auto izw = kit.integrate(zw.values);
  double werr = 0.0, ierr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    werr = std::max(werr, std::abs(kit.q() * zw.values[k] - kit.q() * kit.Wq(x[k])));
    ierr = std::max(ierr, std::abs(kit.q() * izw[k] - (kit.Zq(x[k]) - 1.0)));
  }
  const auto nn = resolvent_density_NN(kit, 0.3);
  const auto dn = resolvent_density_DN(kit, 0.5);
  const double nn_err = std::abs(nn.mass - nn.expected_mass);
  const double dn_err = std::abs(dn.mass - dn.expected_mass);
  Outcome o;
  o.pass = zrel <= 1e-8 && werr <= 1e-8 && ierr <= 1e-8 && nn_err <= 1e-6 && dn_err <= 1e-6;
  o.detail = "Z series rel err " + fmt("%.2e", zrel) + ", qZ[W]-qW^(q) " + fmt("%.2e", werr) +
             ", qIZ[W]-(Z-1) " + fmt("%.2e", ierr) + ", NN mass err " + fmt("%.2e", nn_err) +
             ", DN mass err " + fmt("%.2e", dn_err);
  o.notes.push_back("series terms " + std::to_string(Z.terms) + ", grid m = " + std::to_string(kit.m()));
  return o;
}

Outcome exit_convergence() {
  // [0, a] coordinates of the spectrally negative process: x = 1 - y, a = 2,
  // so DN there is ND on [-1, 1] for the matrix chain.
  const double a = 2.0, x = 1.0;
  const double exact = mean_exit(ExitKind::DN, x, a, 1.5);
  const BoundaryPair nd = BoundaryPair::parse("ND");
  std::vector<double> errs;
  std::ostringstream seq;
  for (std::size_t n : {9, 19, 39, 79, 159}) {
    const double h = 2.0 / static_cast<double>(n + 1);
    const auto q = build_restricted(stable15, compute_coeffs(stable15, h, 4 * (n + 1)), n, nd);
    const double m = mean_absorption(q, static_cast<long>((n + 1) / 2));
    errs.push_back(std::abs(m - exact) / exact);
    seq << (errs.size() > 1 ? ", " : "") << fmt("%.3e", errs.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];

  const std::size_t n = 79;
  const double h = 2.0 / static_cast<double>(n + 1);
  const auto q = build_restricted(stable15, compute_coeffs(stable15, h, 4 * (n + 1)), n, nd);
  const auto times = ctmc_absorption_times(q, (n + 1) / 2, 100000, 9, 0);
  const double mc = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  const double mc_rel = std::abs(mc - exact) / exact;

  const double near_one = mean_exit(ExitKind::DN, x, a, 1.01);
  const double lim_rel = std::abs(near_one - (a - x)) / (a - x);

  Outcome o;
  o.pass = decreasing && errs.back() <= 0.02 && mc_rel <= 0.05 && lim_rel <= 0.02;
  o.detail = "rel err over n=9..159 " + std::string(decreasing ? "decreasing" : "not decreasing") +
             ", final " + fmt("%.2e", errs.back()) + "; MC (n=79) rel err " + fmt("%.2e", mc_rel) +
             "; alpha=1.01 vs a-x rel " + fmt("%.2e", lim_rel);
  o.notes.push_back("closed form " + fmt("%.7f", exact) + ", errors " + seq.str());
  return o;
}

Outcome invariant_measure() {
  std::vector<double> dev;
  std::ostringstream seq;
  for (std::size_t n : {9, 19, 39, 79}) {
    const double h = 2.0 / static_cast<double>(n + 1);
    const auto q = build_restricted(stable15, compute_coeffs(stable15, h, 4 * (n + 1)), n,
                                    BoundaryPair::parse("NN"));
    const Eigen::VectorXd pi = stationary_interior(q);
    dev.push_back((pi.array() - 1.0 / static_cast<double>(n)).abs().maxCoeff());
    seq << (dev.size() > 1 ? ", " : "") << fmt("%.3e", dev.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < dev.size(); ++i) decreasing = decreasing && dev[i] < dev[i - 1];
  const bool factor = 4.0 * dev.back() < dev.front();
  Outcome o;
  o.pass = decreasing && factor;
  o.detail = "sup |pi_i - 1/n| over n=9,19,39,79: " + seq.str() + "; monotone decrease " +
             (decreasing ? "yes" : "no") + ", 4x reduction " + (factor ? "yes" : "no");
  return o;
}

// staircase version of t -> t - 1 + 1/n on [0, 1), then 1
StepPath ramp_family(std::size_t n, double T, double step) {
  StepPathBuilder b(-1.0 + 1.0 / static_cast<double>(n));
  for (double t = step; t < 1.0 - 0.5 * step; t += step) b.jump(t, t - 1.0 + 1.0 / static_cast<double>(n));
  b.jump(1.0, 1.0);
  return std::move(b).finish(T);
}

Outcome j1_counterexamples() {
  Outcome o;
  bool ok = true;
  const double T = 3.0;
  const StepPath f(T, 0.0, {1.0}, {1.0});
  const StepPath nf = fast_forward(f, Region::above(0.0));
  std::ostringstream first;
  for (std::size_t n : {2, 5, 10, 100}) {
    const StepPath fn(T, 1.0 / static_cast<double>(n), {1.0}, {1.0});
    const auto d = j1_distance(fast_forward(fn, Region::above(0.0)), nf, 1.0);
    ok = ok && d.lower >= 1.0 - 1.0 / static_cast<double>(n) - 1e-12;
    first << (n > 2 ? ", " : "") << "n=" << n << " " << fmt("%.4f", d.lower);
  }
  const auto d2 = j1_distance(fast_forward(ramp_family(2, T, 1e-3), Region::above(0.0)), nf, 1.0);
  ok = ok && d2.lower >= 0.4;

  // value-preserving time dithers of grid paths
  const std::size_t n = 9;
  const auto c = compute_coeffs(stable15, 2.0 / static_cast<double>(n + 1), 400);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> worst(eps.size(), 0.0);
  for (std::size_t k = 0; k < 20; ++k) {
    const StepPath p = testing::to_grid(testing::lattice_walk(c, 5, 2.0, 10, k), n);
    const StepPath np = fast_forward(p, Region::between(-1.0, 1.0));
    // compare up to a continuity point of the unperturbed output
    const auto& ne = np.epochs();
    const auto after = std::upper_bound(ne.begin(), ne.end(), 0.5 * np.horizon());
    const double gap_lo = after == ne.begin() ? 0.0 : *(after - 1);
    const double gap_hi = after == ne.end() ? np.horizon() : *after;
    const double Tc = 0.5 * (gap_lo + gap_hi);
    Rng rng = make_stream(11, k);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> dir(p.jump_count());
    for (auto& d : dir) d = u(rng);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      std::vector<double> e = p.epochs();
      for (std::size_t j = 0; j < e.size(); ++j) {
        const double lo = j == 0 ? 0.0 : p.epochs()[j - 1];
        const double hi = j + 1 < e.size() ? p.epochs()[j + 1] : p.horizon();
        const double half = 0.5 * std::min(e[j] - lo, hi - e[j]);
        e[j] += eps[i] * dir[j] * half;
      }
      const StepPath pe(p.horizon(), p.initial(), e, p.values());
      const StepPath npe = fast_forward(pe, Region::between(-1.0, 1.0));
      worst[i] = std::max(worst[i], j1_distance(npe, np, Tc).upper);
    }
  }
  bool mono = true;
  for (std::size_t i = 1; i < worst.size(); ++i) mono = mono && worst[i] < worst[i - 1];
  ok = ok && mono && worst.back() < 1e-2 * worst.front();
  o.pass = ok;
  o.detail = "first family lower bounds " + first.str() + "; ramp family n=2 lower " +
             fmt("%.4f", d2.lower) + "; dithered upper bounds " + (mono ? "monotone" : "not monotone");
  std::ostringstream dith;
  for (std::size_t i = 0; i < eps.size(); ++i) dith << (i ? ", " : "") << "eps=" << fmt("%.0e", eps[i]) << " " << fmt("%.3e", worst[i]);
  o.notes.push_back("dithered: " + dith.str());
  return o;
}

}  // namespace

int main() {
  run(1, "grunwald-oracle", 1.0, grunwald_oracle);
  run(2, "matrix-validity", 5.0, matrix_validity);
  run(3, "stopped-resolvent", 30.0, stopped_resolvent);
  run(4, "fast-forward-landing-law", 60.0, landing_law);
  run(5, "boundary-law-equality", 600.0, law_equality);
  run(6, "pathwise-identities", 600.0, pathwise);
  run(7, "scale-identities", 10.0, scale_identities);
  run(8, "exit-time-convergence", 600.0, exit_convergence);
  run(9, "nn-invariant-measure", 600.0, invariant_measure);
  run(10, "j1-counterexamples", 600.0, j1_counterexamples);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
