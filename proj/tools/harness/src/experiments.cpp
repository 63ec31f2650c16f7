#include "oneside/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "oneside/error.hpp"
#include "oneside/grunwald.hpp"
#include "oneside/paths.hpp"
#include "oneside/ratemat.hpp"
#include "oneside/scale.hpp"
#include "oneside/simulate.hpp"

namespace oneside::harness {
namespace {

constexpr const char* kBridge =
    "matrix state i of n sits at x_i = -1 + 2i/(n+1) on [-1, 1]; scale functions use y in [0, a] "
    "for the dual (spectrally negative) process with y = a(1 - x)/2 and time scaled by (a/2)^alpha, "
    "so DN on [0, a] corresponds to the ND matrix";

double mesh(std::size_t n) { return 2.0 / static_cast<double>(n + 1); }

struct Context {
  const Config& cfg;
  const RunOptions& opts;
  std::uint64_t seed;
  unsigned threads;
  Report& report;

  void save(const Table& t, const std::string& stem) {
    report.files.push_back(t.save(opts.out, report.kind + "_" + stem, opts.format));
  }
};

std::size_t first_n(const Config& cfg) {
  const auto ns = cfg.sizes("n", {9});
  if (ns.empty()) throw Error(ErrorCode::ConfigError, "n must not be empty");
  return ns.front();
}

std::vector<BoundaryPair> pairs_of(const Config& cfg) {
  if (!cfg.has("boundary") || cfg.str("boundary") == "all") return BoundaryPair::all();
  return {make_boundary(cfg)};
}

void run_coeffs(Context& ctx) {
  const auto exp = make_symbol(ctx.cfg);
  const double h = ctx.cfg.has("h") ? ctx.cfg.num("h") : mesh(first_n(ctx.cfg));
  const std::size_t J = ctx.cfg.size("j_max", 64);
  const auto c = compute_coeffs(exp, h, J);
  Table t{{"j", "G_j", "T_j"}, {}};
  for (std::size_t j = 0; j <= J; ++j) t.rows.push_back({static_cast<double>(j), c.G(j), c.T(j)});
  ctx.save(t, "coeffs");

  bool signs = c.G(0) > 0.0 && c.G(1) < 0.0;
  long double others = c.G(0);
  for (std::size_t j = 2; j <= J; ++j) {
    signs = signs && c.G(j) >= 0.0;
    others += c.G(j);
  }
  others += c.T(J + 1);  // sum_{j > J} G_j
  auto& m = ctx.report.metrics;
  m.push_back(Metric::flag("sign_pattern", signs));
  m.push_back(Metric::compare("row_identity", static_cast<double>(others), -c.G(1),
                              ctx.cfg.num("tolerance.row", 1e-10), true));
  // division by radius^j amplifies rounding; keep radius^{-J} near 1e3
  const double radius = ctx.cfg.num("oracle.radius", std::max(0.9, std::pow(10.0, -3.0 / static_cast<double>(J))));
  const auto oracle = verify_coeffs_cauchy(exp, h, J, radius);
  double gmax = 0.0, diff = 0.0;
  for (std::size_t j = 0; j <= J; ++j) {
    gmax = std::max(gmax, std::abs(c.G(j)));
    diff = std::max(diff, std::abs(oracle.g[j] - c.G(j)));
  }
  m.push_back(Metric::bound("fourier_oracle_rel_err", diff / gmax, ctx.cfg.num("tolerance.oracle", 1e-8)));
  m.push_back(Metric::flag("fourier_oracle_no_aliasing", !oracle.aliasing_warning));
  ctx.report.notes.push_back("oracle nodes " + std::to_string(oracle.nodes));
}

double expected_left_rate(const GrunwaldCoeffs& c, LeftBoundary b) {
  switch (b) {
    case LeftBoundary::D: return -c.G(1);
    case LeftBoundary::N: return c.G(0);
    case LeftBoundary::NStar: return -(c.G(0) + c.G(1));
  }
  return 0.0;
}

void run_matrix(Context& ctx, bool write) {
  const auto exp = make_symbol(ctx.cfg);
  auto& m = ctx.report.metrics;
  for (std::size_t n : ctx.cfg.sizes("n", {9})) {
    const auto c = compute_coeffs(exp, mesh(n), std::max<std::size_t>(4 * (n + 1), ctx.cfg.size("j_max", 0)));
    for (const auto& bc : pairs_of(ctx.cfg)) {
      const auto q = build_restricted(exp, c, n, bc);
      const auto rep = inspect_matrix(q, c);
      const std::string tag = bc.label() + "/n=" + std::to_string(n) + "/";
      m.push_back(Metric::bound(tag + "row_sum", rep.max_row_sum / rep.scale, ctx.cfg.num("tolerance.row", 1e-10)));
      m.push_back(Metric::flag(tag + "off_diagonal_nonnegative", rep.min_off_diagonal >= 0.0));
      m.push_back(Metric::flag(tag + "absorbing_rows_zero", rep.absorbing_rows_zero));
      const long last = static_cast<long>(n);
      m.push_back(Metric::compare(tag + "holding_rate_left", -q.at(1, 1), expected_left_rate(c, bc.left), 0.0));
      m.push_back(Metric::compare(tag + "holding_rate_right", -q.at(last, last),
                                  bc.right == RightBoundary::D ? -c.G(1) : c.G(0), 0.0));
      double interior = 0.0;
      for (long i = 2; i < last; ++i) interior = std::max(interior, std::abs(q.at(i, i) - c.G(1)));
      m.push_back(Metric::bound(tag + "holding_rate_interior", interior, 0.0));
      if (!write) continue;
      Table t{{"i", "x_i"}, {}};
      for (long j = 0; j <= last + 1; ++j) t.header.push_back("q_" + std::to_string(j));
      for (long i = 0; i <= last + 1; ++i) {
        std::vector<double> row{static_cast<double>(i), q.grid(i)};
        for (long j = 0; j <= last + 1; ++j) row.push_back(q.at(i, j));
        t.rows.push_back(std::move(row));
      }
      std::string label = bc.label();
      std::replace(label.begin(), label.end(), '*', 's');
      ctx.save(t, label + "_n" + std::to_string(n));
    }
  }
}

struct WalkSetup {
  std::size_t n;
  BoundaryPair bc;
  long i0;
  ExcursionOptions opts;
  GrunwaldCoeffs c;
};

WalkSetup walk_setup(const Config& cfg, const LaplaceExponent& exp) {
  WalkSetup w{first_n(cfg), make_boundary(cfg), 0, {}, {}};
  w.i0 = static_cast<long>(cfg.size("start", (w.n + 1) / 2));
  if (w.i0 < 1 || w.i0 > static_cast<long>(w.n)) throw Error(ErrorCode::ConfigError, "start must be an interior state");
  w.opts.literal_steps = cfg.size("sim.literal_steps", 1000);
  w.c = compute_coeffs(exp, mesh(w.n), std::max(4 * (w.n + 1), w.opts.literal_steps + w.n + 12));
  return w;
}

nlohmann::json path_json(std::size_t k, const StepPath& p) {
  return {{"path", k},
          {"horizon", p.horizon()},
          {"initial", p.initial()},
          {"epochs", p.epochs()},
          {"values", p.values()}};
}

void run_simulate(Context& ctx) {
  const auto exp = make_symbol(ctx.cfg);
  const auto w = walk_setup(ctx.cfg, exp);
  const double T = ctx.cfg.num("T", 1.0);
  const std::size_t paths = ctx.cfg.size("sim.paths", 1000);
  if (ctx.opts.format == "json") {
    const BoundarySimulator sim(w.c, w.n, SideRules::from(w.bc), w.opts);
    std::vector<std::string> lines(paths);
    parallel_for(paths, ctx.threads, [&](std::size_t k) {
      Rng rng = make_stream(ctx.seed, k);
      StepPath p = apply_boundary(sim.run(w.i0, T, rng), w.bc, w.n);
      if (p.horizon() > T) p = p.truncate(T);
      lines[k] = path_json(k, p).dump();
    });
    const std::string name = ctx.report.kind + "_paths.jsonl";
    std::ofstream out(ctx.opts.out / name, std::ios::binary);
    for (const auto& l : lines) out << l << "\n";
    ctx.report.files.push_back(name);
    ctx.report.metrics.push_back(Metric::compare("paths_written", static_cast<double>(lines.size()),
                                                 static_cast<double>(paths), 0.0));
    return;
  }
  const auto times = ctx.cfg.nums("times", {T});
  const auto emp = mapped_marginals(w.c, w.bc, w.n, w.i0, times, paths, ctx.seed, ctx.threads, w.opts);
  const Lattice lat{w.n};
  Table t{{"t", "state", "x", "probability"}, {}};
  for (std::size_t r = 0; r < times.size(); ++r) {
    for (long i = 0; i <= static_cast<long>(w.n) + 1; ++i) {
      t.rows.push_back({times[r], static_cast<double>(i), lat.value(i), emp(static_cast<Eigen::Index>(r), i)});
    }
    ctx.report.metrics.push_back(Metric::compare("mass t=" + format_double(times[r]),
                                                 emp.row(static_cast<Eigen::Index>(r)).sum(), 1.0, 1e-12));
  }
  ctx.save(t, "histogram");
}

void run_semigroup(Context& ctx) {
  const auto exp = make_symbol(ctx.cfg);
  const auto w = walk_setup(ctx.cfg, exp);
  const auto q = build_restricted(exp, w.c, w.n, w.bc);
  const auto times = ctx.cfg.nums("times", {0.1, 0.5, 1.0});
  const std::size_t paths = ctx.cfg.size("sim.paths", 0);
  Eigen::MatrixXd emp;
  if (paths > 0) emp = mapped_marginals(w.c, w.bc, w.n, w.i0, times, paths, ctx.seed, ctx.threads, w.opts);
  Table t{{"t", "state", "x", "exact"}, {}};
  if (paths > 0) t.header.push_back("empirical");
  for (std::size_t r = 0; r < times.size(); ++r) {
    const Eigen::VectorXd row = semigroup_row(q, times[r], w.i0);
    for (long i = 0; i <= static_cast<long>(w.n) + 1; ++i) {
      std::vector<double> line{times[r], static_cast<double>(i), q.grid(i), row[i]};
      if (paths > 0) line.push_back(emp(static_cast<Eigen::Index>(r), i));
      t.rows.push_back(std::move(line));
    }
    const std::string at = " t=" + format_double(times[r]);
    ctx.report.metrics.push_back(Metric::compare("row_mass" + at, row.sum(), 1.0, 1e-10));
    if (paths > 0) {
      const Eigen::VectorXd e = emp.row(static_cast<Eigen::Index>(r)).transpose();
      ctx.report.metrics.push_back(
          Metric::bound("total_variation" + at, total_variation(e, row), ctx.cfg.num("tolerance.tv", 0.02)));
    }
  }
  ctx.save(t, "marginals");
}

ScaleKit make_kit(const Config& cfg, double q, std::size_t m_default) {
  ScaleOptions so;
  so.allow_laplace_inversion = cfg.str("scale.inversion", "off") == "on";
  so.stehfest_order = static_cast<int>(cfg.size("scale.stehfest_order", 12));
  return ScaleKit(make_symbol(cfg), {cfg.num("grid.a", 1.0), cfg.size("grid.m", m_default), q}, so);
}

void run_resolvent(Context& ctx) {
  const double q = ctx.cfg.nums("q", {1.0}).front();
  const auto kit = make_kit(ctx.cfg, q, 8192);
  const double x = ctx.cfg.num("x", 0.5 * kit.a());
  const double tol = ctx.cfg.num("tolerance.mass", 1e-6);
  const auto dn = resolvent_density_DN(kit, x);
  auto& m = ctx.report.metrics;
  Table t{{"y", "density_DN"}, {}};
  if (q > 0.0) {
    m.push_back(Metric::compare("DN_mass", dn.mass, dn.expected_mass, tol));
  }
  m.push_back(Metric::bound("DN_negative_part", std::max(0.0, -dn.min_density), 1e-10));
  std::optional<ResolventDensity> nn;
  if (q > 0.0) {
    nn = resolvent_density_NN(kit, x);
    t.header.push_back("density_NN");
    m.push_back(Metric::compare("NN_mass", nn->mass, 1.0 / q, tol));
    m.push_back(Metric::bound("NN_negative_part", std::max(0.0, -nn->min_density), 1e-10));
  } else {
    ctx.report.notes.push_back("NN resolvent needs q > 0; omitted");
  }
  for (std::size_t k = 0; k < dn.y.size(); ++k) {
    std::vector<double> row{dn.y[k], dn.density[k]};
    if (nn) row.push_back(nn->density[k]);
    t.rows.push_back(std::move(row));
  }
  ctx.save(t, "density");
}

void run_scale(Context& ctx) {
  const double q = ctx.cfg.nums("q", {1.0}).front();
  const auto kit = make_kit(ctx.cfg, q, 8192);
  const auto x = kit.nodes();
  const std::size_t stride = std::max<std::size_t>(1, ctx.cfg.size("output.stride", kit.m() / 256));
  Table t{{"x", "W", "Wq", "Zq"}, {}};
  for (std::size_t k = 0; k < x.size(); k += stride) t.rows.push_back({x[k], kit.W(x[k]), kit.Wq(x[k]), kit.Zq(x[k])});
  ctx.save(t, "functions");
  if (!kit.closed_form()) {
    ctx.report.notes.push_back("series checks need the stable closed form; skipped");
    return;
  }
  const double tol = ctx.cfg.num("tolerance.series", 1e-8);
  const std::vector<double> one(x.size(), 1.0);
  const auto z = kit.Zq_apply(one);
  double zrel = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) zrel = std::max(zrel, std::abs(z.values[k] - kit.Zq(x[k])) / kit.Zq(x[k]));
  const auto w = kit.sample([&](double s) { return kit.W(s); });
  const auto zw = kit.Zq_apply(w);
  const auto izw = kit.integrate(zw.values);
  double werr = 0.0, ierr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    werr = std::max(werr, std::abs(q * zw.values[k] - q * kit.Wq(x[k])));
    ierr = std::max(ierr, std::abs(q * izw[k] - (kit.Zq(x[k]) - 1.0)));
  }
  auto& m = ctx.report.metrics;
  m.push_back(Metric::bound("Z_series_rel_err", zrel, tol));
  m.push_back(Metric::bound("qZ[W]_minus_qWq", werr, tol));
  m.push_back(Metric::bound("qIZ[W]_minus_Z_plus_1", ierr, tol));
  ctx.report.notes.push_back("series terms " + std::to_string(z.terms));
}

void run_exit(Context& ctx) {
  const auto exp = make_symbol(ctx.cfg);
  if (!exp.is_stable()) throw Error(ErrorCode::UnsupportedCombination, "exit closed forms need the stable kind");
  const double alpha = *exp.index();
  const double a = ctx.cfg.num("grid.a", 1.0);
  const double x = ctx.cfg.num("x", 0.5 * a);
  const std::size_t m = ctx.cfg.size("grid.m", 1024);
  Table t{{"q", "laplace_DN"}, {}};
  for (double q : ctx.cfg.nums("q", {0.5, 1.0, 2.0})) {
    const ScaleKit kit(exp, {a, m, q});
    t.rows.push_back({q, exit_laplace_DN(kit, x)});
  }
  ctx.save(t, "laplace");
  const double dq = ctx.cfg.num("exit.dq", 1e-5);
  const ScaleKit small(exp, {a, m, dq});
  const double slope = (1.0 - exit_laplace_DN(small, x)) / dq;
  const double mean = mean_exit(ExitKind::DN, x, a, alpha);
  ctx.report.metrics.push_back(Metric::compare("mean_DN_vs_laplace_slope", slope, mean,
                                               ctx.cfg.num("tolerance.slope", 1e-3), true));
  ctx.report.notes.push_back("mean DN " + format_double(mean) + ", mean DN* " +
                             format_double(mean_exit(ExitKind::DNStar, x, a, alpha)) + ", mean ND " +
                             format_double(mean_exit(ExitKind::ND, x, a, alpha)));
}

void run_convergence(Context& ctx) {
  const auto exp = make_symbol(ctx.cfg);
  if (!exp.is_stable()) throw Error(ErrorCode::UnsupportedCombination, "convergence needs the stable kind");
  const double alpha = *exp.index();
  // scale coordinates on [0, 2]: y = 1 - x
  const double y = ctx.cfg.num("x", 1.0);
  const double exact = mean_exit(ExitKind::DN, y, 2.0, alpha);
  const auto nd = BoundaryPair::parse("ND");
  Table t{{"n", "h", "mean_absorption", "closed_form", "rel_err"}, {}};
  std::vector<double> logh, logerr, errs;
  for (std::size_t n : ctx.cfg.sizes("n", {9, 19, 39, 79})) {
    const double h = mesh(n);
    const long i0 = Lattice{n}.index(1.0 - y);
    const auto q = build_restricted(exp, compute_coeffs(exp, h, 4 * (n + 1)), n, nd);
    const double mean = mean_absorption(q, i0);
    const double rel = std::abs(mean - exact) / exact;
    t.rows.push_back({static_cast<double>(n), h, mean, exact, rel});
    errs.push_back(rel);
    logh.push_back(std::log(h));
    logerr.push_back(std::log(rel));
  }
  ctx.save(t, "errors");
  bool decreasing = true;
  for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
  auto& m = ctx.report.metrics;
  m.push_back(Metric::flag("error_decreasing", decreasing));
  m.push_back(Metric::bound("final_rel_err", errs.back(), ctx.cfg.num("tolerance.rel", 0.02)));
  if (errs.size() >= 2) {
    const double mh = std::accumulate(logh.begin(), logh.end(), 0.0) / logh.size();
    const double me = std::accumulate(logerr.begin(), logerr.end(), 0.0) / logerr.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < logh.size(); ++i) {
      sxy += (logh[i] - mh) * (logerr[i] - me);
      sxx += (logh[i] - mh) * (logh[i] - mh);
    }
    ctx.report.notes.push_back("fitted order " + format_double(sxy / sxx));
  }
}

StepPath read_path(const std::string& file, std::size_t line_index) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open path file " + file);
  std::string line;
  for (std::size_t i = 0; i <= line_index; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, file + ": no path on line " + std::to_string(line_index));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
    return StepPath(j.at("horizon").get<double>(), j.at("initial").get<double>(),
                    j.at("epochs").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, file + ": " + e.what());
  }
}

void run_j1(Context& ctx) {
  const auto line = ctx.cfg.size("j1.line", 0);
  const StepPath a = read_path(ctx.cfg.str("j1.a"), line);
  const StepPath b = read_path(ctx.cfg.str("j1.b"), ctx.cfg.size("j1.line_b", line));
  const double T = ctx.cfg.num("T", std::min(a.horizon(), b.horizon()));
  const auto d = j1_distance(a, b, T, ctx.cfg.size("j1.window", 8));
  ctx.save(Table{{"T", "upper", "lower"}, {{T, d.upper, d.lower}}}, "distance");
  ctx.report.metrics.push_back(Metric::flag("lower_le_upper", d.lower <= d.upper));
  if (ctx.cfg.has("tolerance.j1")) {
    ctx.report.metrics.push_back(Metric::bound("j1_upper", d.upper, ctx.cfg.num("tolerance.j1")));
  }
}

using Runner = std::function<void(Context&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"coeffs", run_coeffs},
      {"matrix", [](Context& c) { run_matrix(c, true); }},
      {"validate", [](Context& c) { run_matrix(c, false); }},
      {"simulate", run_simulate},
      {"semigroup", run_semigroup},
      {"resolvent", run_resolvent},
      {"scale", run_scale},
      {"exit", run_exit},
      {"convergence", run_convergence},
      {"j1", run_j1},
  };
  return table;
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + file.string());
  out << j.dump(2) << "\n";
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : runners()) k.push_back(name);
    return k;
  }();
  return kinds;
}

Report run_experiment(const Config& cfg, const RunOptions& opts) {
  Report report;
  report.kind = cfg.str("kind");
  report.source = cfg.source();
  report.bridge = kBridge;
  const auto it = runners().find(report.kind);
  if (it == runners().end()) throw Error(ErrorCode::ConfigError, "unknown experiment kind '" + report.kind + "'");
  if (opts.format != "csv" && opts.format != "json") {
    throw Error(ErrorCode::ConfigError, "format must be csv or json");
  }
  report.seed = opts.seed ? *opts.seed : cfg.u64("sim.seed", 1);
  for (const auto& [k, v] : cfg.entries()) report.params.emplace_back(k, v);
  report.params.emplace_back("format", opts.format);

  std::error_code ec;
  std::filesystem::create_directories(opts.out, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot create output directory " + opts.out.string());

  Context ctx{cfg, opts, report.seed, resolve_threads(opts.threads), report};
  const auto start = std::chrono::steady_clock::now();
  try {
    it->second(ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    report.error = e.what();
    report.error_code = std::string(to_string(e.code()));
  }
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(opts.out / "report.json", to_json(report));
  return report;
}

int exit_status(const Report& r) {
  if (!r.error.empty()) return 3;
  return r.passed() ? 0 : 1;
}

SuiteResult run_suite(const std::filesystem::path& dir, const RunOptions& opts) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::ConfigError, dir.string() + " is not a directory");
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  }
  if (files.empty()) throw Error(ErrorCode::ConfigError, "no *.cfg files in " + dir.string());
  std::sort(files.begin(), files.end());

  SuiteResult result;
  nlohmann::json entries = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& f : files) {
    RunOptions sub = opts;
    sub.out = opts.out / f.stem();
    const Config cfg = Config::load(f);
    Report r = run_experiment(cfg, sub);
    const int status = exit_status(r);
    if (status != 0) ++failed;
    result.status = std::max(result.status, status);
    auto j = to_json(r);
    j["name"] = f.stem().string();
    j["status"] = status;
    entries.push_back(std::move(j));
    result.reports.push_back(std::move(r));
  }
  std::filesystem::create_directories(opts.out, ec);
  write_json(opts.out / "suite.json",
             {{"experiments", entries}, {"total", files.size()}, {"failed", failed}, {"pass", failed == 0}});
  return result;
}

}  // namespace oneside::harness
