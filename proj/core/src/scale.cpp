#include "oneside/scale.hpp"

#include "oneside/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace oneside {

namespace {

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

double ml_positive(double gamma, double beta, double x) {
  Neumaier s;
  const double lx = std::log(x);
  const double peak = std::pow(x, 1.0 / gamma);
  for (int n = 0; n < 100000; ++n) {
    const double arg = gamma * n + beta;
    const double term = std::exp(n * lx - std::lgamma(arg));
    s.add(term);
    if (arg > peak + 2.0 && term < 1e-18 * s.value()) return s.value();
  }
  throw Error(ErrorCode::SeriesNotConverged, "Mittag-Leffler series did not converge");
}

double ml_negative(double gamma, double beta, double x) {
  using mp = boost::multiprecision::cpp_bin_float_100;
  const double ax = -x;
  // largest term is about exp(|x|^{1/gamma}); keep at least 20 digits
  if (std::pow(ax, 1.0 / gamma) / std::numbers::ln10 > 80.0) {
    throw Error(ErrorCode::RangeExceeded, "Mittag-Leffler argument too negative for this order");
  }
  const mp lx = boost::multiprecision::log(mp(ax));
  const double peak = std::pow(ax, 1.0 / gamma);
  mp sum = 0;
  mp max_term = 0;
  for (int n = 0; n < 100000; ++n) {
    const mp arg = mp(gamma) * n + beta;
    const mp mag = boost::multiprecision::exp(n * lx - boost::multiprecision::lgamma(arg));
    sum += (n % 2 == 0) ? mag : mp(-mag);
    if (mag > max_term) max_term = mag;
    if (arg > peak + 2.0 && mag < 1e-40 * max_term) {
      return static_cast<double>(sum);
    }
  }
  throw Error(ErrorCode::SeriesNotConverged, "Mittag-Leffler series did not converge");
}

// (1+u)^p - 2 + (1-u)^p scaled by d^p, u = 1/d, i.e. the second difference of
// y^p at d.
double second_difference(double p, double d) {
  if (d < 16.0) {
    return std::pow(d + 1.0, p) - 2.0 * std::pow(d, p) + std::pow(d - 1.0, p);
  }
  const double u2 = 1.0 / (d * d);
  long double term = p * (p - 1.0) / 2.0;  // binom(p, 2)
  long double acc = 0.0L;
  long double upow = u2;
  for (int k = 2; k < 200; k += 2) {
    acc += 2.0L * term * upow;
    term *= (p - k) * (p - k - 1.0) / ((k + 1.0) * (k + 2.0));
    upow *= u2;
    if (std::abs(term * upow) < 1e-21L * std::abs(acc)) break;
  }
  return static_cast<double>(std::pow(static_cast<long double>(d), p) * acc);
}

// (k-1)^{p} - (k-p)k^{p-1}, p = nu + 1
double first_weight(double p, double k) {
  if (k < 16.0) return std::pow(k - 1.0, p) - (k - p) * std::pow(k, p - 1.0);
  // k^p [ (1 - 1/k)^p - 1 + p/k ] = k^p sum_{i>=2} binom(p, i) (-1/k)^i
  const long double u = -1.0L / k;
  long double term = p * (p - 1.0) / 2.0;
  long double upow = u * u;
  long double acc = 0.0L;
  for (int i = 2; i < 200; ++i) {
    acc += term * upow;
    term *= (p - i) / (i + 1.0);
    upow *= u;
    if (std::abs(term * upow) < 1e-21L * std::abs(acc)) break;
  }
  return static_cast<double>(std::pow(static_cast<long double>(k), p) * acc);
}

}  // namespace

double mittag_leffler(double gamma, double beta, double x) {
  if (!(gamma > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Mittag-Leffler needs gamma, beta > 0");
  }
  if (!(std::abs(x) <= 100.0)) {
    throw Error(ErrorCode::RangeExceeded, "Mittag-Leffler argument outside [-100, 100]");
  }
  if (x == 0.0) return 1.0 / std::tgamma(beta);
  return x > 0.0 ? ml_positive(gamma, beta, x) : ml_negative(gamma, beta, x);
}

long double gaver_stehfest(const std::function<long double(long double)>& transform, double t,
                           int order) {
  if (order < 2 || order % 2 != 0 || order > 30) {
    throw Error(ErrorCode::InvalidArgument, "Gaver-Stehfest order must be even in [2, 30]");
  }
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "Gaver-Stehfest needs t > 0");
  const int half = order / 2;
  auto fact = [](int k) {
    long double f = 1.0L;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  const long double ln2 = std::numbers::ln2_v<long double>;
  long double acc = 0.0L;
  for (int k = 1; k <= order; ++k) {
    long double v = 0.0L;
    for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
      v += std::pow(static_cast<long double>(j), half) * fact(2 * j) /
           (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
    }
    if ((k + half) % 2 != 0) v = -v;
    acc += v * transform(k * ln2 / t);
  }
  return acc * ln2 / t;
}

/// Product integration of (1/Gamma(nu)) int_0^{x_k} (x_k - y)^{nu-1} g(y) dy
/// against the piecewise-linear interpolant of g, with starting weights on the
/// first nodes that make the rule exact for y^e, e in `exponents`.
class ScaleKit::ProductRule {
public:
  ProductRule(double nu, double h, std::size_t m, std::vector<double> exponents)
      : nu_(nu), m_(m), s_(exponents.size()) {
    const double p = nu + 1.0;
    const double norm = 1.0 / (nu * (nu + 1.0));
    scale_ = std::pow(h, nu) / std::tgamma(nu);
    interior_.assign(m + 1, 0.0);
    for (std::size_t d = 1; d <= m; ++d) interior_[d] = norm * second_difference(p, static_cast<double>(d));
    first_.assign(m + 1, 0.0);
    for (std::size_t k = 1; k <= m; ++k) first_[k] = norm * first_weight(p, static_cast<double>(k));
    last_ = norm;
    if (s_ == 0) return;

    // V_{i,l} = l^{e_i}, l = 1..s
    Eigen::MatrixXd v(static_cast<Eigen::Index>(s_), static_cast<Eigen::Index>(s_));
    for (std::size_t i = 0; i < s_; ++i) {
      for (std::size_t l = 0; l < s_; ++l) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = std::pow(l + 1.0, exponents[i]);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(v);
    start_.assign((m + 1) * s_, 0.0);
    std::vector<std::vector<double>> powers(s_, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < s_; ++i) {
      for (std::size_t j = 0; j <= m; ++j) powers[i][j] = std::pow(static_cast<double>(j), exponents[i]);
    }
    Eigen::VectorXd r(static_cast<Eigen::Index>(s_));
    for (std::size_t k = 1; k <= m; ++k) {
      for (std::size_t i = 0; i < s_; ++i) {
        const double e = exponents[i];
        const long double exact =
            boost::math::beta(nu, e + 1.0) * std::pow(static_cast<long double>(k), nu + e);
        long double rule = first_[k] * powers[i][0] + last_ * powers[i][k];
        for (std::size_t j = 1; j < k; ++j) rule += interior_[k - j] * powers[i][j];
        r(static_cast<Eigen::Index>(i)) = static_cast<double>(exact - rule);
      }
      const Eigen::VectorXd w = lu.solve(r);
      for (std::size_t l = 0; l < s_; ++l) start_[k * s_ + l] = w(static_cast<Eigen::Index>(l));
    }
  }

  std::vector<double> apply(std::span<const double> g) const {
    if (g.size() != m_ + 1) throw Error(ErrorCode::InvalidArgument, "grid function has wrong length");
    std::vector<double> out(m_ + 1, 0.0);
    for (std::size_t k = 1; k <= m_; ++k) {
      long double acc = first_[k] * g[0] + last_ * g[k];
      for (std::size_t j = 1; j < k; ++j) acc += interior_[k - j] * g[j];
      for (std::size_t l = 0; l < s_; ++l) acc += start_[k * s_ + l] * g[l + 1];
      out[k] = static_cast<double>(acc * scale_);
    }
    return out;
  }

private:
  double nu_;
  std::size_t m_;
  std::size_t s_;
  double scale_ = 1.0;
  double last_ = 0.0;
  std::vector<double> interior_;
  std::vector<double> first_;
  std::vector<double> start_;
};

ScaleKit::ScaleKit(const LaplaceExponent& exp, ScaleGrid grid, ScaleOptions opts)
    : exp_(exp), grid_(grid), opts_(opts) {
  if (!(grid.a > 0.0) || grid.m < 16 || !(grid.q >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scale grid needs a > 0, m >= 16, q >= 0");
  }
  if (exp.is_stable()) {
    alpha_ = *exp.index();
  } else {
    if (exp.index().has_value()) opts_.allow_laplace_inversion = true;
    if (!opts_.allow_laplace_inversion) {
      throw Error(ErrorCode::UnsupportedCombination,
                  "scale functions for this measure need Laplace inversion (opt in)");
    }
  }
  const double h = step();
  if (closed_form()) {
    const std::vector<double> singular{0.0, 1.0, alpha_ - 1.0, alpha_};
    kernel_rule_ = std::make_shared<const ProductRule>(alpha_, h, grid.m, singular);
    unit_rule_ = std::make_shared<const ProductRule>(1.0, h, grid.m, singular);
  } else {
    unit_rule_ = std::make_shared<const ProductRule>(1.0, h, grid.m, std::vector<double>{});
  }
}

std::vector<double> ScaleKit::nodes() const {
  std::vector<double> x(grid_.m + 1);
  for (std::size_t k = 0; k <= grid_.m; ++k) x[k] = grid_.a * static_cast<double>(k) / static_cast<double>(grid_.m);
  return x;
}

std::vector<double> ScaleKit::sample(const std::function<double(double)>& f) const {
  std::vector<double> out;
  for (double x : nodes()) out.push_back(f(x));
  return out;
}

double ScaleKit::W_inverted(double x, double q) const {
  if (!opts_.allow_laplace_inversion) {
    throw Error(ErrorCode::UnsupportedCombination, "Laplace inversion not enabled");
  }
  const long double s1 = std::numbers::ln2_v<long double> / x;
  if (q > 0.0 && !(exp_.psi_ld(s1) > q)) {
    throw Error(ErrorCode::UnsupportedCombination,
                "inversion unstable: smallest Stehfest node lies below the root of psi = q");
  }
  return static_cast<double>(gaver_stehfest(
      [&](long double s) { return 1.0L / (exp_.psi_ld(s) - static_cast<long double>(q)); }, x,
      opts_.stehfest_order));
}

double ScaleKit::W(double x) const {
  if (x <= 0.0) return 0.0;
  if (closed_form()) return std::pow(x, alpha_ - 1.0) / std::tgamma(alpha_);
  return W_inverted(x, 0.0);
}

double ScaleKit::Wq(double x) const {
  if (x <= 0.0) return 0.0;
  const double q = grid_.q;
  if (closed_form()) {
    return std::pow(x, alpha_ - 1.0) * mittag_leffler(alpha_, alpha_, q * std::pow(x, alpha_));
  }
  return q == 0.0 ? W_inverted(x, 0.0) : W_inverted(x, q);
}

double ScaleKit::Zq(double x) const {
  if (x <= 0.0) return 1.0;
  const double q = grid_.q;
  if (closed_form()) return mittag_leffler(alpha_, 1.0, q * std::pow(x, alpha_));
  if (q == 0.0) return 1.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return 1.0 + q * ts.integrate([&](double z) { return Wq(z); }, 0.0, x, 1e-8);
}

double ScaleKit::IZq(double x) const {
  if (x <= 0.0) return 0.0;
  const double q = grid_.q;
  if (closed_form()) return x * mittag_leffler(alpha_, 2.0, q * std::pow(x, alpha_));
  if (q == 0.0) return x;
  boost::math::quadrature::tanh_sinh<double> ts;
  return x + q * ts.integrate([&](double z) { return (x - z) * Wq(z); }, 0.0, x, 1e-8);
}

std::vector<double> ScaleKit::W_convolve(std::span<const double> g) const {
  if (g.size() != grid_.m + 1) throw Error(ErrorCode::InvalidArgument, "grid function has wrong length");
  if (closed_form()) return kernel_rule_->apply(g);
  const auto w = sample([&](double x) { return W(x); });
  return convolve(w, g);
}

std::vector<double> ScaleKit::integrate(std::span<const double> g) const {
  return unit_rule_->apply(g);
}

std::vector<double> ScaleKit::convolve(std::span<const double> f, std::span<const double> g) const {
  const std::size_t m = grid_.m;
  if (f.size() != m + 1 || g.size() != m + 1) {
    throw Error(ErrorCode::InvalidArgument, "grid function has wrong length");
  }
  const double h = step();
  std::vector<double> out(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    long double acc = 0.5L * (f[k] * g[0] + f[0] * g[k]);
    for (std::size_t j = 1; j < k; ++j) acc += f[k - j] * g[j];
    out[k] = static_cast<double>(acc * h);
  }
  return out;
}

SeriesResult ScaleKit::Zq_apply(std::span<const double> g) const {
  SeriesResult r;
  r.values.assign(g.begin(), g.end());
  const double q = grid_.q;
  double norm = 0.0;
  for (double v : g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "grid function must be finite");
    norm = std::max(norm, std::abs(v));
  }
  if (q == 0.0 || norm == 0.0) return r;
  const double a = grid_.a;
  const double log_qwa = std::log(q * W(a));
  std::vector<double> u(g.begin(), g.end());
  double qn = 1.0;
  for (std::size_t n = 1; n <= opts_.max_terms; ++n) {
    u = W_convolve(u);
    qn *= q;
    for (std::size_t k = 0; k < u.size(); ++k) r.values[k] += qn * u[k];
    r.terms = n;
    // bound on the next term relative to ||g||
    const double next = static_cast<double>(n + 1);
    r.remainder_bound = std::exp(next * log_qwa + n * std::log(a) - std::lgamma(next));
    if (r.remainder_bound < opts_.series_tol) return r;
  }
  throw Error(ErrorCode::SeriesNotConverged, "operator series did not converge within max_terms");
}

namespace {

double adaptive_mass(const std::function<double(double)>& f, double x, double a) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  if (x > 0.0) total += ts.integrate(f, 0.0, std::min(x, a), 1e-12);
  if (x < a) total += ts.integrate(f, std::max(x, 0.0), a, 1e-12);
  return total;
}

ResolventDensity tabulate(const ScaleKit& kit, double x, double expected,
                          const std::function<double(double)>& dens) {
  ResolventDensity out;
  out.y = kit.nodes();
  out.min_density = std::numeric_limits<double>::infinity();
  for (double y : out.y) {
    const double d = dens(y);
    out.density.push_back(d);
    out.min_density = std::min(out.min_density, d);
  }
  out.mass = adaptive_mass(dens, x, kit.a());
  out.expected_mass = expected;
  if (out.min_density < -1e-8) {
    throw Error(ErrorCode::InvalidArgument, "resolvent density is negative beyond tolerance");
  }
  return out;
}

}  // namespace

double resolvent_density_DN_at(const ScaleKit& kit, double x, double y) {
  return kit.Wq(x) / kit.Zq(kit.a()) * kit.Zq(kit.a() - y) - kit.Wq(x - y);
}

double resolvent_density_NN_at(const ScaleKit& kit, double x, double y) {
  return kit.Zq(x) / (kit.q() * kit.IZq(kit.a())) * kit.Zq(kit.a() - y) - kit.Wq(x - y);
}

ResolventDensity resolvent_density_DN(const ScaleKit& kit, double x) {
  if (!(x > 0.0 && x <= kit.a())) throw Error(ErrorCode::InvalidArgument, "DN resolvent needs x in (0, a]");
  const double expected = kit.q() > 0.0 ? (1.0 - exit_laplace_DN(kit, x)) / kit.q()
                                        : std::numeric_limits<double>::quiet_NaN();
  return tabulate(kit, x, expected, [&](double y) { return resolvent_density_DN_at(kit, x, y); });
}

ResolventDensity resolvent_density_NN(const ScaleKit& kit, double x) {
  if (!(kit.q() > 0.0)) throw Error(ErrorCode::InvalidArgument, "NN resolvent needs q > 0");
  if (!(x >= 0.0 && x <= kit.a())) throw Error(ErrorCode::InvalidArgument, "NN resolvent needs x in [0, a]");
  return tabulate(kit, x, 1.0 / kit.q(), [&](double y) { return resolvent_density_NN_at(kit, x, y); });
}

double exit_laplace_DN(const ScaleKit& kit, double x) {
  if (!(x > 0.0 && x <= kit.a())) throw Error(ErrorCode::InvalidArgument, "exit law needs x in (0, a]");
  const double a = kit.a();
  const double v = kit.Zq(x) - kit.q() * kit.IZq(a) / kit.Zq(a) * kit.Wq(x);
  if (v < -1e-8 || v > 1.0 + 1e-8) {
    throw Error(ErrorCode::RangeExceeded, "exit Laplace transform outside [0, 1]: " + std::to_string(v));
  }
  return v;
}

double mean_exit(ExitKind kind, double x, double a, double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw Error(ErrorCode::InvalidArgument, "mean_exit needs 1 < alpha < 2");
  if (!(x >= 0.0 && x <= a)) throw Error(ErrorCode::InvalidArgument, "mean_exit needs 0 <= x <= a");
  const double w = std::pow(x, alpha - 1.0) / std::tgamma(alpha);
  const double iw = std::pow(x, alpha) / std::tgamma(alpha + 1.0);
  switch (kind) {
    case ExitKind::DN: return a * w - iw;
    case ExitKind::DNStar: return a / (alpha - 1.0) * w - iw;
    case ExitKind::ND: return (std::pow(a, alpha) - std::pow(x, alpha)) / std::tgamma(alpha + 1.0);
  }
  return 0.0;
}

}  // namespace oneside
