#include "oneside/symbol.hpp"

#include "oneside/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace oneside {

namespace bq = boost::math::quadrature;

struct LaplaceExponent::Quad {
  explicit Quad(std::size_t levels) : finite(levels), half_line(levels) {}
  mutable bq::tanh_sinh<double> finite;
  mutable bq::exp_sinh<double> half_line;
};

namespace {

// e^{-x} - 1 + x without cancellation.
double compensated_exp(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0);
  }
  return std::expm1(-x) + x;
}

std::complex<double> compensated_exp(std::complex<double> z) {
  if (std::abs(z) < 1e-3) {
    const auto z2 = z * z;
    return z2 * (0.5 - z / 6.0 + z2 / 24.0 - z2 * z / 120.0);
  }
  return std::exp(-z) - 1.0 + z;
}

// w * density(y). Points so close to 0 that the density overflows carry no
// weight the quadrature can resolve; they count as 0.
template <class Density>
double weighted(double w, const Density& density, double y) {
  if (w == 0.0) return 0.0;
  const double v = w * density(y);
  return std::isfinite(v) ? v : 0.0;
}

// Upper incomplete gamma for a in (-2, -1) and (-1, 0), lifted from a + k > 0
// by Gamma(a + 1, z) = a Gamma(a, z) + z^a e^{-z}. Used for z <= 1 only,
// where the lift does not cancel.
double upper_gamma_negative(double a, double z) {
  int k = 0;
  while (a + k <= 0.0) ++k;
  double g = boost::math::tgamma(a + k, z);
  for (int i = k - 1; i >= 0; --i) {
    const double ai = a + i;
    g = (g - std::pow(z, ai) * std::exp(-z)) / ai;
  }
  return g;
}

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) {
    throw Error(ErrorCode::InvalidSpec, "alpha must lie in (1, 2), got " + std::to_string(alpha));
  }
}

void check_quadrature(double error, double l1, double tol, const char* what) {
  if (!std::isfinite(error) || error > 100.0 * tol * std::max(l1, 1e-300)) {
    throw Error(ErrorCode::QuadratureFailure,
                std::string(what) + ": error estimate " + std::to_string(error));
  }
}

}  // namespace

LaplaceExponent::LaplaceExponent(LevyMeasureSpec measure, QuadratureConfig quad)
    : measure_(std::move(measure)), quad_(quad) {
  if (auto* s = std::get_if<StableMeasure>(&measure_)) {
    check_alpha(s->alpha);
  } else if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    check_alpha(t->alpha);
    if (!(t->lambda >= 0.0) || !std::isfinite(t->lambda)) {
      throw Error(ErrorCode::InvalidSpec, "tempering lambda must be >= 0");
    }
  } else {
    const auto& c = std::get<CustomMeasure>(measure_);
    if (!c.density || !c.tail || !c.integrated_tail) {
      throw Error(ErrorCode::InvalidSpec, "custom measure needs density, tail and integrated tail");
    }
    double prev_tail = std::numeric_limits<double>::infinity();
    for (double y = 1e-4; y < 1e3; y *= 1.7) {
      const double d = c.density(y);
      const double tl = c.tail(y);
      if (!(d >= 0.0) || !(tl >= 0.0) || tl > prev_tail * (1.0 + 1e-12)) {
        throw Error(ErrorCode::InvalidSpec,
                    "custom density must be nonnegative and tail nonincreasing (y=" +
                        std::to_string(y) + ")");
      }
      prev_tail = tl;
    }
    if (!std::isfinite(c.integrated_tail(1.0))) {
      throw Error(ErrorCode::InvalidSpec, "integrated tail must be finite");
    }
  }
  q_ = std::make_shared<const Quad>(quad_.max_refinements);
}

LaplaceExponent LaplaceExponent::stable(double alpha) {
  return LaplaceExponent(StableMeasure{alpha});
}

LaplaceExponent LaplaceExponent::tempered_stable(double alpha, double lambda) {
  return LaplaceExponent(TemperedStableMeasure{alpha, lambda});
}

bool LaplaceExponent::is_stable() const noexcept {
  return std::holds_alternative<StableMeasure>(measure_);
}

bool LaplaceExponent::is_custom() const noexcept {
  return std::holds_alternative<CustomMeasure>(measure_);
}

std::optional<double> LaplaceExponent::index() const noexcept {
  if (auto* s = std::get_if<StableMeasure>(&measure_)) return s->alpha;
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) return t->alpha;
  return std::nullopt;
}

std::optional<double> LaplaceExponent::tempering() const noexcept {
  if (is_stable()) return 0.0;
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) return t->lambda;
  return std::nullopt;
}

double LaplaceExponent::psi(double xi) const {
  if (!(xi >= 0.0)) throw Error(ErrorCode::InvalidArgument, "psi needs xi >= 0");
  if (xi == 0.0) return 0.0;
  if (auto* s = std::get_if<StableMeasure>(&measure_)) return std::pow(xi, s->alpha);
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    const double a = t->alpha, l = t->lambda;
    if (l == 0.0) return std::pow(xi, a);
    // (xi+l)^a - l^a - a l^{a-1} xi, written to avoid cancellation for small xi/l
    const double r = xi / l;
    const double body = std::expm1(a * std::log1p(r)) - a * r;
    return std::pow(l, a) * body;
  }
  return custom_psi(xi);
}

double LaplaceExponent::psi_prime(double xi) const {
  if (!(xi >= 0.0)) throw Error(ErrorCode::InvalidArgument, "psi_prime needs xi >= 0");
  if (xi == 0.0) return 0.0;
  if (auto* s = std::get_if<StableMeasure>(&measure_)) return s->alpha * std::pow(xi, s->alpha - 1.0);
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    const double a = t->alpha, l = t->lambda;
    if (l == 0.0) return a * std::pow(xi, a - 1.0);
    return a * std::pow(l, a - 1.0) * std::expm1((a - 1.0) * std::log1p(xi / l));
  }
  return custom_psi_prime(xi);
}

std::complex<double> LaplaceExponent::psi(std::complex<double> s) const {
  if (auto* st = std::get_if<StableMeasure>(&measure_)) {
    if (s == 0.0) return 0.0;
    return std::pow(s, st->alpha);
  }
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    const double a = t->alpha, l = t->lambda;
    if (s == 0.0) return 0.0;
    return std::pow(s + l, a) - std::pow(l, a) - a * std::pow(l, a - 1.0) * s;
  }
  return custom_psi(s);
}

long double LaplaceExponent::psi_ld(long double xi) const {
  if (auto* s = std::get_if<StableMeasure>(&measure_)) {
    return xi == 0.0L ? 0.0L : std::pow(xi, static_cast<long double>(s->alpha));
  }
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    const long double a = t->alpha, l = t->lambda;
    if (xi == 0.0L) return 0.0L;
    if (l == 0.0L) return std::pow(xi, a);
    const long double r = xi / l;
    return std::pow(l, a) * (std::expm1(a * std::log1p(r)) - a * r);
  }
  return psi(static_cast<double>(xi));
}

std::complex<long double> LaplaceExponent::psi_ld(std::complex<long double> s) const {
  if (auto* st = std::get_if<StableMeasure>(&measure_)) {
    if (s == 0.0L) return 0.0L;
    return std::pow(s, static_cast<long double>(st->alpha));
  }
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    const long double a = t->alpha, l = t->lambda;
    if (s == 0.0L) return 0.0L;
    return std::pow(s + l, a) - std::pow(l, a) - a * std::pow(l, a - 1.0L) * s;
  }
  const auto v = custom_psi(std::complex<double>(static_cast<double>(s.real()),
                                                 static_cast<double>(s.imag())));
  return {v.real(), v.imag()};
}

double LaplaceExponent::levy_density(double y) const {
  if (!(y > 0.0)) return 0.0;
  if (auto* s = std::get_if<StableMeasure>(&measure_)) {
    return std::pow(y, -1.0 - s->alpha) / std::tgamma(-s->alpha);
  }
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    return std::exp(-t->lambda * y) * std::pow(y, -1.0 - t->alpha) / std::tgamma(-t->alpha);
  }
  return std::get<CustomMeasure>(measure_).density(y);
}

double LaplaceExponent::levy_tail(double y) const {
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "levy_tail needs y > 0");
  if (auto* s = std::get_if<StableMeasure>(&measure_)) {
    const double a = s->alpha;
    return std::pow(y, -a) / (a * std::tgamma(-a));
  }
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    if (t->lambda == 0.0) return LaplaceExponent::stable(t->alpha).levy_tail(y);
    const double z = t->lambda * y;
    if (z <= 1.0) {
      return std::pow(t->lambda, t->alpha) * upper_gamma_negative(-t->alpha, z) / std::tgamma(-t->alpha);
    }
    double err = 0.0, l1 = 0.0;
    const double v = q_->half_line.integrate(
        [&](double u) { return levy_density(y + u); }, quad_.rel_tol, &err, &l1);
    check_quadrature(err, l1, quad_.rel_tol, "levy_tail");
    return v;
  }
  return std::get<CustomMeasure>(measure_).tail(y);
}

double LaplaceExponent::integrated_tail(double x) const {
  if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "integrated_tail needs x > 0");
  if (auto* s = std::get_if<StableMeasure>(&measure_)) {
    const double a = s->alpha;
    return std::pow(x, 1.0 - a) / ((a - 1.0) * a * std::tgamma(-a));
  }
  if (auto* t = std::get_if<TemperedStableMeasure>(&measure_)) {
    if (t->lambda == 0.0) return LaplaceExponent::stable(t->alpha).integrated_tail(x);
    const double z = t->lambda * x;
    if (z <= 1.0) {
      const double a = t->alpha;
      // Gamma(1-a, z) - z Gamma(-a, z) with Gamma(-a, z) eliminated
      const double g = upper_gamma_negative(1.0 - a, z) * (1.0 + z / a) - std::pow(z, 1.0 - a) * std::exp(-z) / a;
      return std::pow(t->lambda, a - 1.0) * g / std::tgamma(-a);
    }
    double err = 0.0, l1 = 0.0;
    const double v = q_->half_line.integrate(
        [&](double u) { return u * levy_density(x + u); }, quad_.rel_tol, &err, &l1);
    check_quadrature(err, l1, quad_.rel_tol, "integrated_tail");
    return v;
  }
  return std::get<CustomMeasure>(measure_).integrated_tail(x);
}

double LaplaceExponent::custom_psi(double xi) const {
  const auto& c = std::get<CustomMeasure>(measure_);
  double err = 0.0, l1 = 0.0;
  // (0, 1]: compensated integrand is O(y^2) phi(dy) near zero
  const double near = q_->finite.integrate(
      [&](double y) { return weighted(compensated_exp(xi * y), c.density, y); }, 0.0, 1.0, quad_.rel_tol,
      &err, &l1);
  check_quadrature(err, l1, quad_.rel_tol, "psi (0,1]");
  // [1, inf): the algebraic part is carried by tail(1) and Phi(1)
  const double far = q_->half_line.integrate(
      [&](double u) { return weighted(std::exp(-xi * (1.0 + u)), c.density, 1.0 + u); }, quad_.rel_tol,
      &err, &l1);
  check_quadrature(err, l1, quad_.rel_tol, "psi [1,inf)");
  const double t1 = c.tail(1.0);
  return near + far - t1 + xi * (t1 + c.integrated_tail(1.0));
}

double LaplaceExponent::custom_psi_prime(double xi) const {
  const auto& c = std::get<CustomMeasure>(measure_);
  double err = 0.0, l1 = 0.0;
  const double near = q_->finite.integrate(
      [&](double y) { return weighted(-y * std::expm1(-xi * y), c.density, y); }, 0.0, 1.0, quad_.rel_tol,
      &err, &l1);
  check_quadrature(err, l1, quad_.rel_tol, "psi' (0,1]");
  const double far = q_->half_line.integrate(
      [&](double u) { return weighted((1.0 + u) * std::exp(-xi * (1.0 + u)), c.density, 1.0 + u); },
      quad_.rel_tol, &err, &l1);
  check_quadrature(err, l1, quad_.rel_tol, "psi' [1,inf)");
  return near + c.tail(1.0) + c.integrated_tail(1.0) - far;
}

std::complex<double> LaplaceExponent::custom_psi(std::complex<double> s) const {
  if (s.imag() == 0.0 && s.real() >= 0.0) return custom_psi(s.real());
  if (!(s.real() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "complex psi needs Re(s) > 0 for custom measures");
  }
  const auto& c = std::get<CustomMeasure>(measure_);
  auto part = [&](auto&& f, bool finite) {
    double err = 0.0, l1 = 0.0, v = 0.0;
    if (finite) {
      v = q_->finite.integrate(f, 0.0, 1.0, quad_.rel_tol, &err, &l1);
    } else {
      v = q_->half_line.integrate(f, quad_.rel_tol, &err, &l1);
    }
    check_quadrature(err, l1, quad_.rel_tol, "complex psi");
    return v;
  };
  const double re_near =
      part([&](double y) { return weighted(compensated_exp(s * y).real(), c.density, y); }, true);
  const double im_near =
      part([&](double y) { return weighted(compensated_exp(s * y).imag(), c.density, y); }, true);
  const double re_far = part(
      [&](double u) { return weighted(std::exp(-s * (1.0 + u)).real(), c.density, 1.0 + u); }, false);
  const double im_far = part(
      [&](double u) { return weighted(std::exp(-s * (1.0 + u)).imag(), c.density, 1.0 + u); }, false);
  const double t1 = c.tail(1.0);
  return std::complex<double>(re_near + re_far, im_near + im_far) - t1 +
         s * (t1 + c.integrated_tail(1.0));
}

double LaplaceExponent::poisson_moment(double h, std::size_t j) const {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "poisson_moment needs h > 0");
  const double lg = std::lgamma(static_cast<double>(j) + 1.0);
  const double jd = static_cast<double>(j);
  auto f = [&](double y) {
    if (!(y > 0.0)) return 0.0;
    const double z = y / h;
    return weighted(std::exp(-z + jd * std::log(z) - lg), [this](double v) { return levy_density(v); }, y);
  };
  const double peak = std::max(jd, 1.0) * h;
  double err = 0.0, l1 = 0.0;
  const double left = q_->finite.integrate(f, 0.0, peak, quad_.rel_tol, &err, &l1);
  check_quadrature(err, l1, quad_.rel_tol, "poisson moment (0,peak]");
  const double right =
      q_->half_line.integrate([&](double u) { return f(peak + u); }, quad_.rel_tol, &err, &l1);
  check_quadrature(err, l1, quad_.rel_tol, "poisson moment [peak,inf)");
  return left + right;
}

double LaplaceExponent::varphi(double h, double beta) const {
  if (!(h > 0.0) || !(beta >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "varphi needs h > 0 and beta >= 0");
  }
  if (beta == 0.0) return 0.0;
  const double s = -std::expm1(-h * beta) / h;
  return std::exp(h * beta) * psi(s);
}

double LaplaceExponent::varphi_prime(double h, double beta) const {
  const double s = -std::expm1(-h * beta) / h;
  return h * std::exp(h * beta) * psi(s) + psi_prime(s);
}

double LaplaceExponent::varphi_inverse(double h, double y) const {
  if (!(h > 0.0) || !(y >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "varphi_inverse needs h > 0 and y >= 0");
  }
  if (y == 0.0) return 0.0;
  if (!std::isfinite(y)) throw Error(ErrorCode::BracketFailure, "varphi_inverse of a non-finite value");
  double hi = 1.0;
  int doublings = 0;
  while (varphi(h, hi) < y) {
    hi *= 2.0;
    if (++doublings > 60 || !std::isfinite(varphi(h, hi))) {
      throw Error(ErrorCode::BracketFailure, "no upper bracket for varphi_inverse");
    }
  }
  double lo = doublings == 0 ? 0.0 : hi / 2.0;
  auto f = [&](double b) { return varphi(h, b) - y; };
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  double beta = 0.5 * (a + b);
  // Newton polish
  for (int k = 0; k < 3; ++k) {
    const double r = f(beta);
    const double d = varphi_prime(h, beta);
    if (!(d > 0.0)) break;
    const double next = beta - r / d;
    if (!(next >= a && next <= b) || std::abs(f(next)) >= std::abs(r)) break;
    beta = next;
  }
  return beta;
}

void LaplaceExponent::validate() const {
  const double scale = psi(1.0);
  const double tiny = 1e-8;
  if (!(std::abs(psi(tiny)) <= 1e-4 * scale)) {
    throw Error(ErrorCode::InvalidSpec, "psi(0+) is not 0");
  }
  // psi'(xi) ~ xi^{alpha-1} can be far from 0 at 1e-8 when alpha is near 1;
  // require nonnegative values that still decrease toward 0
  const double d_tiny = psi_prime(tiny);
  const double d_small = psi_prime(1e-4);
  if (!(d_tiny >= 0.0 && d_tiny < d_small && d_small < psi_prime(1.0))) {
    throw Error(ErrorCode::InvalidSpec, "psi'(0+) is not 0");
  }
}

}  // namespace oneside
