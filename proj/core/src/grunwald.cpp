#include "oneside/grunwald.hpp"

#include "oneside/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace oneside {

double GrunwaldCoeffs::G(std::size_t j) const {
  if (j > j_max) throw Error(ErrorCode::IndexOutOfRange, "G_j beyond j_max=" + std::to_string(j_max));
  return g[j];
}

double GrunwaldCoeffs::T(std::size_t j) const { return tail_sum(*this, j); }

GrunwaldCoeffs compute_coeffs(const LaplaceExponent& exp, double h, std::size_t j_max) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "h must be > 0");
  if (j_max < 2) throw Error(ErrorCode::InvalidArgument, "j_max must be >= 2");

  GrunwaldCoeffs c;
  c.h = h;
  c.j_max = j_max;
  c.g.assign(j_max + 1, 0.0);

  if (exp.is_custom()) {
    c.g[0] = exp.psi(1.0 / h);
    c.g[1] = -exp.psi_prime(1.0 / h) / h;
    for (std::size_t j = 2; j <= j_max; ++j) c.g[j] = exp.poisson_moment(h, j);
  } else {
    const double a = *exp.index();
    const double lambda = *exp.tempering();
    const double scale = std::pow(h, -a);
    if (!std::isfinite(scale) || scale == 0.0) {
      throw Error(ErrorCode::Overflow, "h^-alpha is not representable");
    }
    // w_j = (-1)^j binom(alpha, j)
    double w = 1.0;
    const double damp = 1.0 / (1.0 + lambda * h);
    double tilt = std::pow(1.0 + lambda * h, a);
    for (std::size_t j = 0; j <= j_max; ++j) {
      c.g[j] = scale * tilt * w;
      w *= (static_cast<double>(j) - a) / static_cast<double>(j + 1);
      tilt *= damp;
    }
    if (lambda > 0.0) {
      // linear compensation only touches the first two weights
      c.g[0] = exp.psi(1.0 / h);
      c.g[1] = -exp.psi_prime(1.0 / h) / h;
    }
  }

  for (std::size_t j = 0; j <= j_max; ++j) {
    if (!std::isfinite(c.g[j])) throw Error(ErrorCode::Overflow, "non-finite weight G_" + std::to_string(j));
  }
  if (!(c.g[0] > 0.0) || !(c.g[1] < 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "weights violate G_0 > 0, G_1 < 0");
  }
  for (std::size_t j = 2; j <= j_max; ++j) {
    if (c.g[j] < 0.0) {
      if (c.g[j] > -1e-14 * c.g[0]) {
        c.g[j] = 0.0;
      } else {
        throw Error(ErrorCode::InvalidSpec, "negative weight G_" + std::to_string(j));
      }
    }
  }

  c.tail.assign(j_max + 2, 0.0);
  long double acc = 0.0L;
  for (std::size_t j = 0; j <= j_max; ++j) {
    acc += c.g[j];
    c.tail[j + 1] = static_cast<double>(-acc);
  }
  c.tail_mass_bound = std::max(c.tail[j_max + 1], 0.0);
  return c;
}

double tail_sum(const GrunwaldCoeffs& c, std::size_t j) {
  if (j > c.j_max + 1) {
    throw Error(ErrorCode::IndexOutOfRange, "T_j beyond j_max+1=" + std::to_string(c.j_max + 1));
  }
  return c.tail[j];
}

double tail_of_tails(const LaplaceExponent& exp, const GrunwaldCoeffs& c, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "tail_of_tails needs n >= 1");
  if (exp.is_stable()) {
    // sum_{j>n} T_j = h^{-alpha} (-1)^{n-1} binom(alpha-2, n-1)
    const double a = *exp.index();
    double v = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      v *= (static_cast<double>(i) - (a - 2.0)) / static_cast<double>(i + 1);
    }
    return std::pow(c.h, -a) * v;
  }
  if (n > c.j_max + 1) throw Error(ErrorCode::IndexOutOfRange, "tail_of_tails beyond j_max+1");
  long double acc = 0.0L;
  for (std::size_t j = 1; j <= n; ++j) acc += c.tail[j];
  return static_cast<double>(-acc);
}

CauchyExtraction verify_coeffs_cauchy(const LaplaceExponent& exp, double h, std::size_t j_max,
                                      double radius, std::size_t nodes) {
  if (!(radius > 0.0 && radius < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must lie in (0, 1)");
  }
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be > 0");
  CauchyExtraction out;
  if (nodes == 0) {
    // aliased terms enter as r^{nodes - j}; push them below double precision
    const auto decay = static_cast<std::size_t>(std::ceil(std::log(1e-16) / std::log(radius)));
    nodes = 8;
    while (nodes < 4 * j_max || nodes < j_max + decay) nodes *= 2;
  }
  out.nodes = nodes;
  out.aliasing_warning = nodes < 4 * j_max;

  using cld = std::complex<long double>;
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  const long double r = radius;
  const long double hl = h;
  std::vector<cld> f(nodes);
  std::vector<cld> roots(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const long double theta = two_pi * static_cast<long double>(k) / static_cast<long double>(nodes);
    roots[k] = cld(std::cos(theta), std::sin(theta));
    const cld xi = r * roots[k];
    f[k] = exp.psi_ld((1.0L - xi) / hl);
  }
  out.g.assign(j_max + 1, 0.0);
  long double rj = 1.0L;
  for (std::size_t j = 0; j <= j_max; ++j) {
    cld acc = 0.0L;
    for (std::size_t k = 0; k < nodes; ++k) {
      acc += f[k] * std::conj(roots[(j * k) % nodes]);
    }
    out.g[j] = static_cast<double>(acc.real() / (static_cast<long double>(nodes) * rj));
    rj *= r;
  }
  return out;
}

}  // namespace oneside
