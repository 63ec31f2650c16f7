#pragma once

#include "oneside/symbol.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace oneside {

/// E_{gamma,beta}(x) = sum_n x^n / Gamma(gamma n + beta) for |x| <= 100.
double mittag_leffler(double gamma, double beta, double x);

/// Gaver-Stehfest inversion of a Laplace transform at t > 0 (even order).
long double gaver_stehfest(const std::function<long double(long double)>& transform, double t,
                           int order = 12);

/// Nodes x_k = k a / m on [0, a].
struct ScaleGrid {
  double a = 1.0;
  std::size_t m = 4096;
  double q = 0.0;
};

struct ScaleOptions {
  /// Needed for measures without closed forms (Gaver-Stehfest route).
  bool allow_laplace_inversion = false;
  int stehfest_order = 12;
  double series_tol = 1e-12;
  std::size_t max_terms = 200;
};

struct SeriesResult {
  std::vector<double> values;
  std::size_t terms = 0;
  double remainder_bound = 0.0;
};

/// Scale functions W, W^(q), Z^(q) and the operator Z^(q)[g] on [0, a].
class ScaleKit {
public:
  ScaleKit(const LaplaceExponent& exp, ScaleGrid grid, ScaleOptions opts = {});

  double a() const noexcept { return grid_.a; }
  double q() const noexcept { return grid_.q; }
  std::size_t m() const noexcept { return grid_.m; }
  double step() const noexcept { return grid_.a / static_cast<double>(grid_.m); }
  std::vector<double> nodes() const;
  bool closed_form() const noexcept { return alpha_ > 0.0; }

  /// W extended by 0 on (-inf, 0).
  double W(double x) const;
  double Wq(double x) const;
  /// Z^(q) extended by 1 on (-inf, 0).
  double Zq(double x) const;
  /// int_0^x Z^(q)(z) dz.
  double IZq(double x) const;

  std::vector<double> sample(const std::function<double(double)>& f) const;

  /// g + sum_n q^n (W*)^n g on the grid.
  SeriesResult Zq_apply(std::span<const double> g) const;
  /// (W * g)(x_k) = int_0^{x_k} W(x_k - y) g(y) dy.
  std::vector<double> W_convolve(std::span<const double> g) const;
  /// (I g)(x_k) = int_0^{x_k} g.
  std::vector<double> integrate(std::span<const double> g) const;
  /// (f * g)(x_k) by the trapezoid rule.
  std::vector<double> convolve(std::span<const double> f, std::span<const double> g) const;

private:
  class ProductRule;

  LaplaceExponent exp_;
  ScaleGrid grid_;
  ScaleOptions opts_;
  double alpha_ = 0.0;  ///< > 0 for the stable kind
  std::shared_ptr<const ProductRule> kernel_rule_;
  std::shared_ptr<const ProductRule> unit_rule_;

  double W_inverted(double x, double q) const;
};

struct ResolventDensity {
  std::vector<double> y;
  std::vector<double> density;
  double mass = 0.0;           ///< quadrature of the closed-form density
  double expected_mass = 0.0;  ///< value the mass identity predicts
  double min_density = 0.0;
};

/// U^{DN}_{q,x}(dy) = (W^(q)(x)/Z^(q)(a) Z^(q)(a-y) - W^(q)(x-y)) dy on (0, a].
ResolventDensity resolvent_density_DN(const ScaleKit& kit, double x);
/// U^{NN}_{q,x}(dy) = (Z^(q)(x)/(q int_0^a Z^(q)) Z^(q)(a-y) - W^(q)(x-y)) dy on [0, a].
ResolventDensity resolvent_density_NN(const ScaleKit& kit, double x);
double resolvent_density_DN_at(const ScaleKit& kit, double x, double y);
double resolvent_density_NN_at(const ScaleKit& kit, double x, double y);

/// E_x[e^{-q tau}] = Z^(q)(x) - q int_0^a Z^(q) / Z^(q)(a) W^(q)(x).
double exit_laplace_DN(const ScaleKit& kit, double x);

enum class ExitKind { DN, DNStar, ND };

/// Closed-form mean exit times on [0, a] for the stable kind.
double mean_exit(ExitKind kind, double x, double a, double alpha);

}  // namespace oneside
