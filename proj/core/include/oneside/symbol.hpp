#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <variant>

namespace oneside {

/// phi(dy) = y^{-1-alpha} dy / Gamma(-alpha), 1 < alpha < 2.
struct StableMeasure {
  double alpha = 1.5;
};

/// phi(dy) = e^{-lambda y} y^{-1-alpha} dy / Gamma(-alpha).
struct TemperedStableMeasure {
  double alpha = 1.5;
  double lambda = 0.0;
};

/// User supplied Levy measure on (0, inf).
///
/// The caller is responsible for the moment conditions: int (y^2 ^ y) phi(dy)
/// finite and int_(0,1) y phi(dy) infinite.
struct CustomMeasure {
  std::function<double(double)> density;          ///< phi(dy)/dy
  std::function<double(double)> tail;             ///< y -> phi((y, inf))
  std::function<double(double)> integrated_tail;  ///< x -> int_x^inf tail
};

using LevyMeasureSpec = std::variant<StableMeasure, TemperedStableMeasure, CustomMeasure>;

struct QuadratureConfig {
  double rel_tol = 1e-10;
  std::size_t max_refinements = 15;
};

/// Laplace exponent psi(xi) = int (e^{-xi y} - 1 + xi y) phi(dy) of a
/// recurrent spectrally positive Levy process.
///
/// Immutable after construction and safe to share between threads.
class LaplaceExponent {
public:
  explicit LaplaceExponent(LevyMeasureSpec measure, QuadratureConfig quad = {});

  static LaplaceExponent stable(double alpha);
  static LaplaceExponent tempered_stable(double alpha, double lambda);

  const LevyMeasureSpec& measure() const noexcept { return measure_; }
  const QuadratureConfig& quadrature() const noexcept { return quad_; }

  bool is_stable() const noexcept;
  bool is_custom() const noexcept;
  /// alpha for stable and tempered kinds.
  std::optional<double> index() const noexcept;
  /// lambda for tempered kind (0 for stable).
  std::optional<double> tempering() const noexcept;

  double psi(double xi) const;
  double psi_prime(double xi) const;
  /// psi on the closed right half plane (principal branch).
  std::complex<double> psi(std::complex<double> s) const;
  /// Extended precision evaluation; custom measures fall back to double.
  long double psi_ld(long double xi) const;
  std::complex<long double> psi_ld(std::complex<long double> s) const;

  double levy_density(double y) const;
  double levy_tail(double y) const;
  double integrated_tail(double x) const;

  /// phi(beta) = e^{h beta} psi((1 - e^{-h beta}) / h).
  double varphi(double h, double beta) const;
  double varphi_prime(double h, double beta) const;
  /// Inverse of varphi on [0, inf).
  double varphi_inverse(double h, double y) const;

  /// Numerical sanity checks of psi(0) = 0, psi'(0+) = 0 at xi = 1e-8.
  void validate() const;

  /// (1/j!) int e^{-y/h} (y/h)^j phi(dy) by quadrature (any kind).
  double poisson_moment(double h, std::size_t j) const;

private:
  struct Quad;
  LevyMeasureSpec measure_;
  QuadratureConfig quad_;
  std::shared_ptr<const Quad> q_;

  double custom_psi(double xi) const;
  double custom_psi_prime(double xi) const;
  std::complex<double> custom_psi(std::complex<double> s) const;
};

}  // namespace oneside
