#pragma once

#include "oneside/symbol.hpp"

#include <cstddef>
#include <vector>

namespace oneside {

/// Weights G_0..G_J of psi((1 - xi)/h) = sum_j G_j xi^j and tail sums
/// T_j = -sum_{k<j} G_k.
struct GrunwaldCoeffs {
  double h = 1.0;
  std::vector<double> g;     ///< G_0..G_J
  std::vector<double> tail;  ///< T_0..T_{J+1}
  std::size_t j_max = 0;
  double tail_mass_bound = 0.0;  ///< bound on sum_{k>J} G_k

  double G(std::size_t j) const;
  double T(std::size_t j) const;
};

GrunwaldCoeffs compute_coeffs(const LaplaceExponent& exp, double h, std::size_t j_max);

/// T_j for 0 <= j <= j_max + 1.
double tail_sum(const GrunwaldCoeffs& c, std::size_t j);

/// sum_{j > n} T_j.
///
/// Closed form for the stable kind. Otherwise -sum_{j=1}^n T_j, which uses
/// sum_j j G_j = 0.
double tail_of_tails(const LaplaceExponent& exp, const GrunwaldCoeffs& c, std::size_t n);

struct CauchyExtraction {
  std::vector<double> g;
  std::size_t nodes = 0;
  bool aliasing_warning = false;
};

/// G_0..G_{j_max} by discrete Fourier inversion of xi -> psi((1 - xi)/h) on
/// the circle |xi| = radius. nodes = 0 picks the smallest power of two that is
/// at least 4 j_max and keeps radius^{nodes - j_max} below 1e-16.
CauchyExtraction verify_coeffs_cauchy(const LaplaceExponent& exp, double h, std::size_t j_max,
                                      double radius, std::size_t nodes = 0);

}  // namespace oneside
