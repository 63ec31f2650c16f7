#pragma once

#include "oneside/grunwald.hpp"
#include "oneside/symbol.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oneside {

enum class LeftBoundary { D, N, NStar };
enum class RightBoundary { D, N };

/// One of DD, DN, ND, NN, N*D, N*N.
struct BoundaryPair {
  LeftBoundary left = LeftBoundary::D;
  RightBoundary right = RightBoundary::D;

  std::string label() const;
  static BoundaryPair parse(std::string_view label);
  static std::vector<BoundaryPair> all();
  bool has_killing() const noexcept {
    return left == LeftBoundary::D || right == RightBoundary::D;
  }
  friend bool operator==(const BoundaryPair&, const BoundaryPair&) = default;
};

enum class MatrixKind { Restricted, StoppedTruncated };

/// Dense generator. Row r corresponds to state index first_index + r.
struct RateMatrix {
  Eigen::MatrixXd entries;
  MatrixKind kind = MatrixKind::Restricted;
  std::optional<BoundaryPair> bc;
  std::size_t n = 0;     ///< interior points (restricted)
  double h = 0.0;
  long first_index = 0;  ///< 0 for restricted, -m_below for stopped

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  long last_index() const noexcept { return first_index + static_cast<long>(size()) - 1; }
  std::size_t row_of(long index) const;
  /// Grid location of a state; restricted matrices use x_i = -1 + 2i/(n+1).
  double grid(long index) const;
  /// Q(i, j) addressed by state indices.
  double at(long i, long j) const { return entries(row_of(i), row_of(j)); }
};

/// Boundary weights per side.
struct BoundaryWeights {
  std::vector<double> bl;  ///< b^l_0..b^l_n (b^l_0 = d^l_0 for D)
  std::vector<double> br;  ///< b^r_1..b^r_n, index 0 unused
  std::vector<double> dr;  ///< d^r_1..d^r_{n+1}, index 0 unused
  double dl0 = 0.0;
  double bn = 0.0;
};

BoundaryWeights boundary_weights(const LaplaceExponent& exp, const GrunwaldCoeffs& c,
                                 std::size_t n, BoundaryPair bc);

RateMatrix build_restricted(const LaplaceExponent& exp, const GrunwaldCoeffs& c, std::size_t n,
                            BoundaryPair bc);

RateMatrix build_stopped(const GrunwaldCoeffs& c, std::size_t m_below, std::size_t k_above);

struct MatrixReport {
  double max_row_sum = 0.0;        ///< max_i |sum_j Q_ij|
  double min_off_diagonal = 0.0;
  double max_diagonal = 0.0;
  bool absorbing_rows_zero = true;
  double scale = 0.0;  ///< |G_1|
  bool row_sums_ok = false;
  bool signs_ok = false;
  bool ok() const noexcept { return row_sums_ok && signs_ok && absorbing_rows_zero; }
};

MatrixReport inspect_matrix(const RateMatrix& q, const GrunwaldCoeffs& c);

/// Solves (beta I - Q^T) x = e_{i0}.
Eigen::VectorXd resolvent_transpose_e(const RateMatrix& q, double beta, long i0);

/// Closed form of (beta I - G_stop^T)^{-1} e_0 on the index range of q.
Eigen::VectorXd stopped_resolvent_closed_form(const LaplaceExponent& exp, const GrunwaldCoeffs& c,
                                              const RateMatrix& q, double beta);

/// z_j = T_{j+1}/G_0 for j > 0 and 0 for j <= 0, on the index range of q.
Eigen::VectorXd ergodic_limit_target(const GrunwaldCoeffs& c, const RateMatrix& q);

struct ErgodicLimit {
  Eigen::VectorXd z;           ///< extrapolated limit
  Eigen::VectorXd raw;         ///< beta x at the smallest beta
  std::vector<double> u;       ///< varphi^{-1}(beta) per beta
  std::vector<double> exponents;
};

/// beta (beta I - Q^T)^{-1} e_{i0} extrapolated to beta -> 0.
///
/// The fit is least squares in u = varphi^{-1}(beta) over the basis
/// {1, u^e : e in exponents}. An empty exponent list selects
/// {1, alpha, 2, 1 + alpha, 3} when alpha is known and {1, 1.5, 2, 2.5, 3}
/// otherwise.
ErgodicLimit ergodic_limit_z(const LaplaceExponent& exp, const GrunwaldCoeffs& c,
                             const RateMatrix& q, long i0, std::span<const double> betas,
                             std::vector<double> exponents = {});

/// Row i0 of exp(tQ) by uniformization.
Eigen::VectorXd semigroup_row(const RateMatrix& q, double t, long i0);

/// pi^T Q_int = 0 over the interior states 1..n, normalized.
Eigen::VectorXd stationary_interior(const RateMatrix& q);

/// m solving Q_int m = -1, evaluated at state `from`.
double mean_absorption(const RateMatrix& q, long from);
Eigen::VectorXd mean_absorption_all(const RateMatrix& q);

}  // namespace oneside
