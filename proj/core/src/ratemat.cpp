#include "oneside/ratemat.hpp"

#include "oneside/error.hpp"

#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace oneside {

std::string BoundaryPair::label() const {
  std::string s;
  s += left == LeftBoundary::D ? "D" : left == LeftBoundary::N ? "N" : "N*";
  s += right == RightBoundary::D ? "D" : "N";
  return s;
}

BoundaryPair BoundaryPair::parse(std::string_view label) {
  for (const auto& bc : all()) {
    if (bc.label() == label) return bc;
  }
  if (label == "NstarD") return {LeftBoundary::NStar, RightBoundary::D};
  if (label == "NstarN") return {LeftBoundary::NStar, RightBoundary::N};
  throw Error(ErrorCode::UnsupportedCombination, "unknown boundary pair '" + std::string(label) + "'");
}

std::vector<BoundaryPair> BoundaryPair::all() {
  return {{LeftBoundary::D, RightBoundary::D},     {LeftBoundary::D, RightBoundary::N},
          {LeftBoundary::N, RightBoundary::D},     {LeftBoundary::N, RightBoundary::N},
          {LeftBoundary::NStar, RightBoundary::D}, {LeftBoundary::NStar, RightBoundary::N}};
}

std::size_t RateMatrix::row_of(long index) const {
  if (index < first_index || index > last_index()) {
    throw Error(ErrorCode::IndexOutOfRange, "state index " + std::to_string(index));
  }
  return static_cast<std::size_t>(index - first_index);
}

double RateMatrix::grid(long index) const {
  if (kind == MatrixKind::Restricted) {
    return 2.0 * static_cast<double>(index) / static_cast<double>(n + 1) - 1.0;
  }
  return static_cast<double>(index) * h;
}

BoundaryWeights boundary_weights(const LaplaceExponent& exp, const GrunwaldCoeffs& c,
                                 std::size_t n, BoundaryPair bc) {
  if (c.j_max < n + 1) {
    throw Error(ErrorCode::IndexOutOfRange, "coefficients need j_max >= n+1");
  }
  BoundaryWeights w;
  w.bl.assign(n + 1, 0.0);
  w.br.assign(n + 1, 0.0);
  w.dr.assign(n + 2, 0.0);
  switch (bc.left) {
    case LeftBoundary::D:
      w.dl0 = c.g[0];
      for (std::size_t i = 0; i <= n; ++i) w.bl[i] = c.g[i];
      break;
    case LeftBoundary::N:
      w.dl0 = 0.0;
      for (std::size_t i = 1; i <= n; ++i) w.bl[i] = c.tail[i];
      break;
    case LeftBoundary::NStar:
      w.dl0 = 0.0;
      w.bl[1] = c.g[0] + c.g[1];
      for (std::size_t i = 2; i <= n; ++i) w.bl[i] = c.g[i];
      break;
  }
  if (bc.right == RightBoundary::D) {
    for (std::size_t i = 1; i <= n; ++i) w.br[i] = c.g[i];
    for (std::size_t i = 1; i <= n + 1; ++i) w.dr[i] = c.tail[i];
    w.bn = w.bl[n];
    if (bc.left == LeftBoundary::N) {
      // row 1 jumps past the right boundary collect sum_{j>n} b^l_j
      w.dr[n + 1] = tail_of_tails(exp, c, n);
    }
  } else {
    for (std::size_t i = 1; i <= n; ++i) w.br[i] = c.tail[i];
    long double acc = 0.0L;
    for (std::size_t j = 0; j < n; ++j) acc += w.bl[j];
    w.bn = static_cast<double>(-acc);
  }
  return w;
}

RateMatrix build_restricted(const LaplaceExponent& exp, const GrunwaldCoeffs& c, std::size_t n,
                            BoundaryPair bc) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "restricted matrices need n >= 3");
  const double h = 2.0 / static_cast<double>(n + 1);
  if (std::abs(c.h - h) > 1e-12 * h) {
    throw Error(ErrorCode::HorizonMismatch, "coefficient mesh does not equal 2/(n+1)");
  }
  const auto w = boundary_weights(exp, c, n, bc);

  RateMatrix q;
  q.kind = MatrixKind::Restricted;
  q.bc = bc;
  q.n = n;
  q.h = h;
  q.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 2), static_cast<Eigen::Index>(n + 2));
  auto& e = q.entries;
  const auto N = static_cast<Eigen::Index>(n);

  e(1, 0) = w.dl0;
  for (Eigen::Index j = 1; j <= N - 1; ++j) e(1, j) = w.bl[static_cast<std::size_t>(j)];
  e(1, N) = w.bn;
  e(1, N + 1) = w.dr[n + 1];

  for (Eigen::Index i = 2; i <= N; ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(1, i - 1); j <= N - 1; ++j) {
      e(i, j) = c.g[static_cast<std::size_t>(j - i + 1)];
    }
    e(i, N) = w.br[static_cast<std::size_t>(N - i + 1)];
    e(i, N + 1) = w.dr[static_cast<std::size_t>(N - i + 2)];
  }
  return q;
}

RateMatrix build_stopped(const GrunwaldCoeffs& c, std::size_t m_below, std::size_t k_above) {
  if (m_below < 1 || k_above < 1) {
    throw Error(ErrorCode::InvalidArgument, "stopped matrix needs m_below, k_above >= 1");
  }
  RateMatrix q;
  q.kind = MatrixKind::StoppedTruncated;
  q.h = c.h;
  q.first_index = -static_cast<long>(m_below);
  const auto size = static_cast<Eigen::Index>(m_below + k_above + 1);
  q.entries = Eigen::MatrixXd::Zero(size, size);
  const long last = static_cast<long>(k_above);
  for (long i = q.first_index; i <= 0; ++i) {
    for (long j = std::max(q.first_index, i - 1); j <= last; ++j) {
      const auto k = static_cast<std::size_t>(j - i + 1);
      if (k > c.j_max) {
        throw Error(ErrorCode::IndexOutOfRange, "stopped matrix needs j_max >= m_below+k_above+1");
      }
      q.entries(static_cast<Eigen::Index>(q.row_of(i)), static_cast<Eigen::Index>(q.row_of(j))) = c.g[k];
    }
  }
  return q;
}

MatrixReport inspect_matrix(const RateMatrix& q, const GrunwaldCoeffs& c) {
  MatrixReport r;
  r.scale = std::abs(c.g[1]);
  r.min_off_diagonal = 0.0;
  r.max_diagonal = -std::numeric_limits<double>::infinity();
  const auto& e = q.entries;
  const Eigen::Index size = e.rows();
  for (Eigen::Index i = 0; i < size; ++i) {
    long double sum = 0.0L;
    for (Eigen::Index j = 0; j < size; ++j) {
      sum += e(i, j);
      if (i != j) r.min_off_diagonal = std::min(r.min_off_diagonal, e(i, j));
    }
    r.max_diagonal = std::max(r.max_diagonal, e(i, i));
    const bool stopped_row =
        q.kind == MatrixKind::StoppedTruncated && q.first_index + static_cast<long>(i) > 0;
    const bool restricted_row =
        q.kind == MatrixKind::Restricted && (i == 0 || i == size - 1);
    if (stopped_row || restricted_row) {
      if (e.row(i).cwiseAbs().maxCoeff() != 0.0) r.absorbing_rows_zero = false;
      continue;
    }
    if (q.kind == MatrixKind::Restricted) {
      r.max_row_sum = std::max(r.max_row_sum, static_cast<double>(std::abs(sum)));
    }
  }
  r.row_sums_ok = r.max_row_sum <= 1e-10 * r.scale;
  r.signs_ok = r.min_off_diagonal >= -1e-12 * r.scale && r.max_diagonal <= 0.0;
  return r;
}

Eigen::VectorXd resolvent_transpose_e(const RateMatrix& q, double beta, long i0) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent needs beta > 0");
  const auto size = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd a = beta * Eigen::MatrixXd::Identity(size, size) - q.entries.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(static_cast<Eigen::Index>(q.row_of(i0))) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) throw Error(ErrorCode::SingularSystem, "resolvent solve produced non-finite values");
  const double backward = (a * x - rhs).cwiseAbs().maxCoeff();
  if (backward > 1e-9) {
    throw Error(ErrorCode::SingularSystem,
                "resolvent backward error " + std::to_string(backward));
  }
  return x;
}

Eigen::VectorXd stopped_resolvent_closed_form(const LaplaceExponent& exp, const GrunwaldCoeffs& c,
                                              const RateMatrix& q, double beta) {
  const double u = exp.varphi_inverse(c.h, beta);
  const double h = c.h;
  const auto size = static_cast<Eigen::Index>(q.size());
  Eigen::VectorXd y(size);
  for (long n = q.first_index; n <= q.last_index(); ++n) {
    double v = 0.0;
    if (n <= 0) {
      v = std::exp(h * static_cast<double>(n - 1) * u);
    } else {
      long double acc = 0.0L;
      for (std::size_t k = static_cast<std::size_t>(n); k + 1 <= c.j_max; ++k) {
        acc += c.g[k + 1] * std::exp(h * (static_cast<double>(n) - 1.0 - static_cast<double>(k)) * u);
      }
      v = static_cast<double>(acc) / beta;
    }
    y(static_cast<Eigen::Index>(q.row_of(n))) = v / c.g[0];
  }
  return y;
}

Eigen::VectorXd ergodic_limit_target(const GrunwaldCoeffs& c, const RateMatrix& q) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.size()));
  for (long j = 1; j <= q.last_index(); ++j) {
    z(static_cast<Eigen::Index>(q.row_of(j))) = tail_sum(c, static_cast<std::size_t>(j) + 1) / c.g[0];
  }
  return z;
}

ErgodicLimit ergodic_limit_z(const LaplaceExponent& exp, const GrunwaldCoeffs& c,
                             const RateMatrix& q, long i0, std::span<const double> betas,
                             std::vector<double> exponents) {
  if (exponents.empty()) {
    if (auto a = exp.index()) {
      exponents = {1.0, *a, 2.0, 1.0 + *a, 3.0};
    } else {
      exponents = {1.0, 1.5, 2.0, 2.5, 3.0};
    }
  }
  const auto p = static_cast<Eigen::Index>(exponents.size() + 1);
  const auto m = static_cast<Eigen::Index>(betas.size());
  if (m < p) {
    throw Error(ErrorCode::InvalidArgument, "need at least as many beta values as fit parameters");
  }
  for (std::size_t k = 1; k < betas.size(); ++k) {
    if (!(betas[k] < betas[k - 1])) throw Error(ErrorCode::InvalidArgument, "betas must decrease");
  }
  ErgodicLimit out;
  out.exponents = exponents;
  const auto size = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd samples(m, size);
  Eigen::MatrixXd basis(m, p);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double beta = betas[static_cast<std::size_t>(k)];
    samples.row(k) = beta * resolvent_transpose_e(q, beta, i0).transpose();
    const double u = exp.varphi_inverse(c.h, beta);
    out.u.push_back(u);
    basis(k, 0) = 1.0;
    for (Eigen::Index e = 1; e < p; ++e) basis(k, e) = std::pow(u, exponents[static_cast<std::size_t>(e - 1)]);
  }
  Eigen::MatrixXd coef = basis.colPivHouseholderQr().solve(samples);
  out.z = coef.row(0).transpose();
  out.raw = samples.row(m - 1).transpose();
  return out;
}

Eigen::VectorXd semigroup_row(const RateMatrix& q, double t, long i0) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "semigroup needs t >= 0");
  const auto size = static_cast<Eigen::Index>(q.size());
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(size);
  v(static_cast<Eigen::Index>(q.row_of(i0))) = 1.0;
  const double lambda = q.entries.diagonal().cwiseAbs().maxCoeff();
  if (t == 0.0 || lambda == 0.0) return v.transpose();

  const double mean = lambda * t;
  boost::math::poisson_distribution<double> pois(mean);
  const auto k_max = static_cast<std::size_t>(
      std::ceil(boost::math::quantile(boost::math::complement(pois, 1e-12))));
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(size, size) + q.entries / lambda;
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(size);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double w = std::exp(-mean + static_cast<double>(k) * std::log(mean) -
                              std::lgamma(static_cast<double>(k) + 1.0));
    out += w * v;
    v = v * p;
  }
  // restore the truncated Poisson mass so the row is a probability vector
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out.transpose();
}

namespace {

std::pair<Eigen::Index, Eigen::Index> interior_block(const RateMatrix& q) {
  if (q.kind != MatrixKind::Restricted) {
    throw Error(ErrorCode::InvalidArgument, "interior block needs a restricted matrix");
  }
  return {1, static_cast<Eigen::Index>(q.n)};
}

}  // namespace

Eigen::VectorXd stationary_interior(const RateMatrix& q) {
  if (!q.bc || q.bc->has_killing()) {
    throw Error(ErrorCode::InvalidArgument, "stationary distribution needs an NN matrix");
  }
  const auto [first, count] = interior_block(q);
  const Eigen::MatrixXd a = q.entries.block(first, first, count, count).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> rank_check(a);
  rank_check.setThreshold(1e-11);
  if (rank_check.rank() != count - 1) {
    throw Error(ErrorCode::NotIrreducible, "interior chain does not have a one-dimensional null space");
  }
  Eigen::MatrixXd aug = a;
  aug.row(count - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(count);
  rhs(count - 1) = 1.0;
  Eigen::VectorXd pi = aug.partialPivLu().solve(rhs);
  const double residual = (a * pi).cwiseAbs().maxCoeff();
  const double scale = q.entries.diagonal().cwiseAbs().maxCoeff();
  if (!pi.allFinite() || residual > 1e-10 * std::max(scale, 1.0)) {
    throw Error(ErrorCode::SingularSystem, "stationary solve residual " + std::to_string(residual));
  }
  return pi;
}

Eigen::VectorXd mean_absorption_all(const RateMatrix& q) {
  if (!q.bc || !q.bc->has_killing()) {
    throw Error(ErrorCode::NoAbsorbingState, "mean absorption needs a D boundary");
  }
  const auto [first, count] = interior_block(q);
  const Eigen::MatrixXd a = q.entries.block(first, first, count, count);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularSystem, "interior generator is singular");
  Eigen::VectorXd m = lu.solve(-Eigen::VectorXd::Ones(count));
  const double residual = (a * m + Eigen::VectorXd::Ones(count)).cwiseAbs().maxCoeff();
  const double scale = a.cwiseAbs().rowwise().sum().maxCoeff() * m.cwiseAbs().maxCoeff();
  if (!m.allFinite() || residual > 1e-10 * std::max(scale, 1.0)) {
    throw Error(ErrorCode::SingularSystem, "mean absorption residual " + std::to_string(residual));
  }
  return m;
}

double mean_absorption(const RateMatrix& q, long from) {
  if (from < 1 || from > static_cast<long>(q.n)) {
    throw Error(ErrorCode::IndexOutOfRange, "mean absorption needs an interior start");
  }
  return mean_absorption_all(q)(from - 1);
}

}  // namespace oneside
