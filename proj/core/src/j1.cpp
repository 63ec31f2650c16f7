#include "oneside/error.hpp"
#include "oneside/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oneside {

namespace {

struct Jumps {
  std::vector<double> t;  ///< t[k] epoch of jump k+1; t[-1] = 0 implied
  std::vector<double> v;  ///< v[0] initial, v[k] value after jump k
};

Jumps jumps_of(const StepPath& p) {
  Jumps j;
  j.t = p.epochs();
  j.v.reserve(p.values().size() + 1);
  j.v.push_back(p.initial());
  j.v.insert(j.v.end(), p.values().begin(), p.values().end());
  return j;
}

double sup_distance(const StepPath& p, const StepPath& q, double T) {
  std::vector<double> knots = p.epochs();
  knots.insert(knots.end(), q.epochs().begin(), q.epochs().end());
  knots.push_back(0.0);
  double best = 0.0;
  for (double t : knots) {
    if (t > T) continue;
    best = std::max(best, std::abs(p.value_at(t) - q.value_at(t)));
  }
  return best;
}

struct Spread {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double x) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
};

double block_cost(const Spread& a, const Spread& b) {
  return std::max(a.hi - b.lo, b.hi - a.lo);
}

// Monotone matchings of jump epochs; cost is the sup of time shifts and of the
// worst value mismatch possible inside each block between matched jumps.
double alignment_upper(const Jumps& p, const Jumps& q, double T, std::size_t window, double start) {
  const std::size_t a = p.t.size();
  const std::size_t b = q.t.size();
  const std::size_t cols = b + 1;
  if ((a + 1) * cols > 40'000'000) return start;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp((a + 1) * cols, inf);
  dp[0] = 0.0;
  double best = start;

  auto spread = [](const std::vector<double>& v, std::size_t from, std::size_t to) {
    Spread s;
    for (std::size_t k = from; k <= to; ++k) s.add(v[k]);
    return s;
  };

  for (std::size_t i = 0; i <= a; ++i) {
    for (std::size_t j = 0; j <= b; ++j) {
      const double cur = dp[i * cols + j];
      if (!(cur < best)) continue;
      // close out to (T, T)
      const double tail = block_cost(spread(p.v, i, a), spread(q.v, j, b));
      best = std::min(best, std::max(cur, tail));
      for (std::size_t i2 = i + 1; i2 <= std::min(a, i + window); ++i2) {
        const Spread sp = spread(p.v, i, i2 - 1);
        for (std::size_t j2 = j + 1; j2 <= std::min(b, j + window); ++j2) {
          const double shift = std::abs(p.t[i2 - 1] - q.t[j2 - 1]);
          if (!(shift < best)) continue;
          const double c = std::max({cur, shift, block_cost(sp, spread(q.v, j, j2 - 1))});
          double& slot = dp[i2 * cols + j2];
          if (c < slot) slot = c;
        }
      }
    }
  }
  (void)T;
  return best;
}

// Values of q on the closed window [t - d, t + d] clipped to [0, T].
double window_distance(double x, const StepPath& q, double t, double d, double T) {
  const double lo = std::max(0.0, t - d);
  const double hi = std::min(T, t + d);
  double best = std::abs(x - q.value_at(lo));
  const auto& e = q.epochs();
  auto it = std::upper_bound(e.begin(), e.end(), lo);
  for (; it != e.end() && *it <= hi; ++it) {
    best = std::min(best, std::abs(x - q.values()[static_cast<std::size_t>(it - e.begin())]));
  }
  return best;
}

bool separated(const StepPath& p, const StepPath& q, double T, double d) {
  std::vector<double> ts{0.0, T};
  for (double e : p.epochs()) {
    if (e <= T) ts.push_back(e);
  }
  for (double e : q.epochs()) {
    for (double s : {e - d, e + d, e}) {
      if (s >= 0.0 && s <= T) ts.push_back(s);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  const std::size_t m = ts.size();
  for (std::size_t k = 0; k + 1 < m; ++k) ts.push_back(0.5 * (ts[k] + ts[k + 1]));
  for (double t : ts) {
    if (window_distance(p.value_at(t), q, t, d, T) >= d) return true;
  }
  return false;
}

}  // namespace

J1Bounds j1_distance(const StepPath& p, const StepPath& q, double T, std::size_t window) {
  if (!(T > 0.0) || T > p.horizon() || T > q.horizon()) {
    throw Error(ErrorCode::HorizonMismatch, "j1_distance needs both paths defined on [0, T]");
  }
  if (window == 0) window = 1;
  const StepPath pt = p.truncate(T);
  const StepPath qt = q.truncate(T);
  if (pt == qt) return {0.0, 0.0};

  J1Bounds out;
  const double sup = sup_distance(pt, qt, T);
  out.upper = alignment_upper(jumps_of(pt), jumps_of(qt), T, window, sup);

  // lower bound: largest d such that some value of one path stays at least d
  // away from every value the other path takes within time distance d
  double lo = 0.0, hi = out.upper;
  if (separated(pt, qt, T, hi) || separated(qt, pt, T, hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (separated(pt, qt, T, mid) || separated(qt, pt, T, mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  out.lower = std::min(lo, out.upper);
  return out;
}

}  // namespace oneside
