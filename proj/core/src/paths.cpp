#include "oneside/paths.hpp"

#include "oneside/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace oneside {

StepPath::StepPath(double horizon, double initial, std::vector<double> epochs,
                   std::vector<double> values)
    : horizon_(horizon), initial_(initial) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidPath, "horizon must be positive and finite");
  }
  if (!std::isfinite(initial)) throw Error(ErrorCode::InvalidPath, "initial value must be finite");
  if (epochs.size() != values.size()) {
    throw Error(ErrorCode::InvalidPath, "epochs and values differ in length");
  }
  epochs_.reserve(epochs.size());
  values_.reserve(values.size());
  double prev_t = 0.0;
  double prev_v = initial;
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const double t = epochs[k];
    const double v = values[k];
    if (!(t > prev_t) || !(t <= horizon)) {
      throw Error(ErrorCode::InvalidPath, "epochs must increase strictly within (0, T]");
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidPath, "values must be finite");
    prev_t = t;
    if (v == prev_v) continue;
    epochs_.push_back(t);
    values_.push_back(v);
    prev_v = v;
  }
}

double StepPath::value_at(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw Error(ErrorCode::InvalidArgument, "evaluation time outside [0, T]");
  }
  const auto it = std::upper_bound(epochs_.begin(), epochs_.end(), t);
  const auto k = static_cast<std::size_t>(it - epochs_.begin());
  return k == 0 ? initial_ : values_[k - 1];
}

double StepPath::left_limit(double t) const {
  if (!(t > 0.0 && t <= horizon_)) {
    throw Error(ErrorCode::InvalidArgument, "left limit needs t in (0, T]");
  }
  const auto it = std::lower_bound(epochs_.begin(), epochs_.end(), t);
  const auto k = static_cast<std::size_t>(it - epochs_.begin());
  return k == 0 ? initial_ : values_[k - 1];
}

std::vector<StepPath::Segment> StepPath::segments() const {
  std::vector<Segment> out;
  out.reserve(epochs_.size() + 1);
  double start = 0.0;
  double v = initial_;
  for (std::size_t k = 0; k < epochs_.size(); ++k) {
    out.push_back({start, epochs_[k], v});
    start = epochs_[k];
    v = values_[k];
  }
  out.push_back({start, horizon_, v});
  return out;
}

StepPath StepPath::truncate(double horizon) const {
  if (!(horizon > 0.0) || horizon > horizon_) {
    throw Error(ErrorCode::HorizonMismatch, "truncation horizon must lie in (0, T]");
  }
  const auto it = std::upper_bound(epochs_.begin(), epochs_.end(), horizon);
  const auto k = static_cast<std::size_t>(it - epochs_.begin());
  return StepPath(horizon, initial_, std::vector<double>(epochs_.begin(), epochs_.begin() + static_cast<long>(k)),
                  std::vector<double>(values_.begin(), values_.begin() + static_cast<long>(k)));
}

void StepPathBuilder::jump(double t, double value) {
  if (value == last_) return;
  if (!epochs_.empty() && t == epochs_.back()) {
    // a second move at the same instant overwrites the first
    values_.back() = value;
    const double before = values_.size() >= 2 ? values_[values_.size() - 2] : initial_;
    if (value == before) {
      epochs_.pop_back();
      values_.pop_back();
    }
    last_ = value;
    return;
  }
  epochs_.push_back(t);
  values_.push_back(value);
  last_ = value;
}

StepPath StepPathBuilder::finish(double horizon) && {
  return StepPath(horizon, initial_, std::move(epochs_), std::move(values_));
}

bool Region::contains(double x) const noexcept {
  switch (kind) {
    case Kind::Above: return x > a;
    case Kind::Below: return x < b;
    case Kind::Between: return x > a && x < b;
  }
  return false;
}

TimeChange::TimeChange(const StepPath& p, Region region) {
  knots_t_.push_back(0.0);
  knots_a_.push_back(0.0);
  long double acc = 0.0L;
  for (const auto& s : p.segments()) {
    if (region.contains(s.value)) acc += static_cast<long double>(s.end) - s.start;
    knots_t_.push_back(s.end);
    knots_a_.push_back(static_cast<double>(acc));
  }
}

double TimeChange::operator()(double t) const {
  const auto it = std::upper_bound(knots_t_.begin(), knots_t_.end(), t);
  if (it == knots_t_.begin()) return 0.0;
  if (it == knots_t_.end()) return knots_a_.back();
  const auto k = static_cast<std::size_t>(it - knots_t_.begin());
  const double slope_one = knots_a_[k] > knots_a_[k - 1];
  return knots_a_[k - 1] + (slope_one ? t - knots_t_[k - 1] : 0.0);
}

double TimeChange::inverse(double s) const {
  if (s >= knots_a_.back()) return knots_t_.back();
  const auto it = std::upper_bound(knots_a_.begin(), knots_a_.end(), s);
  const auto k = static_cast<std::size_t>(it - knots_a_.begin());
  return knots_t_[k - 1] + (s - knots_a_[k - 1]);
}

StepPath kill_left(const StepPath& p, double barrier) {
  if (p.initial() <= barrier) return StepPath::constant(p.horizon(), barrier);
  const auto& e = p.epochs();
  const auto& v = p.values();
  std::vector<double> epochs, values;
  for (std::size_t k = 0; k < e.size(); ++k) {
    epochs.push_back(e[k]);
    if (v[k] <= barrier) {
      values.push_back(barrier);
      break;
    }
    values.push_back(v[k]);
  }
  return StepPath(p.horizon(), p.initial(), std::move(epochs), std::move(values));
}

StepPath kill_right(const StepPath& p, double barrier) {
  if (p.initial() >= barrier) return StepPath::constant(p.horizon(), barrier);
  const auto& e = p.epochs();
  const auto& v = p.values();
  std::vector<double> epochs, values;
  for (std::size_t k = 0; k < e.size(); ++k) {
    epochs.push_back(e[k]);
    if (v[k] >= barrier) {
      values.push_back(barrier);
      break;
    }
    values.push_back(v[k]);
  }
  return StepPath(p.horizon(), p.initial(), std::move(epochs), std::move(values));
}

Reflection reflect_left(const StepPath& p, double a) {
  if (p.initial() < a) throw Error(ErrorCode::StartBelowBarrier, "reflect_left needs initial >= a");
  StepPathBuilder out(p.initial());
  StepPathBuilder push(0.0);
  double running_min = p.initial();
  const auto& e = p.epochs();
  const auto& v = p.values();
  for (std::size_t k = 0; k < e.size(); ++k) {
    running_min = std::min(running_min, v[k]);
    const double eta = running_min < a ? a - running_min : 0.0;
    const double y = v[k] == running_min && eta > 0.0 ? a : v[k] + eta;
    out.jump(e[k], y);
    push.jump(e[k], eta);
  }
  return {std::move(out).finish(p.horizon()), std::move(push).finish(p.horizon())};
}

Reflection reflect_right(const StepPath& p, double b) {
  if (p.initial() > b) throw Error(ErrorCode::StartBelowBarrier, "reflect_right needs initial <= b");
  StepPathBuilder out(p.initial());
  StepPathBuilder push(0.0);
  double running_max = p.initial();
  const auto& e = p.epochs();
  const auto& v = p.values();
  for (std::size_t k = 0; k < e.size(); ++k) {
    running_max = std::max(running_max, v[k]);
    const double eta = running_max > b ? running_max - b : 0.0;
    const double y = v[k] == running_max && eta > 0.0 ? b : v[k] - eta;
    out.jump(e[k], y);
    push.jump(e[k], eta);
  }
  return {std::move(out).finish(p.horizon()), std::move(push).finish(p.horizon())};
}

TwoSidedReflection reflect_two_sided(const StepPath& p, double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "two-sided reflection needs a < b");
  if (p.initial() < a || p.initial() > b) {
    throw Error(ErrorCode::StartBelowBarrier, "two-sided reflection needs a <= initial <= b");
  }
  StepPathBuilder out(p.initial());
  StepPathBuilder lower(0.0);
  StepPathBuilder upper(0.0);
  double z = p.initial();
  double prev = p.initial();
  double eta_l = 0.0, eta_u = 0.0;
  const auto& e = p.epochs();
  const auto& v = p.values();
  for (std::size_t k = 0; k < e.size(); ++k) {
    z += v[k] - prev;
    prev = v[k];
    if (z < a) {
      eta_l += a - z;
      z = a;
    } else if (z > b) {
      eta_u += z - b;
      z = b;
    }
    out.jump(e[k], z);
    lower.jump(e[k], eta_l);
    upper.jump(e[k], eta_u);
  }
  return {std::move(out).finish(p.horizon()), std::move(lower).finish(p.horizon()),
          std::move(upper).finish(p.horizon())};
}

StepPath fast_forward(const StepPath& p, Region region) {
  long double kept = 0.0L;
  std::optional<StepPathBuilder> out;
  for (const auto& s : p.segments()) {
    if (!(s.end > s.start) || !region.contains(s.value)) continue;
    if (!out) {
      out.emplace(s.value);
    } else {
      out->jump(static_cast<double>(kept), s.value);
    }
    kept += static_cast<long double>(s.end) - s.start;
  }
  if (!out || !(kept > 0.0L)) {
    throw Error(ErrorCode::EmptyRegion, "path spends no time in the fast-forward region");
  }
  return std::move(*out).finish(static_cast<double>(kept));
}

StepPath scale_path(const StepPath& p, double c) {
  std::vector<double> values(p.values());
  for (auto& v : values) v *= c;
  return StepPath(p.horizon(), p.initial() * c, p.epochs(), std::move(values));
}

std::optional<double> value_or_absorbed(const StepPath& p, double t, double left, double right) {
  if (t <= p.horizon()) return p.value_at(t);
  const double f = p.final_value();
  if (f == left || f == right) return f;
  return std::nullopt;
}

long Lattice::index(double x) const {
  const double h = this->h();
  const double k = std::round((x + 1.0) / h);
  if (std::abs(x - value(static_cast<long>(k))) > 1e-9 * h) {
    throw Error(ErrorCode::NotGridPath, "value " + std::to_string(x) + " is off the grid");
  }
  return static_cast<long>(k);
}

namespace {

StepPath to_lattice(const StepPath& p, const Lattice& lat) {
  std::vector<double> values;
  values.reserve(p.values().size());
  for (double v : p.values()) values.push_back(static_cast<double>(lat.index(v)));
  return StepPath(p.horizon(), static_cast<double>(lat.index(p.initial())), p.epochs(),
                  std::move(values));
}

StepPath from_lattice(const StepPath& p, const Lattice& lat) {
  std::vector<double> values;
  values.reserve(p.values().size());
  for (double v : p.values()) values.push_back(lat.value(static_cast<long>(v)));
  return StepPath(p.horizon(), lat.value(static_cast<long>(p.initial())), p.epochs(),
                  std::move(values));
}

}  // namespace

StepPath apply_boundary(const StepPath& p, BoundaryPair bc, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "apply_boundary needs n >= 1");
  const Lattice lat{n};
  const StepPath k = to_lattice(p, lat);
  const double lo = 0.0;
  const double hi = static_cast<double>(n + 1);
  if (!(k.initial() > lo && k.initial() < hi)) {
    throw Error(ErrorCode::InvalidArgument, "apply_boundary needs an interior start");
  }
  StepPath out = k;
  switch (bc.left) {
    case LeftBoundary::D:
      out = bc.right == RightBoundary::D ? kill_right(kill_left(k, lo), hi)
                                         : kill_left(fast_forward(k, Region::below(hi)), lo);
      break;
    case LeftBoundary::N:
      out = bc.right == RightBoundary::D ? kill_right(fast_forward(k, Region::above(lo)), hi)
                                         : fast_forward(k, Region::between(lo, hi));
      break;
    case LeftBoundary::NStar: {
      const StepPath r = reflect_left(k, lo + 1.0).path;
      out = bc.right == RightBoundary::D ? kill_right(r, hi) : fast_forward(r, Region::below(hi));
      break;
    }
  }
  return from_lattice(out, lat);
}

}  // namespace oneside
