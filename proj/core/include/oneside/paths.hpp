#pragma once

#include "oneside/ratemat.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace oneside {

/// Piecewise constant cadlag path on [0, T].
///
/// values[k] holds on [epochs[k], epochs[k+1]); `initial` holds on
/// [0, epochs[0]). Null jumps are merged away on construction.
class StepPath {
public:
  struct Segment {
    double start;
    double end;
    double value;
  };

  StepPath(double horizon, double initial, std::vector<double> epochs = {},
           std::vector<double> values = {});

  static StepPath constant(double horizon, double value) { return StepPath(horizon, value); }

  double horizon() const noexcept { return horizon_; }
  double initial() const noexcept { return initial_; }
  const std::vector<double>& epochs() const noexcept { return epochs_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t jump_count() const noexcept { return epochs_.size(); }
  double final_value() const noexcept { return values_.empty() ? initial_ : values_.back(); }

  /// Right-continuous evaluation; t must lie in [0, T].
  double value_at(double t) const;
  /// Value just before t (left limit), t in (0, T].
  double left_limit(double t) const;
  std::vector<Segment> segments() const;
  /// Same path on [0, T'] for T' <= T.
  StepPath truncate(double horizon) const;

  friend bool operator==(const StepPath&, const StepPath&) = default;

private:
  double horizon_;
  double initial_;
  std::vector<double> epochs_;
  std::vector<double> values_;
};

/// Appends segments; equal consecutive values are merged.
class StepPathBuilder {
public:
  explicit StepPathBuilder(double initial) : initial_(initial), last_(initial) {}
  void jump(double t, double value);
  double current() const noexcept { return last_; }
  StepPath finish(double horizon) &&;

private:
  double initial_;
  double last_;
  std::vector<double> epochs_;
  std::vector<double> values_;
};

/// Region used by fast-forwarding; all indicators are strict.
struct Region {
  enum class Kind { Above, Below, Between };
  Kind kind = Kind::Above;
  double a = 0.0;
  double b = 0.0;

  static Region above(double a) { return {Kind::Above, a, 0.0}; }
  static Region below(double b) { return {Kind::Below, 0.0, b}; }
  static Region between(double a, double b) { return {Kind::Between, a, b}; }
  bool contains(double x) const noexcept;
};

/// A(t) = Lebesgue time in the region up to t and its right inverse.
class TimeChange {
public:
  TimeChange(const StepPath& p, Region region);
  double operator()(double t) const;
  /// inf { t : A(t) > s } for 0 <= s < A(T); A(T) maps to T.
  double inverse(double s) const;
  double total() const noexcept { return knots_a_.back(); }

private:
  std::vector<double> knots_t_;
  std::vector<double> knots_a_;
};

struct Reflection {
  StepPath path;
  StepPath push;  ///< nondecreasing pushing functional
};

struct TwoSidedReflection {
  StepPath path;
  StepPath push_lower;
  StepPath push_upper;
};

StepPath kill_left(const StepPath& p, double barrier = -1.0);
StepPath kill_right(const StepPath& p, double barrier = 1.0);
Reflection reflect_left(const StepPath& p, double a);
Reflection reflect_right(const StepPath& p, double b);
TwoSidedReflection reflect_two_sided(const StepPath& p, double a, double b);
StepPath fast_forward(const StepPath& p, Region region);
StepPath scale_path(const StepPath& p, double c);

/// Time-t value of a possibly absorbed output: beyond the horizon the final
/// value is returned when it equals one of the absorbing levels.
std::optional<double> value_or_absorbed(const StepPath& p, double t, double left = -1.0,
                                        double right = 1.0);

/// Lattice coordinates k = (x + 1)/h on the mesh h = 2/(n+1).
struct Lattice {
  std::size_t n = 0;
  double h() const noexcept { return 2.0 / static_cast<double>(n + 1); }
  double value(long k) const noexcept {
    return 2.0 * static_cast<double>(k) / static_cast<double>(n + 1) - 1.0;
  }
  long index(double x) const;
};

/// Boundary maps of the grid process applied pathwise:
///   DD = kill_right(kill_left(p))
///   DN = kill_left(fast_forward(p, below(1)))
///   ND = kill_right(fast_forward(p, above(-1)))
///   NN = fast_forward(p, between(-1, 1))
///   N*D = kill_right(reflect_left(p, h - 1))
///   N*N = fast_forward(reflect_left(p, h - 1), below(1))
/// The maps run on exact lattice indices; output values are grid points.
StepPath apply_boundary(const StepPath& p, BoundaryPair bc, std::size_t n);

struct J1Bounds {
  double upper = 0.0;
  double lower = 0.0;
};

/// Bounds on the Skorokhod J1 distance on [0, T]. `window` limits how far
/// apart (in jump count) matched epochs may be in the alignment search.
J1Bounds j1_distance(const StepPath& p, const StepPath& q, double T, std::size_t window = 8);

}  // namespace oneside
