#include <doctest.h>

#include "oneside/error.hpp"
#include "oneside/grunwald.hpp"
#include "oneside/paths.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace oneside;
using oneside::testing::lattice_walk;

namespace {

StepPath sample_path() {
  // 0.2 on [0,1), -0.5 on [1,2), -1.4 on [2,3), 0.7 on [3,4)
  return StepPath(4.0, 0.2, {1.0, 2.0, 3.0}, {-0.5, -1.4, 0.7});
}

double sup_distance(const StepPath& p, const StepPath& q) {
  std::vector<double> ts{0.0};
  ts.insert(ts.end(), p.epochs().begin(), p.epochs().end());
  ts.insert(ts.end(), q.epochs().begin(), q.epochs().end());
  double d = 0.0;
  for (double t : ts) {
    if (t <= std::min(p.horizon(), q.horizon())) d = std::max(d, std::abs(p.value_at(t) - q.value_at(t)));
  }
  return d;
}

}  // namespace

TEST_CASE("step path basics") {
  const auto p = sample_path();
  CHECK(p.value_at(0.0) == 0.2);
  CHECK(p.value_at(1.0) == -0.5);
  CHECK(p.left_limit(1.0) == 0.2);
  CHECK(p.value_at(4.0) == 0.7);
  CHECK(p.jump_count() == 3);
  CHECK(p.truncate(2.5).jump_count() == 2);
  CHECK_THROWS_AS(p.value_at(4.5), Error);
  // null jumps merge
  CHECK(StepPath(1.0, 0.0, {0.5}, {0.0}).jump_count() == 0);
  StepPathBuilder b(1.0);
  b.jump(0.25, 2.0);
  b.jump(0.5, 2.0);
  CHECK(std::move(b).finish(1.0).jump_count() == 1);
}

TEST_CASE("killing maps") {
  const auto p = sample_path();
  const auto k = kill_left(p, -1.0);
  CHECK(k.value_at(1.5) == -0.5);
  CHECK(k.value_at(2.0) == -1.0);
  CHECK(k.value_at(3.5) == -1.0);
  CHECK(kill_right(p, 0.5).value_at(3.5) == 0.5);
  CHECK(kill_right(p, 0.5).value_at(2.5) == -1.4);
  CHECK(kill_left(StepPath::constant(1.0, -2.0)).value_at(0.5) == -1.0);
  CHECK(value_or_absorbed(k, 10.0) == -1.0);
  CHECK_FALSE(value_or_absorbed(p, 10.0).has_value());
}

TEST_CASE("reflection at a lower barrier") {
  const auto p = sample_path();
  const auto r = reflect_left(p, -1.0);
  CHECK(r.path.value_at(1.5) == -0.5);
  CHECK(r.path.value_at(2.5) == -1.0);
  CHECK(r.push.value_at(2.5) == doctest::Approx(0.4));
  CHECK(r.path.value_at(3.5) == doctest::Approx(1.1));
  CHECK_THROWS_AS(reflect_left(p, 0.5), Error);
  CHECK_THROWS_AS(reflect_right(p, 0.0), Error);
  const auto up = reflect_right(p, 0.3);
  CHECK(up.path.value_at(2.5) == -1.4);
  CHECK(up.path.value_at(3.5) == doctest::Approx(0.3));
  CHECK(up.push.final_value() == doctest::Approx(0.4));
}

TEST_CASE("reflection is minimal, monotone in push and Lipschitz") {
  const auto c = compute_coeffs(LaplaceExponent::stable(1.5), 0.1, 4000);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto p = oneside::testing::to_grid(lattice_walk(c, 10, 0.5, 11, k), 19);
    const auto r = reflect_left(p, -1.0);
    const auto& pe = r.push.values();
    for (std::size_t i = 1; i < pe.size(); ++i) REQUIRE(pe[i] >= pe[i - 1]);
    for (const auto& s : r.path.segments()) CHECK(s.value >= -1.0 - 1e-12);
    // push increases only while the output sits at the barrier
    for (std::size_t i = 0; i < r.push.epochs().size(); ++i) {
      CHECK(r.path.value_at(r.push.epochs()[i]) == doctest::Approx(-1.0));
    }
    // Lipschitz with constant 2 under the sup norm
    StepPath moved(p.horizon(), p.initial() + 0.05, p.epochs(), [&] {
      auto v = p.values();
      for (auto& x : v) x += 0.05;
      return v;
    }());
    CHECK(sup_distance(reflect_left(moved, -1.0).path, r.path) <= 2.0 * 0.05 + 1e-12);
  }
}

TEST_CASE("two-sided reflection") {
  const auto p = sample_path();
  const auto r = reflect_two_sided(p, -1.0, 0.5);
  for (const auto& s : r.path.segments()) {
    CHECK(s.value >= -1.0 - 1e-12);
    CHECK(s.value <= 0.5 + 1e-12);
  }
  CHECK(r.path.value_at(2.5) == doctest::Approx(-1.0));
  CHECK(r.path.value_at(3.5) == doctest::Approx(0.5));
  CHECK(r.push_lower.final_value() == doctest::Approx(0.4));
  CHECK(r.push_upper.final_value() == doctest::Approx(0.6));
  // no overshoot of b: one-sided reflection at a suffices
  const auto small = StepPath(1.0, 0.0, {0.5}, {-2.0});
  const auto two = reflect_two_sided(small, -1.0, 1.0);
  CHECK(two.path == reflect_left(small, -1.0).path);
  CHECK_THROWS_AS(reflect_two_sided(p, 0.5, -1.0), Error);
}

TEST_CASE("fast-forward") {
  const auto p = sample_path();
  const auto f = fast_forward(p, Region::above(-1.0));
  CHECK(f.horizon() == doctest::Approx(3.0));
  CHECK(f.value_at(1.5) == -0.5);
  CHECK(f.value_at(2.5) == 0.7);
  const auto g = fast_forward(p, Region::between(-1.0, 0.5));
  CHECK(g.horizon() == doctest::Approx(2.0));
  CHECK(g.final_value() == -0.5);
  CHECK_THROWS_AS(fast_forward(p, Region::above(5.0)), Error);
  // the time change and its right inverse
  const TimeChange a(p, Region::above(-1.0));
  CHECK(a(2.5) == doctest::Approx(2.0));
  CHECK(a.inverse(2.0) == doctest::Approx(3.0));
  CHECK(a.total() == doctest::Approx(3.0));
}

TEST_CASE("fast-forward commutes with killing on lattice paths") {
  const auto c = compute_coeffs(LaplaceExponent::stable(1.5), 0.1, 4000);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto p = lattice_walk(c, 10, 1.0, 21, k);
    // index scale of n = 19: kill at 20, fast-forward above 0
    const auto a = kill_right(fast_forward(p, Region::above(0.0)), 20.0);
    const auto b = fast_forward(kill_right(p, 20.0), Region::above(0.0));
    const double common = std::min(a.horizon(), b.horizon());
    CHECK(a.truncate(common) == b.truncate(common));
  }
}

TEST_CASE("lattice and boundary maps") {
  const Lattice lat{9};
  CHECK(lat.h() == doctest::Approx(0.2));
  CHECK(lat.value(0) == -1.0);
  CHECK(lat.value(10) == 1.0);
  CHECK(lat.index(0.0) == 5);
  CHECK_THROWS_AS(lat.index(0.05), Error);
  const auto p = StepPath(1.0, 0.0, {0.25, 0.5}, {-1.4, 0.2});
  const auto dd = apply_boundary(p, BoundaryPair::parse("DD"), 9);
  CHECK(dd.final_value() == -1.0);
  const auto nd = apply_boundary(p, BoundaryPair::parse("ND"), 9);
  CHECK(nd.horizon() == doctest::Approx(0.75));
  CHECK(nd.final_value() == doctest::Approx(0.2));
  const auto nsd = apply_boundary(p, BoundaryPair::parse("N*D"), 9);
  CHECK(nsd.value_at(0.3) == doctest::Approx(-0.8));
  CHECK(nsd.final_value() == doctest::Approx(0.2 + 0.6));
}

TEST_CASE("scaling and the J1 distance") {
  const auto a = StepPath(1.0, 0.0, {0.5}, {1.0});
  const auto b = StepPath(1.0, 0.0, {0.6}, {1.0});
  const auto d = j1_distance(a, b, 1.0);
  CHECK(d.upper == doctest::Approx(0.1));
  CHECK(d.lower <= d.upper);
  CHECK(d.lower >= 0.0);
  CHECK(j1_distance(a, a, 1.0).upper == 0.0);
  // jump sizes that differ cannot be aligned below the size gap
  const auto c = StepPath(1.0, 0.0, {0.5}, {1.3});
  CHECK(j1_distance(a, c, 1.0).upper >= 0.3 - 1e-12);
  const auto cg = compute_coeffs(LaplaceExponent::stable(1.5), 0.1, 4000);
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto p = oneside::testing::to_grid(lattice_walk(cg, 10, 1.0, 31, k), 19);
    double sup = std::abs(p.initial());
    for (double v : p.values()) sup = std::max(sup, std::abs(v));
    for (double s : {0.9, 1.1}) {
      CHECK(j1_distance(p, scale_path(p, s), 1.0).upper <= std::abs(1.0 - s) * sup + 1e-12);
    }
  }
}
