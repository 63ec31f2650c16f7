#include <doctest.h>

#include "oneside/error.hpp"
#include "oneside/symbol.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <limits>

using namespace oneside;

namespace {

// tempered stable measure supplied through the generic quadrature route
LaplaceExponent custom_tempered(double alpha, double lambda) {
  const auto ref = LaplaceExponent::tempered_stable(alpha, lambda);
  CustomMeasure m;
  m.density = [ref](double y) { return ref.levy_density(y); };
  m.tail = [ref](double y) { return ref.levy_tail(y); };
  m.integrated_tail = [ref](double y) { return ref.integrated_tail(y); };
  return LaplaceExponent(m);
}

}  // namespace

TEST_CASE("stable psi and derivative") {
  const auto e = LaplaceExponent::stable(1.5);
  CHECK(e.psi(0.0) == 0.0);
  CHECK(e.psi(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.psi(4.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(e.psi_prime(1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(e.psi_prime(4.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(e.psi_prime(1e-8) == doctest::Approx(1.5e-4));
  CHECK_NOTHROW(e.validate());
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(LaplaceExponent::stable(2.0), Error);
  CHECK_THROWS_AS(LaplaceExponent::stable(1.0), Error);
  CHECK_THROWS_AS(LaplaceExponent::tempered_stable(1.5, -1.0), Error);
  try {
    LaplaceExponent::stable(0.5);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::InvalidSpec);
  }
  CustomMeasure bad;
  bad.density = [](double) { return -1.0; };
  bad.tail = [](double) { return 1.0; };
  bad.integrated_tail = [](double) { return 1.0; };
  CHECK_THROWS_AS(LaplaceExponent{bad}, Error);
  CHECK_THROWS_AS(LaplaceExponent::stable(1.5).psi(-1.0), Error);
}

TEST_CASE("tempered psi has no cancellation at small argument") {
  const auto e = LaplaceExponent::tempered_stable(1.5, 2.0);
  // leading term alpha (alpha - 1) lambda^{alpha - 2} xi^2 / 2
  const double xi = 1e-7;
  const double lead = 1.5 * 0.5 * std::pow(2.0, -0.5) * xi * xi / 2.0;
  CHECK(e.psi(xi) == doctest::Approx(lead).epsilon(1e-6));
  CHECK(LaplaceExponent::tempered_stable(1.5, 0.0).psi(3.0) == doctest::Approx(std::pow(3.0, 1.5)));
}

TEST_CASE("custom measure quadrature matches the closed form") {
  const auto ref = LaplaceExponent::tempered_stable(1.6, 1.0);
  const auto cus = custom_tempered(1.6, 1.0);
  for (double xi : {0.01, 0.3, 1.0, 7.0, 40.0}) {
    CHECK(cus.psi(xi) == doctest::Approx(ref.psi(xi)).epsilon(1e-9));
    CHECK(cus.psi_prime(xi) == doctest::Approx(ref.psi_prime(xi)).epsilon(1e-9));
  }
  CHECK_NOTHROW(cus.validate());
}

TEST_CASE("psi equals xi^2 times the Laplace transform of the integrated tail") {
  const auto cus = custom_tempered(1.5, 0.5);
  for (double xi : {0.5, 2.0}) {
    // int_0^inf e^{-xi x} Phi(x) dx; Phi ~ x^{1-alpha} at 0 is an endpoint singularity
    boost::math::quadrature::exp_sinh<double> es;
    const double acc = es.integrate([&](double x) { return x > 0.0 ? std::exp(-xi * x) * cus.integrated_tail(x) : 0.0; });
    CHECK(xi * xi * acc == doctest::Approx(cus.psi(xi)).epsilon(1e-8));
  }
}

TEST_CASE("psi is convex and increasing") {
  for (const auto& e : {LaplaceExponent::stable(1.3), LaplaceExponent::tempered_stable(1.7, 3.0)}) {
    double prev = 0.0;
    for (double a = 0.05; a < 20.0; a *= 1.7) {
      const double b = 1.3 * a + 0.1;
      CHECK(e.psi(0.5 * (a + b)) <= 0.5 * (e.psi(a) + e.psi(b)) + 1e-12 * e.psi(b));
      CHECK(e.psi(a) > prev);
      prev = e.psi(a);
    }
  }
}

TEST_CASE("complex psi agrees on the real axis") {
  const auto e = LaplaceExponent::tempered_stable(1.4, 0.7);
  const auto z = e.psi(std::complex<double>(2.5, 0.0));
  CHECK(z.real() == doctest::Approx(e.psi(2.5)).epsilon(1e-13));
  CHECK(std::abs(z.imag()) < 1e-14);
}

TEST_CASE("discrete symbol and its inverse") {
  const auto e = LaplaceExponent::stable(1.5);
  CHECK(e.varphi(0.3, 0.0) == 0.0);
  CHECK(e.varphi(1.0, 1.0) == doctest::Approx(1.3661373182744377).epsilon(1e-14));
  CHECK(e.varphi(0.1, 2.0) > e.varphi(0.1, 1.0));
  CHECK(e.varphi_inverse(0.1, 0.0) == 0.0);
  CHECK(e.varphi_inverse(0.5, e.varphi(0.5, 0.7)) == doctest::Approx(0.7).epsilon(1e-10));
  const double b = e.varphi_inverse(0.1, 1.0);
  CHECK(b == doctest::Approx(0.98334819021725271).epsilon(1e-12));
  CHECK(std::abs(e.varphi(0.1, b) - 1.0) <= 1e-12);

  double prev = -1.0;
  for (double beta = 0.0; beta < 50.0; beta += 0.37) {
    const double v = e.varphi(0.2, beta);
    CHECK(v > prev);
    prev = v;
    CHECK(std::abs(e.varphi_inverse(0.2, v) - beta) <= 1e-10 * std::max(1.0, beta));
  }
  // finite-difference derivative
  const double d = (e.varphi(0.2, 1.0 + 1e-6) - e.varphi(0.2, 1.0 - 1e-6)) / 2e-6;
  CHECK(e.varphi_prime(0.2, 1.0) == doctest::Approx(d).epsilon(1e-7));
}

TEST_CASE("varphi_inverse reports an unreachable bracket") {
  const auto e = LaplaceExponent::stable(1.5);
  try {
    e.varphi_inverse(1.0, std::numeric_limits<double>::infinity());
    FAIL("expected a bracket failure");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::BracketFailure);
  }
}

TEST_CASE("Levy tail functions of the stable measure") {
  const auto e = LaplaceExponent::stable(1.5);
  // tail(y) = int_y^inf density, integrated_tail(x) = int_x^inf tail
  const double y = 0.7;
  double acc = 0.0;
  const int m = 200000;
  for (int k = 0; k < m; ++k) {
    const double u = (k + 0.5) / m;  // y / u over (0, 1)
    acc += e.levy_density(y / u) * y / (u * u) / m;
  }
  CHECK(acc == doctest::Approx(e.levy_tail(y)).epsilon(1e-6));
  CHECK(e.integrated_tail(1.0) == doctest::Approx(1.0 / (0.5 * 1.5 * std::tgamma(-1.5))));
}
