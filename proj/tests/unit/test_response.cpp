#include <cmath>
#include <numbers>

#include "doctest.h"
#include "udw/response.hpp"

using namespace udw;

namespace {
constexpr double kPi = std::numbers::pi;

QuadratureOptions tight() {
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-14;
  return opt;
}
}  // namespace

TEST_CASE("d=4 inertial rate limits") {
  const WightmanKernel k4(4);
  const Worldline rest = Worldline::static_at(4, {0.0, 0.0, 0.0});

  SUBCASE("no spontaneous excitation (omega > 0)") {
    for (double omega : {1.0, 2.3}) {
      const AsymptoticRate r =
          transition_rate_asymptotic(4, rest, omega, k4, 200.0, tight());
      CHECK(std::abs(r.value) < 1e-6);
    }
  }
  SUBCASE("de-excitation rate -omega/(2 pi) (omega < 0)") {
    for (double omega : {-1.0, -2.3}) {
      const AsymptoticRate r =
          transition_rate_asymptotic(4, rest, omega, k4, 200.0, tight());
      const double expect = -omega / (2.0 * kPi);
      CHECK(std::abs(r.value - expect) < 1e-6 * expect);
    }
  }
}

TEST_CASE("d=3 inertial rate limits: 0 and 1/2") {
  const WightmanKernel k3(3);
  const Worldline rest = Worldline::static_at(3, {0.0, 0.0});
  const AsymptoticRate up =
      transition_rate_asymptotic(3, rest, 1.4, k3, 300.0, tight());
  CHECK(std::abs(up.value) < 1e-6);
  const AsymptoticRate down =
      transition_rate_asymptotic(3, rest, -1.4, k3, 300.0, tight());
  CHECK(std::abs(down.value - 0.5) < 1e-6 * 0.5);
}

TEST_CASE("d=4 uniform acceleration: Planck rate") {
  const WightmanKernel k4(4);
  const double a = 6.0;
  const Worldline hyp = Worldline::uniform_acceleration(4, a);
  for (double omega : {1.15, 2.3}) {
    const AsymptoticRate r =
        transition_rate_asymptotic(4, hyp, omega, k4, 200.0, tight());
    const double expect =
        omega / (2.0 * kPi) / std::expm1(2.0 * kPi * omega / a);
    CHECK(std::abs(r.value - expect) < 1e-6 * expect);
  }
}

TEST_CASE("detailed balance across dimensions") {
  const double a = 3.0, omega = 2.0;
  const double kms = std::exp(-2.0 * kPi * omega / a);
  for (int d : {3, 4, 5, 6}) {
    const WightmanKernel k(d);
    const Worldline hyp = Worldline::uniform_acceleration(d, a);
    const double up =
        transition_rate_asymptotic(d, hyp, omega, k, 200.0, tight()).value;
    const double down =
        transition_rate_asymptotic(d, hyp, -omega, k, 200.0, tight()).value;
    CHECK(std::abs(up / down - kms) < 1e-4 * kms);
  }
}

TEST_CASE("d=5 inertial consistency: no excitation") {
  const WightmanKernel k5(5);
  const Worldline rest = Worldline::static_at(5, {0.0, 0.0, 0.0});
  const RateResult r = transition_rate(5, rest, 2.0, 0.0, 100.0, k5, tight());
  CHECK(std::abs(r.value) < 1e-6);
}

TEST_CASE("d=6 inertial: power tails cancel against boundary terms") {
  const WightmanKernel k6(6);
  const Worldline rest = Worldline::static_at(6, {0.0, 0.0, 0.0, 0.0});
  const RateResult r = transition_rate(6, rest, 2.0, 0.0, 50.0, k6, tight());
  CHECK(std::abs(r.value) < 1e-6);
}

TEST_CASE("d=6 gate: constant scalar acceleration required") {
  const WightmanKernel k6(6);
  const Worldline hyp = Worldline::uniform_acceleration(6, 2.0);
  CHECK_NOTHROW(transition_rate(6, hyp, 1.0, 0.0, 3.0, k6));
  const Worldline asym = Worldline::asymptotic_uniform(6, 2.0, 1.0);
  CHECK_THROWS_AS(transition_rate(6, asym, 1.0, 0.0, 3.0, k6),
                  NonConstantAcceleration);
}

TEST_CASE("stationarity: rate independent of the switch-off moment") {
  const WightmanKernel k4(4);
  const Worldline hyp = Worldline::uniform_acceleration(4, 2.0);
  const double ref = transition_rate(4, hyp, 1.7, 0.0, 5.0, k4).value;
  for (double tau : {3.0, 10.0, 25.0}) {
    const double v = transition_rate(4, hyp, 1.7, tau, 5.0, k4).value;
    CHECK(std::abs(v - ref) <= 1e-8 * std::abs(ref));
  }
}

TEST_CASE("boundary-term bookkeeping is exact") {
  const WightmanKernel k5(5);
  const Worldline hyp = Worldline::uniform_acceleration(5, 2.0);
  const RateResult r = transition_rate(5, hyp, 1.2, 0.0, 7.0, k5);
  CHECK(r.value == r.integral_term + r.boundary_sum());
  CHECK(r.boundary_terms.size() == 2);
}

TEST_CASE("unsupported dimensions") {
  const WightmanKernel k4(4);
  const Worldline rest = Worldline::static_at(4, {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(transition_rate(7, rest, 1.0, 0.0, 1.0, k4),
                  UnsupportedDimension);
  SwitchingFunction chi(0.0, 1.0, 0.1);
  CHECK_THROWS_AS(response_function(5, chi, rest, 1.0, k4),
                  UnsupportedDimension);
  CHECK_THROWS_AS(transition_rate(3, rest, 1.0, 0.0, 1.0, k4),
                  DimensionMismatch);
}

TEST_CASE("response function: d=3 high-frequency limits") {
  // The kernel term's s -> 0 boundary contributes -+ chi^2/4 on top of the
  // +chi^2/4 switching term, so F -> 0 (omega -> +inf, no excitation at
  // infinite gap) and F -> chi^2/2 (omega -> -inf), matching the sharp
  // rates 0 and 1/2 times the effective duration.
  const WightmanKernel k3(3);
  const Worldline rest = Worldline::static_at(3, {0.0, 0.0});
  SwitchingFunction chi(0.0, 2.0, 0.2);
  QuadratureOptions opt;
  opt.rel_tol = 1e-7;
  opt.abs_tol = 1e-10;
  const double csq = chi.chi_sq_integral();
  const double up = response_function(3, chi, rest, 250.0, k3, opt);
  CHECK(std::abs(up) < 0.01 * csq);
  const double down = response_function(3, chi, rest, -250.0, k3, opt);
  CHECK(std::abs(down - 0.5 * csq) < 0.01 * csq);
}

TEST_CASE("response function: d=4 inertial de-excitation scales as |omega| T / 2 pi") {
  const WightmanKernel k4(4);
  const Worldline rest = Worldline::static_at(4, {0.0, 0.0, 0.0});
  const double T = 20.0, omega = -3.0, delta = 0.05;
  SwitchingFunction chi(0.0, T, delta);
  QuadratureOptions opt;
  opt.rel_tol = 1e-7;
  opt.abs_tol = 1e-10;
  const double f = response_function(4, chi, rest, omega, k4, opt);
  const double leading = -omega * T / (2.0 * kPi);
  CHECK(std::abs(f - leading) < 0.15 * leading);

  // Rate x duration oracle for the same window.
  const double rate =
      transition_rate_asymptotic(4, rest, omega, k4, 200.0, opt).value;
  CHECK(std::abs(f - rate * T) < 0.15 * std::abs(rate) * T);
}

TEST_CASE("response function: positivity") {
  const WightmanKernel k4(4);
  QuadratureOptions opt;
  opt.rel_tol = 1e-6;
  opt.abs_tol = 1e-9;
  SwitchingFunction chi(0.0, 3.0, 0.1);
  for (double omega : {-2.0, -0.5, 0.8, 2.7}) {
    for (const Worldline& w : {Worldline::static_at(4, {0.0, 0.0, 0.0}),
                               Worldline::uniform_acceleration(4, 1.5)}) {
      CHECK(response_function(4, chi, w, omega, k4, opt) >= 0.0);
    }
  }
}

TEST_CASE("d=2 response: infrared mass only shifts by a constant") {
  const Worldline rest = Worldline::static_at(2, {0.0});
  SwitchingFunction chi(0.0, 1.5, 0.15);
  QuadratureOptions opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-11;
  const double omega = 1.3;
  const double f1 =
      response_function(2, chi, rest, omega, WightmanKernel(2, 1.0), opt);
  const double f2 =
      response_function(2, chi, rest, omega, WightmanKernel(2, 2.0), opt);
  // Delta W0 = -ln(mu2^2/mu1^2)/(4 pi) is an additive constant: the
  // response shifts by 2 Delta int int chi chi cos(omega s).
  const double overlap =
      integrate_2d_switch(
          [omega](double, double s) { return std::cos(omega * s); }, chi, opt)
          .value;
  const double expect = -std::log(4.0) / (4.0 * M_PI) * 2.0 * overlap;
  CHECK(f2 - f1 == doctest::Approx(expect).epsilon(1e-6));
}
