#include <cmath>
#include <numbers>

#include "doctest.h"
#include "udw/field_kernel.hpp"

using namespace udw;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("d=4 pullbacks") {
  const WightmanKernel k4(4);
  const Worldline rest = Worldline::static_at(4, {0.0, 0.0, 0.0});
  const double s = 0.7;
  const auto w_in = k4.w0_self(rest, 1.0, s);
  CHECK(w_in.real() ==
        doctest::Approx(-1.0 / (4.0 * kPi * kPi * s * s)).epsilon(1e-13));
  CHECK(w_in.imag() == 0.0);

  const double a = 2.0;
  const Worldline hyp = Worldline::uniform_acceleration(4, a);
  const double sh = std::sinh(0.5 * a * s);
  const auto w_acc = k4.w0_self(hyp, 0.3, s);
  CHECK(w_acc.real() ==
        doctest::Approx(-a * a / (16.0 * kPi * kPi * sh * sh))
            .epsilon(1e-12));
}

TEST_CASE("d=3 branch: timelike gives -i/(4 pi sqrt(-q))") {
  const WightmanKernel k3(3);
  const Worldline rest = Worldline::static_at(3, {0.0, 0.0});
  const double s = 1.3;
  const auto w = k3.w0_self(rest, 0.0, s);
  CHECK(w.real() == 0.0);
  CHECK(w.imag() == doctest::Approx(-1.0 / (4.0 * kPi * s)).epsilon(1e-13));
}

TEST_CASE("d=2 kernel and the infrared-mass shift") {
  const Worldline rest = Worldline::static_at(2, {0.0});
  const WightmanKernel k_mu1(2, 1.0);
  const WightmanKernel k_mu3(2, 3.0);
  const double s = 0.37;
  const auto w1 = k_mu1.w0_self(rest, 0.0, s);
  const auto w3 = k_mu3.w0_self(rest, 0.0, s);
  CHECK(w1.imag() == doctest::Approx(-0.25));
  CHECK(w1.real() ==
        doctest::Approx(-std::log(s * s) / (4.0 * kPi)).epsilon(1e-12));
  // mu-change shifts by the exact additive constant, imaginary part intact.
  CHECK(w3.real() - w1.real() ==
        doctest::Approx(-std::log(9.0) / (4.0 * kPi)).epsilon(1e-12));
  CHECK(w3.imag() == w1.imag());
  CHECK_THROWS_AS(WightmanKernel(2, 0.0), std::invalid_argument);
}

TEST_CASE("d=5,6 interval powers for the rate displays") {
  const Worldline rest5 = Worldline::static_at(5, {0.0, 0.0, 0.0});
  const Worldline rest6 = Worldline::static_at(6, {0.0, 0.0, 0.0, 0.0});
  const double s = 0.8;
  CHECK(WightmanKernel(5).w0_self(rest5, 0.0, s).real() ==
        doctest::Approx(std::pow(s, -3.0)).epsilon(1e-13));
  CHECK(WightmanKernel(6).w0_self(rest6, 0.0, s).real() ==
        doctest::Approx(std::pow(s, -4.0)).epsilon(1e-13));
}

TEST_CASE("Hadamard short-distance behaviour") {
  const WightmanKernel k4(4);
  const double s = 1e-4;
  for (const Worldline& w :
       {Worldline::uniform_acceleration(4, 2.0),
        Worldline::asymptotic_uniform(4, 1.0, 0.7),
        Worldline::truncated_uniform(4, 3.0, 5.0)}) {
    const double scaled = s * s * k4.w0_self(w, 1.0, s).real();
    CHECK(std::abs(scaled + 1.0 / (4.0 * kPi * kPi)) < 1e-6);
  }
}

TEST_CASE("cross correlator") {
  const WightmanKernel k4(4);
  const Worldline a = Worldline::static_at(4, {0.0, 0.0, 0.0});
  const Worldline b = Worldline::static_at(4, {2.0, 0.0, 0.0});

  SUBCASE("spacelike pair at distance L") {
    CHECK(k4.w0_cross(a, 1.0, b, 1.0) ==
          doctest::Approx(1.0 / (4.0 * kPi * kPi * 4.0)).epsilon(1e-13));
  }
  SUBCASE("same worldline reduces to Re w0_self") {
    const double u = 2.0, s = 0.9;
    CHECK(k4.w0_cross(a, u, a, u - s) ==
          doctest::Approx(k4.w0_self(a, u, s).real()).epsilon(1e-13));
  }
  SUBCASE("symmetry under swapping the arguments") {
    CHECK(k4.w0_cross(a, 0.7, b, 1.9) ==
          doctest::Approx(k4.w0_cross(b, 1.9, a, 0.7)).epsilon(1e-15));
  }
  SUBCASE("null separation is an error") {
    CHECK_THROWS_AS(k4.w0_cross(a, 0.0, b, 2.0), NullSeparation);
  }
  SUBCASE("cross correlator is d=4 only") {
    const Worldline a3 = Worldline::static_at(3, {0.0, 0.0});
    CHECK_THROWS_AS(WightmanKernel(3).w0_cross(a3, 0.0, a3, 1.0),
                    UnsupportedDimension);
  }
}

TEST_CASE("plug-in kernel override") {
  WightmanKernel k4(4);
  k4.set_custom_w0([](const Worldline&, double u, double s) {
    return std::complex<double>(u + s, -1.0);
  });
  const Worldline rest = Worldline::static_at(4, {0.0, 0.0, 0.0});
  const auto w = k4.w0_self(rest, 2.0, 0.5);
  CHECK(w.real() == 2.5);
  CHECK(w.imag() == -1.0);

  WightmanKernel k3(3);
  CHECK_THROWS_AS(
      k3.set_custom_w0([](const Worldline&, double, double) {
        return std::complex<double>(0.0, 0.0);
      }),
      UnsupportedDimension);
}

TEST_CASE("dimension validation") {
  CHECK_THROWS_AS(WightmanKernel(7), UnsupportedDimension);
  CHECK_THROWS_AS(WightmanKernel(1), UnsupportedDimension);
}
