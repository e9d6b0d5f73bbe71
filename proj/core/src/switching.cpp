#include "udw/switching.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "udw/quadrature.hpp"

namespace udw {

namespace {

double bump(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return std::exp(-1.0 / (t * (1.0 - t)));
}

// Fixed two-panel GK15 for smooth integrands on short ranges.
double gk15_fixed(double (*f)(double), double a, double b) {
  static constexpr double xgk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898, 0.0};
  static constexpr double wgk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  double total = 0.0;
  const double mid = 0.5 * (a + b);
  const double seg[2][2] = {{a, mid}, {mid, b}};
  for (const auto& s : seg) {
    const double c = 0.5 * (s[0] + s[1]);
    const double h = 0.5 * (s[1] - s[0]);
    double acc = f(c) * wgk[7];
    for (int j = 0; j < 7; ++j) {
      const double dx = h * xgk[j];
      acc += wgk[j] * (f(c - dx) + f(c + dx));
    }
    total += acc * h;
  }
  return total;
}

double bump_norm() {
  static std::once_flag flag;
  static double value = 0.0;
  std::call_once(flag, [] {
    QuadratureOptions opt;
    opt.rel_tol = 1e-14;
    opt.abs_tol = 1e-300;
    value = integrate([](double t) { return bump(t); }, 0.0, 1.0, opt).value;
  });
  return value;
}

// int_0^1 ramp(x)^2 dx, used for the exact chi^2 integral.
double ramp_sq_integral() {
  static std::once_flag flag;
  static double value = 0.0;
  std::call_once(flag, [] {
    QuadratureOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-300;
    value = integrate(
                [](double x) {
                  const double r = SwitchingFunction::bump_cdf(x);
                  return r * r;
                },
                0.0, 1.0, opt)
                .value;
  });
  return value;
}

// int_0^1 ramp'(x)^2 dx = int bump^2 / B^2.
double ramp_prime_sq_integral() {
  static std::once_flag flag;
  static double value = 0.0;
  std::call_once(flag, [] {
    QuadratureOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-300;
    const double b = bump_norm();
    value = integrate([](double x) { return bump(x) * bump(x); }, 0.0, 1.0,
                      opt)
                .value /
            (b * b);
  });
  return value;
}

}  // namespace

double SwitchingFunction::bump_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Exploit symmetry for accuracy on the upper half.
  if (x > 0.5) return 1.0 - bump_cdf(1.0 - x);
  return gk15_fixed(&bump, 0.0, x) / bump_norm();
}

SwitchingFunction::SwitchingFunction(double tau0, double tau1, double delta)
    : tau0_(tau0), tau1_(tau1), delta_(delta) {
  if (!(tau0 < tau1)) {
    throw std::invalid_argument("SwitchingFunction: requires tau0 < tau1");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("SwitchingFunction: requires delta > 0");
  }
}

double SwitchingFunction::operator()(double u) const {
  if (u <= tau0_ - delta_ || u >= tau1_ + delta_) return 0.0;
  if (u >= tau0_ && u <= tau1_) return 1.0;
  if (u < tau0_) return bump_cdf((u - (tau0_ - delta_)) / delta_);
  return bump_cdf(((tau1_ + delta_) - u) / delta_);
}

double SwitchingFunction::chi_sq_integral() const {
  return (tau1_ - tau0_) + 2.0 * delta_ * ramp_sq_integral();
}

double SwitchingFunction::chi_prime_sq_integral() const {
  return 2.0 / delta_ * ramp_prime_sq_integral();
}

double SwitchingFunction::autocorrelation_deficit(double s) const {
  s = std::abs(s);
  if (s == 0.0) return 0.0;
  const auto& self = *this;
  auto f = [&self, s](double u) {
    const double c = self(u);
    return c * (c - self(u - s));
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-16;
  if (s >= 0.45 * (tau1_ - tau0_)) {
    return integrate_with_breakpoints(
               f, tau0_ - delta_, tau1_ + delta_,
               {tau0_, tau1_, tau0_ - delta_ + s, tau0_ + s, tau1_ + s}, opt)
        .value;
  }
  // chi(u) - chi(u-s) is supported on the (shifted) ramp windows only.
  const double w1 = integrate_with_breakpoints(
                        f, tau0_ - delta_, std::min(tau0_ + s, tau1_),
                        {tau0_, tau0_ - delta_ + s}, opt)
                        .value;
  const double w2 = integrate_with_breakpoints(
                        f, tau1_, tau1_ + delta_ + s,
                        {tau1_ + s, tau1_ + delta_}, opt)
                        .value;
  return w1 + w2;
}

double SwitchingFunction::autocorrelation(double s) const {
  s = std::abs(s);
  if (s >= support_width()) return 0.0;
  const auto [lo, hi] = support();
  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-15;
  const auto& self = *this;
  return integrate([&self, s](double u) { return self(u) * self(u - s); },
                   lo + s, hi, opt)
      .value;
}

}  // namespace udw
