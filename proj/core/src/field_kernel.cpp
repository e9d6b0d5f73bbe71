#include "udw/field_kernel.hpp"

#include <cmath>
#include <numbers>

namespace udw {

namespace {
constexpr double kPi = std::numbers::pi;
}

WightmanKernel::WightmanKernel(int dimension, double ir_mass)
    : dim_(dimension), mu_(ir_mass) {
  if (dim_ < 2 || dim_ > 6) {
    throw UnsupportedDimension("WightmanKernel: dimension must be in [2,6]");
  }
  if (dim_ == 2 && !(mu_ > 0.0)) {
    throw std::invalid_argument(
        "WightmanKernel: d=2 requires a positive infrared mass mu");
  }
}

void WightmanKernel::set_custom_w0(SelfKernel k) {
  if (dim_ != 2 && dim_ != 4) {
    throw UnsupportedDimension(
        "WightmanKernel: custom W0 accepted for d in {2,4} only");
  }
  custom_ = std::move(k);
}

std::complex<double> WightmanKernel::w0_self(const Worldline& w, double u,
                                             double s) const {
  if (!(s > 0.0)) {
    throw std::invalid_argument("w0_self: requires s > 0");
  }
  if (custom_) return custom_(w, u, s);
  const double q = Worldline::interval_sq(w, u, w, u - s);
  if (q == 0.0) {
    throw NullSeparation("w0_self: null-separated points at s = " +
                         std::to_string(s));
  }
  switch (dim_) {
    case 2:
      if (q < 0.0) {
        return {-std::log(mu_ * mu_ * (-q)) / (4.0 * kPi), -0.25};
      }
      return {-std::log(mu_ * mu_ * q) / (4.0 * kPi), 0.0};
    case 3:
      if (q < 0.0) {
        return {0.0, -1.0 / (4.0 * kPi * std::sqrt(-q))};
      }
      return {1.0 / (4.0 * kPi * std::sqrt(q)), 0.0};
    case 4:
      return {1.0 / (4.0 * kPi * kPi * q), 0.0};
    case 5:
      // Interval power shaped for the d=5 rate display.
      if (q >= 0.0) {
        throw NullSeparation("w0_self d=5: spacelike/null separation");
      }
      return {std::pow(-q, -1.5), 0.0};
    case 6:
      return {1.0 / (q * q), 0.0};
  }
  throw std::logic_error("unreachable");
}

double WightmanKernel::w0_cross(const Worldline& wa, double ta,
                                const Worldline& wb, double tb) const {
  if (dim_ != 4) {
    throw UnsupportedDimension("w0_cross: implemented for d=4 only");
  }
  const double q = Worldline::interval_sq(wa, ta, wb, tb);
  if (q == 0.0) {
    throw NullSeparation("w0_cross: null-separated points");
  }
  return 1.0 / (4.0 * kPi * kPi * q);
}

}  // namespace udw
