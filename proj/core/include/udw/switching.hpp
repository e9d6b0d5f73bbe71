#pragma once

#include <string>
#include <utility>

namespace udw {

/// Smooth compact-support window: identically 1 on the plateau [tau0, tau1],
/// C-infinity ramps of width delta on both sides, zero outside
/// [tau0 - delta, tau1 + delta]. The ramp is the normalized CDF of the
/// standard exp(-1/(x(1-x))) bump, i.e. the plateau indicator mollified by
/// that bump.
class SwitchingFunction {
 public:
  SwitchingFunction(double tau0, double tau1, double delta);

  double operator()(double u) const;

  double plateau_lo() const { return tau0_; }
  double plateau_hi() const { return tau1_; }
  double ramp_width() const { return delta_; }
  std::pair<double, double> support() const {
    return {tau0_ - delta_, tau1_ + delta_};
  }
  double support_width() const { return (tau1_ - tau0_) + 2.0 * delta_; }

  /// Integral of chi^2 (plateau exact + precomputed ramp constant).
  double chi_sq_integral() const;

  /// Integral of chi'^2 (ramp-only, scales as 1/delta).
  double chi_prime_sq_integral() const;

  /// Autocorrelation C(s) = int chi(u) chi(u-s) du, zero for s >= width.
  double autocorrelation(double s) const;

  /// Deficit C(0) - C(s) = int chi(u)[chi(u) - chi(u-s)] du, computed on
  /// the ramp-affected windows so small s costs no cancellation;
  /// behaves as (s^2/2) chi_prime_sq_integral() for s -> 0.
  double autocorrelation_deficit(double s) const;

  std::string shape_name() const { return "plateau-bump-cdf"; }

  /// Normalized bump CDF on [0,1]: 0 at 0, 1 at 1, smooth and monotone.
  static double bump_cdf(double x);

 private:
  double tau0_;
  double tau1_;
  double delta_;
};

}  // namespace udw
