#pragma once

#include <string>
#include <utility>
#include <vector>

#include "udw/field_kernel.hpp"
#include "udw/quadrature.hpp"
#include "udw/switching.hpp"
#include "udw/worldline.hpp"

namespace udw {

/// Transition rate with the switching-remnant terms reported separately.
/// Invariant: value == integral_term + sum(boundary_terms) exactly.
struct RateResult {
  double value = 0.0;
  double integral_term = 0.0;
  std::vector<std::pair<std::string, double>> boundary_terms;
  double error_estimate = 0.0;
  long evaluations = 0;

  double boundary_sum() const {
    double s = 0.0;
    for (const auto& [name, v] : boundary_terms) s += v;
    return s;
  }
};

/// Smooth-switching response function F(omega) for d in {2,3,4}, excluding
/// the coupling/matrix-element prefactor. The d-specific switching terms
/// (the chi^2 integral for d=3,4 and the chi(u)[chi(u)-chi(u-s)]/s^2 term
/// for d=4) are included.
double response_function(int d, const SwitchingFunction& chi,
                         const Worldline& w, double omega,
                         const WightmanKernel& kernel,
                         const QuadratureOptions& opt = {});

/// Sharp-switching transition rate for d in {2,..,6} at switch-off moment
/// tau with elapsed plateau dtau. For d=6 the scalar proper acceleration
/// must be constant over [tau - dtau, tau] (checked to 1e-10), otherwise
/// NonConstantAcceleration is thrown.
RateResult transition_rate(int d, const Worldline& w, double omega, double tau,
                           double dtau, const WightmanKernel& kernel,
                           const QuadratureOptions& opt = {});

/// dtau -> infinity limit: rates evaluated at paired plateaus (half an
/// oscillation period apart, killing the leading oscillatory remainder) and
/// Richardson-extrapolated in 1/dtau^2.
struct AsymptoticRate {
  double value = 0.0;
  double error_estimate = 0.0;
};
AsymptoticRate transition_rate_asymptotic(int d, const Worldline& w,
                                          double omega,
                                          const WightmanKernel& kernel,
                                          double dtau_base = 200.0,
                                          const QuadratureOptions& opt = {});

/// Least-squares fit of F(delta) = C ln(1/delta) + R (+ D delta absorbed
/// internally) over a delta grid spanning at least a decade.
struct DivergenceFit {
  double log_coefficient = 0.0;  // C
  double remainder = 0.0;        // R
  double residual = 0.0;         // rms of fit residuals
  double sigma_log_coefficient = 0.0;
  std::vector<double> values;    // F(delta_i), in grid order
};
DivergenceFit divergence_probe(int d, const Worldline& w, double omega,
                               double tau0, double tau1,
                               const std::vector<double>& delta_grid,
                               const WightmanKernel& kernel,
                               double poor_fit_threshold = 0.05,
                               const QuadratureOptions& opt = {});

}  // namespace udw
