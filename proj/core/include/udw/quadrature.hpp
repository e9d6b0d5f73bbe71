#pragma once

#include <functional>
#include <vector>

#include "udw/errors.hpp"

namespace udw {

class SwitchingFunction;

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  long max_evaluations = 20'000'000;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Deterministic: no randomization, results depend only on the inputs.
/// Throws NonConvergence when the evaluation budget is exhausted and
/// SingularInterior when refinement pins a non-integrable interior blow-up.
IntegralResult integrate(const std::function<double(double)>& f, double a,
                         double b, const QuadratureOptions& opt = {});

/// Same engine with an initial mesh graded toward the endpoint `a`.
/// Intended for integrands that are finite after counterterm subtraction but
/// steep near a (s -> 0 behaviour of the subtracted correlators) and for
/// integrable endpoint singularities such as s^(-1/2).
IntegralResult integrate_subtracted(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opt = {});

/// Splits at caller-declared interior breakpoints (integrable singularities,
/// e.g. null crossings for d=2,3 kernels), then integrates each piece.
IntegralResult integrate_with_breakpoints(
    const std::function<double(double)>& f, double a, double b,
    const std::vector<double>& breakpoints, const QuadratureOptions& opt = {});

/// Double integral with a switching window:
///   I = du chi(u) . ds chi(u-s) g(u,s),  u over supp(chi), s in (0, inf),
/// truncated exactly to the support of chi x chi.
IntegralResult integrate_2d_switch(
    const std::function<double(double, double)>& g,
    const SwitchingFunction& chi, const QuadratureOptions& opt = {});

}  // namespace udw
