#pragma once

#include <complex>
#include <functional>

#include "udw/errors.hpp"
#include "udw/worldline.hpp"

namespace udw {

/// Pointwise limit W0 of the massless Minkowski-vacuum Wightman function,
/// pulled back to worldlines, per spacetime dimension d in [2,6].
///
/// Branch conventions (single normative choice, taken analytically from the
/// Delta t -> Delta t - i eps prescription; never realized numerically):
///   d=4: W0 = 1/(4 pi^2 q), q = (Delta z)^2 (real off the lightcone)
///   d=3: timelike, u later:  -i / (4 pi sqrt(-q));  spacelike: 1/(4 pi sqrt q)
///   d=2: timelike, u later:  -(1/4pi) ln(mu^2 (-q)) - i/4;
///        spacelike:          -(1/4pi) ln(mu^2 q)
///   d=5,6: the real interval powers (-q)^(-3/2) and q^(-2) consumed by the
///        sharp-switching rate displays (no standalone W0 claimed there).
class WightmanKernel {
 public:
  explicit WightmanKernel(int dimension, double ir_mass = 1.0);

  int dimension() const { return dim_; }
  double ir_mass() const { return mu_; }

  /// W0(z(u), z(u-s)) along a single worldline; s > 0.
  /// Throws NullSeparation when the two points are null separated.
  std::complex<double> w0_self(const Worldline& w, double u, double s) const;

  /// Symmetrized (real) part of W0 between two distinct worldline points
  /// (d=4 only).
  double w0_cross(const Worldline& wa, double ta, const Worldline& wb,
                  double tb) const;

  /// Plug-in replacement for w0_self, accepted for d in {2,4} so other
  /// field states can be dropped in. None ships.
  using SelfKernel =
      std::function<std::complex<double>(const Worldline&, double, double)>;
  void set_custom_w0(SelfKernel k);
  bool has_custom_w0() const { return static_cast<bool>(custom_); }

 private:
  int dim_;
  double mu_;
  SelfKernel custom_;
};

}  // namespace udw
