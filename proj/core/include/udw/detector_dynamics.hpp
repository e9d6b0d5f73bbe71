#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "udw/errors.hpp"
#include "udw/gaussian_state.hpp"
#include "udw/worldline.hpp"

namespace udw {

/// Harmonic-oscillator detector parameters. omega_r is the renormalized
/// frequency; the damped oscillation frequency is Omega = sqrt(omega_r^2 -
/// gamma^2) and gamma = lambda^2/(8 pi m0). lambda0/lambda1 are the
/// switch-on and time-independent regularization constants; they are
/// physical inputs of the effective theory, never subtracted. The
/// correlator engine realizes them through the UV proper-time cutoff
/// eps_UV = exp(-lambda1) on the coincidence limit of the vacuum noise.
struct DetectorParams {
  double m0 = 1.0;
  double hbar = 1.0;
  double omega_r = 0.0;
  double gamma = 0.0;
  double lambda0 = 20.0;
  double lambda1 = 20.0;

  double omega() const;      // sqrt(omega_r^2 - gamma^2)
  double lambda_sq() const;  // 8 pi m0 gamma
  void validate() const;     // gamma >= 0, omega_r > gamma (underdamped)

  /// Construct from the damped frequency Omega (figure-caption convention).
  static DetectorParams from_omega(double omega, double gamma, double m0 = 1.0,
                                   double hbar = 1.0, double lambda0 = 20.0,
                                   double lambda1 = 20.0);
};

/// Symmetrized self correlators of one detector: <Q,Q>, <P,P>, <P,Q>.
struct CorrelatorBlock {
  double qq = 0.0;
  double pp = 0.0;
  double pq = 0.0;

  double uncertainty_margin(double hbar) const {
    return pp * qq - pq * pq - 0.25 * hbar * hbar;
  }
};

/// Cross correlators between detectors a and b (pq = <P_a,Q_b>, qp =
/// <Q_a,P_b>; not equal in general).
struct CrossBlock {
  double qq = 0.0;
  double pp = 0.0;
  double pq = 0.0;
  double qp = 0.0;
};

/// Damped free-oscillation kernels of the renormalized equation of motion
/// Qddot + 2 gamma Qdot + omega_r^2 Q = (lambda/m0) phi:
///   K(t)  = e^{-gamma t} (cos Omega t + (gamma/Omega) sin Omega t)
///   g(t)  = e^{-gamma t} sin(Omega t)/Omega
struct DampedKernels {
  double K = 0.0, g = 0.0, Kdot = 0.0, gdot = 0.0;
};
DampedKernels damped_kernels(const DetectorParams& p, double t);

/// 2x2 phase-space propagator M(t) = [[K, g/m0], [m0 Kdot, gdot]].
Eigen::Matrix2d a_part_propagator(const DetectorParams& p, double t);

struct NoiseOptions {
  double oversample = 80.0;        // fine-grid points per shortest period
  double uncertainty_rel_slack = 1e-7;
  double uncertainty_abs_slack = 1e-9;
};

/// v-part (field-vacuum response) of one detector's self correlators along
/// its worldline, accumulated from switch-on at proper time 0.
///
/// Realized as the exact reformulation of the double-convolution noise
/// integrals: the equal-time second moments obey a linear ODE system driven
/// by the memory integrals J_g(eta) = int_0^eta g(s) <phi phi>_sym ds and
/// J_gdot; the coincidence singularity is split off analytically with the
/// cutoff entering only through lambda1 (and the frequency renormalization
/// constant absorbed into omega_r).
class SelfNoise {
 public:
  SelfNoise(const DetectorParams& params, const Worldline& w, double eta_max,
            const NoiseOptions& opt = {});
  ~SelfNoise();
  SelfNoise(SelfNoise&&) noexcept;
  SelfNoise& operator=(SelfNoise&&) noexcept;

  CorrelatorBlock at(double eta) const;
  double eta_max() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CrossNoiseOptions {
  double panel_fraction = 1.0 / 16.0;  // outer panel width in periods
};

/// v-part cross correlators <v_a(eta_a), v_b(eta_b)> between two detectors
/// coupled to the common vacuum. The first worldline must be StaticAt (the
/// geometry of the teleport setup); lightcone crossings of the kernel are
/// handled as principal values analytically.
CrossBlock cross_noise(const DetectorParams& params, const Worldline& wa,
                       double eta_a, const Worldline& wb, double eta_b,
                       const CrossNoiseOptions& opt = {});

struct CorrelatorSample {
  double eta = 0.0;
  Eigen::MatrixXd qq, pp, pq;        // totals; pq(i,j) = <P_i, Q_j>
  Eigen::MatrixXd qq_a, pp_a, pq_a;  // a-part
  Eigen::MatrixXd qq_v, pp_v, pq_v;  // v-part
};

struct CorrelatorSeries {
  std::vector<std::string> labels;
  std::vector<CorrelatorSample> samples;

  CorrelatorBlock self_block(int sample, int detector) const;
};

/// Evolves the symmetrized detector correlators on a common proper-time grid
/// (each detector at its own proper time eta). The initial GaussianState is
/// in canonical (m0 omega_r)-scaled quadratures; mutual retarded influences
/// between detectors are neglected, the common-vacuum cross noise is kept.
/// Throws UncertaintyViolation if any sample's self block loses positivity
/// beyond the configured slack.
CorrelatorSeries evolve_correlators(const DetectorParams& params,
                                    const std::vector<Worldline>& worldlines,
                                    const GaussianState& initial,
                                    const std::vector<double>& grid,
                                    const NoiseOptions& opt = {});

struct Rho11Sample {
  double eta = 0.0;
  double rho11 = 0.0;
  CorrelatorBlock block;  // total correlators
};

/// Exact rho^R_{1,1} history for a detector starting in its ground state,
/// uniformly accelerated with proper acceleration a (a = 0: inertial).
std::vector<Rho11Sample> rho11_history(const DetectorParams& params, double a,
                                       const std::vector<double>& grid,
                                       const NoiseOptions& opt = {});

struct PerturbativeRho11 {
  double value = 0.0;
  double planck_term = 0.0;  // (lambda^2/4 pi m0) eta / (e^{2 pi Or/a} - 1)
  double offset_term = 0.0;
  bool planck_zeroed = false;  // a <= 0: factor taken as its a->0 limit (0)
};

/// First-order (in gamma) transition probability, Planck term plus the
/// cutoff-dependent offset, valid for eta >> 1/a.
PerturbativeRho11 perturbative_rho11(const DetectorParams& params, double a,
                                     double eta);

/// Temperature read off the single-mode symplectic eigenvalue nu in
/// (m0, omega_r)-weighted coordinates: T = omega_r / ln((nu + hbar/2)/(nu -
/// hbar/2)); zero for (numerically) pure states.
double effective_temperature(const CorrelatorBlock& block,
                             const DetectorParams& params);

}  // namespace udw
