#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "udw/errors.hpp"

namespace udw {

/// Gaussian state over labeled modes in the correlator-block representation:
/// Qb_{ij} = <Q_i, Q_j>, Pb_{ij} = <P_i, P_j>, Rb_{ij} = <P_i, Q_j>
/// (symmetrized operator products; Rb is not a symmetric matrix in general).
///
/// Quadratures are canonical: the vacuum has <q^2> = <p^2> = hbar/2, a
/// coherent state alpha has mean (sqrt(2 hbar) Re a, sqrt(2 hbar) Im a).
struct GaussianState {
  std::vector<std::string> modes;
  Eigen::VectorXd mean_q, mean_p;
  Eigen::MatrixXd Qb, Pb, Rb;
  double hbar = 1.0;

  int num_modes() const { return static_cast<int>(modes.size()); }
  int index_of(const std::string& label) const;

  /// 2n x 2n covariance in (q_1..q_n, p_1..p_n) ordering.
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd mean() const;

  static GaussianState from_covariance(std::vector<std::string> modes,
                                       const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov,
                                       double hbar);

  /// Throws InvalidState unless every symplectic eigenvalue >= hbar/2 - slack.
  void validate(double slack = 1e-10) const;

  static GaussianState vacuum(std::vector<std::string> modes,
                              double hbar = 1.0);
  static GaussianState coherent(const std::string& mode,
                                std::complex<double> alpha, double hbar = 1.0);
  static GaussianState thermal(const std::string& mode, double nbar,
                               double hbar = 1.0);
  /// Two-mode squeezed vacuum with (q_0 - q_1) and (p_0 + p_1) squeezed, so
  /// r -> infinity gives the EPR correlations q_0 ~ q_1, p_0 ~ -p_1.
  static GaussianState two_mode_squeezed(const std::string& m0,
                                         const std::string& m1, double r,
                                         double hbar = 1.0);
};

/// Marginal over the kept modes.
GaussianState reduce(const GaussianState& state,
                     const std::vector<std::string>& keep);

/// Symplectic spectrum, ascending; n values for n modes.
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

/// Logarithmic negativity (log base 2) across the bipartition
/// (part_a | rest).
double log_negativity(const GaussianState& state,
                      const std::vector<std::string>& part_a);

/// Same with the sign kept: -log2 of 2 nu_min/hbar of the partial transpose;
/// negative values mean PPT (E_N = max(0, value)).
double log_negativity_signed(const GaussianState& state,
                             const std::vector<std::string>& part_a);

/// POVM covariance of the r-squeezed two-mode measurement family used by the
/// joint Gaussian (CV Bell) measurement; r -> infinity is the ideal
/// projective limit. Ordering (q_1, q_2, p_1, p_2).
Eigen::MatrixXd two_mode_squeezed_covariance(double r, double hbar = 1.0);

/// Gaussian conditioning on a joint measurement of `measured` (a mode pair)
/// with POVM covariance meas_covariance and outcome beta. The POVM family is
/// the displaced two-mode squeezed set; beta displaces the *second* measured
/// mode by (sqrt(2 hbar) Re b, sqrt(2 hbar) Im b). Kept-mode covariance is
/// the Schur complement (independent of beta); the mean shifts linearly.
GaussianState condition_on_measurement(
    const GaussianState& state,
    const std::pair<std::string, std::string>& measured,
    const Eigen::MatrixXd& meas_covariance, std::complex<double> outcome);

/// Phase-space displacement of one mode.
GaussianState displace(const GaussianState& state, const std::string& mode,
                       std::complex<double> beta);

/// <alpha| rho |alpha> for a single-mode state.
double fidelity_vs_coherent(const GaussianState& state,
                            std::complex<double> alpha);

/// Population of the first excited level of an (m0, omega_r) oscillator from
/// its centered correlators. Throws UncertaintyViolation when
/// <P^2><Q^2> - <P,Q>^2 < hbar^2/4.
double excited_population(double qq, double pp, double pq, double m0,
                          double omega_r, double hbar = 1.0);

}  // namespace udw
