#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "udw/detector_dynamics.hpp"
#include "udw/gaussian_state.hpp"
#include "udw/worldline.hpp"

namespace udw {

enum class Foliation { Minkowski, QuasiRindler };
enum class TeleportMode { Pseudo, Physical };

/// Full configuration of the CV teleportation protocol between Alice
/// (static at x = 1/b, detectors A and C) and Rob (uniformly accelerated
/// with proper acceleration a, detector B), 0 < a < b.
struct TeleportScenario {
  double a = 1.0;
  double b = 2.0;
  double r1 = 1.0;                 // resource two-mode squeezing (A,B)
  double r2 = 5.0;                 // measurement squeezing on (A,C)
  std::complex<double> alpha{1.0, 0.0};  // state to teleport (detector C)
  DetectorParams detector;
  Foliation foliation = Foliation::Minkowski;
  TeleportMode mode = TeleportMode::Pseudo;
  double tau2 = std::numeric_limits<double>::infinity();  // Rob stops here
  std::vector<double> t1_grid;     // t1 (Minkowski/physical) or tau1 (QR)
  double epsilon_over_omega = 1e-6;  // lightcone-entry offset, units 1/Omega

  void validate() const;
};

struct FidelityPoint {
  double t1 = 0.0;      // grid label
  double tau_a = 0.0;   // Alice's proper time on the slice
  double tau_b = 0.0;   // Rob's proper time on the slice
  double tau_adv = std::numeric_limits<double>::quiet_NaN();
  double f_av = 0.0;
  double e_n = 0.0;
  double signed_log_neg = 0.0;  // -log2(2 nu_min/hbar), negative when PPT
  bool failed = false;
  std::string error;
};

struct FidelitySeries {
  std::vector<FidelityPoint> points;
};

struct TeleportMarkers {
  std::vector<std::pair<double, double>> peaks;  // (t1, F_av) local maxima
  std::optional<double> t_half;  // peak envelope first crosses 1/2
  std::optional<double> t_de;    // E_N first reaches zero
};

/// Shared machinery behind run_pseudo / run_physical; public so tests can
/// probe single measurement moments and the frame-consistency statement.
class TeleportEngine {
 public:
  explicit TeleportEngine(const TeleportScenario& sc);

  struct Moment {
    double f_av = 0.0;
    double e_n = 0.0;
    double signed_log_neg = 0.0;
    Eigen::Matrix2d sigma_b_conditioned;  // canonical units, beta-independent
  };

  /// Evaluate the protocol with the joint measurement on the slice
  /// (tau_a for Alice, tau_b for Rob).
  Moment moment(double tau_a, double tau_b) const;

  /// B's conditioned covariance from collapsing on the slice
  /// (tau_a, tau_slice_b) and propagating to tau_target_b with the
  /// unconditioned noise increment (mutual influences neglected).
  Eigen::Matrix2d conditioned_b_evolved(double tau_a, double tau_slice_b,
                                        double tau_target_b) const;

  /// Monte-Carlo beta average of F(beta) through the public gaussian_state
  /// operations; oracle for the closed-form moment().f_av.
  struct McResult {
    double mean = 0.0;
    double std_error = 0.0;
  };
  McResult mc_fidelity(double tau_a, double tau_b, long samples,
                       unsigned long long seed) const;

  double rob_time_on_minkowski_slice(double t1) const;
  double alice_time_on_quasi_rindler_slice(double tau1) const;
  std::optional<double> advanced_time_of_measurement(double t1) const;

  const Worldline& rob_worldline() const { return rob_; }

 private:
  Eigen::Matrix4d ab_covariance(double tau_a, double tau_b) const;

  TeleportScenario sc_;
  Worldline alice_;
  Worldline rob_;
  std::optional<SelfNoise> noise_a_;
  std::optional<SelfNoise> noise_b_;
};

FidelitySeries run_pseudo(const TeleportScenario& sc);
FidelitySeries run_physical(const TeleportScenario& sc);

/// Peak envelope, the moment it crosses 1/2, and the disentanglement time.
/// Throws UnderSampled when consecutive peaks are closer than
/// min_samples_between_peaks grid samples.
TeleportMarkers extract_markers(const FidelitySeries& series,
                                int min_samples_between_peaks = 10);

}  // namespace udw
