#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "udw/errors.hpp"

namespace udw {

/// Event in d-dimensional Minkowski space, signature (-,+,...,+), natural
/// units hbar = c = 1. x[0] is the time coordinate.
struct SpacetimePoint {
  int dim = 4;
  std::array<double, 6> x{};

  double t() const { return x[0]; }
};

/// Prescribed timelike trajectory parameterized by proper time.
///
/// Kinds:
///   Inertial            straight line, constant velocity
///   UniformAcceleration hyperbola t = sinh(a tau)/a, x1 = cosh(a tau)/a (+offset)
///   AsymptoticUniform   inertial at early times, proper acceleration ramping
///                       to `a` via a tanh profile of configurable width
///   TruncatedUniform    hyperbola up to tau2, then inertial continuation
///                       with the instantaneous velocity (C^1 matching)
///   StaticAt            at rest at a fixed spatial position
class Worldline {
 public:
  enum class Kind {
    Inertial,
    UniformAcceleration,
    AsymptoticUniform,
    TruncatedUniform,
    StaticAt,
  };

  static Worldline inertial(int dim, const std::vector<double>& velocity,
                            const SpacetimePoint& offset);
  static Worldline uniform_acceleration(
      int dim, double a, const std::vector<double>& spatial_offset = {});
  static Worldline asymptotic_uniform(int dim, double a, double ramp_width);
  static Worldline truncated_uniform(int dim, double a, double tau2);
  static Worldline static_at(int dim, const std::vector<double>& position);

  int dimension() const { return dim_; }
  Kind kind() const { return kind_; }
  double acceleration_parameter() const { return a_; }
  double truncation_time() const { return tau2_; }

  SpacetimePoint position(double tau) const;

  /// Four-velocity dz/dtau (unit timelike).
  std::array<double, 6> velocity(double tau) const;

  /// Scalar proper acceleration sqrt(zdotdot^2) >= 0.
  double proper_accel_scalar(double tau) const;

  /// t(tau) - x^1(tau), cancellation-free for the hyperbolic kinds where
  /// both coordinates grow exponentially.
  double t_minus_x(double tau) const;

  /// Smallest proper time at which the worldline enters the closed future
  /// lightcone of `event`; nullopt when it never does (event behind the
  /// trajectory's horizon). Root located to 1e-10 absolute in tau.
  std::optional<double> advanced_time(const SpacetimePoint& event) const;

  /// Lorentzian squared interval (z1(tau1) - z2(tau2))^2; negative for
  /// timelike separation. Uses cancellation-free closed forms for
  /// same-worldline pairs.
  static double interval_sq(const Worldline& w1, double tau1,
                            const Worldline& w2, double tau2);

  bool same_trajectory(const Worldline& other) const;

  /// Default: at rest at the origin of 4d Minkowski space.
  Worldline() = default;

 private:
  double rapidity(double tau) const;        // AsymptoticUniform
  void ensure_cache(double tau) const;      // AsymptoticUniform position table
  double lightcone_gap(const SpacetimePoint& event, double tau) const;
  double lightcone_gap_limit(const SpacetimePoint& event) const;

  int dim_ = 4;
  Kind kind_ = Kind::StaticAt;
  double a_ = 0.0;
  double tau2_ = 0.0;
  double width_ = 1.0;
  std::array<double, 5> spatial_{};   // StaticAt position / offsets
  std::array<double, 5> vel_{};       // Inertial 3-velocity
  SpacetimePoint base_{};             // Inertial offset event

  struct AsymCache;
  std::shared_ptr<AsymCache> cache_;  // shared so Worldline stays copyable
};

}  // namespace udw
