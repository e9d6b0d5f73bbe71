#include "udw/worldline.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace udw {

namespace {

// 10-point Gauss-Legendre nodes/weights on [-1,1].
constexpr double kGlX[5] = {0.148874338981631, 0.433395394129247,
                           0.679409568299024, 0.865063366688985,
                           0.973906528517172};
constexpr double kGlW[5] = {0.295524224714753, 0.269266719309996,
                           0.219086362515982, 0.149451349150581,
                           0.066671344308688};

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

void check_dim(int dim) {
  if (dim < 2 || dim > 6) {
    throw UnsupportedDimension("worldline: dimension must be in [2,6], got " +
                               std::to_string(dim));
  }
}

}  // namespace

struct Worldline::AsymCache {
  std::mutex mutex;
  double h = 0.0;
  // Node i corresponds to tau = (i + i0) * h; arrays grow on demand.
  long i0 = 0;  // index offset (nodes cover [i0*h, (i0+n-1)*h])
  std::vector<double> t, x;
  bool init = false;
  double t_minus_x_limit = 0.0;  // lim tau->inf of (t - x)
  bool limit_ready = false;
};

Worldline Worldline::inertial(int dim, const std::vector<double>& velocity,
                              const SpacetimePoint& offset) {
  check_dim(dim);
  Worldline w;
  w.dim_ = dim;
  w.kind_ = Kind::Inertial;
  w.base_ = offset;
  w.base_.dim = dim;
  double v2 = 0.0;
  for (size_t i = 0; i < velocity.size() && i < 5; ++i) {
    w.vel_[i] = velocity[i];
    v2 += velocity[i] * velocity[i];
  }
  if (v2 >= 1.0) {
    throw std::invalid_argument("inertial worldline: |velocity| must be < 1");
  }
  return w;
}

Worldline Worldline::uniform_acceleration(
    int dim, double a, const std::vector<double>& spatial_offset) {
  check_dim(dim);
  if (!(a > 0.0)) {
    throw std::invalid_argument("uniform_acceleration: requires a > 0");
  }
  Worldline w;
  w.dim_ = dim;
  w.kind_ = Kind::UniformAcceleration;
  w.a_ = a;
  for (size_t i = 0; i < spatial_offset.size() && i < 5; ++i) {
    w.spatial_[i] = spatial_offset[i];
  }
  return w;
}

Worldline Worldline::asymptotic_uniform(int dim, double a, double ramp_width) {
  check_dim(dim);
  if (!(a > 0.0) || !(ramp_width > 0.0)) {
    throw std::invalid_argument(
        "asymptotic_uniform: requires a > 0 and ramp_width > 0");
  }
  Worldline w;
  w.dim_ = dim;
  w.kind_ = Kind::AsymptoticUniform;
  w.a_ = a;
  w.width_ = ramp_width;
  w.cache_ = std::make_shared<AsymCache>();
  return w;
}

Worldline Worldline::truncated_uniform(int dim, double a, double tau2) {
  check_dim(dim);
  if (!(a > 0.0)) {
    throw std::invalid_argument("truncated_uniform: requires a > 0");
  }
  Worldline w;
  w.dim_ = dim;
  w.kind_ = Kind::TruncatedUniform;
  w.a_ = a;
  w.tau2_ = tau2;
  return w;
}

Worldline Worldline::static_at(int dim, const std::vector<double>& position) {
  check_dim(dim);
  Worldline w;
  w.dim_ = dim;
  w.kind_ = Kind::StaticAt;
  for (size_t i = 0; i < position.size() && i < 5; ++i) {
    w.spatial_[i] = position[i];
  }
  return w;
}

double Worldline::rapidity(double tau) const {
  // theta(tau) = integral of the tanh-ramp acceleration profile
  // a(tau) = a/2 (1 + tanh(tau/width)).
  return 0.5 * a_ * (tau + width_ * log_cosh(tau / width_));
}

void Worldline::ensure_cache(double tau) const {
  AsymCache& c = *cache_;
  std::lock_guard<std::mutex> lock(c.mutex);
  if (!c.init) {
    c.h = std::min(width_, 1.0 / (1.0 + a_)) / 32.0;
    c.i0 = 0;
    c.t = {0.0};
    c.x = {1.0 / a_};
    c.init = true;
  }
  auto integrate_cell = [&](double lo, double hi, double& dt, double& dx) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    dt = 0.0;
    dx = 0.0;
    for (int j = 0; j < 5; ++j) {
      for (double sgn : {-1.0, 1.0}) {
        const double th = rapidity(mid + sgn * half * kGlX[j]);
        dt += kGlW[j] * std::cosh(th);
        dx += kGlW[j] * std::sinh(th);
      }
    }
    dt *= half;
    dx *= half;
  };
  long need = static_cast<long>(std::floor(tau / c.h));
  // Extend upward.
  while (c.i0 + static_cast<long>(c.t.size()) - 1 < need + 1) {
    long n = c.i0 + static_cast<long>(c.t.size()) - 1;
    double dt, dx;
    integrate_cell(n * c.h, (n + 1) * c.h, dt, dx);
    c.t.push_back(c.t.back() + dt);
    c.x.push_back(c.x.back() + dx);
  }
  // Extend downward.
  while (c.i0 > need - 1) {
    double dt, dx;
    integrate_cell((c.i0 - 1) * c.h, c.i0 * c.h, dt, dx);
    c.t.insert(c.t.begin(), c.t.front() - dt);
    c.x.insert(c.x.begin(), c.x.front() - dx);
    --c.i0;
  }
}

SpacetimePoint Worldline::position(double tau) const {
  SpacetimePoint p;
  p.dim = dim_;
  switch (kind_) {
    case Kind::StaticAt: {
      p.x[0] = tau;
      for (int i = 1; i < dim_; ++i) p.x[i] = spatial_[i - 1];
      return p;
    }
    case Kind::Inertial: {
      double v2 = 0.0;
      for (int i = 0; i < dim_ - 1; ++i) v2 += vel_[i] * vel_[i];
      const double gamma = 1.0 / std::sqrt(1.0 - v2);
      p.x[0] = base_.x[0] + gamma * tau;
      for (int i = 1; i < dim_; ++i) {
        p.x[i] = base_.x[i] + gamma * vel_[i - 1] * tau;
      }
      return p;
    }
    case Kind::UniformAcceleration: {
      p.x[0] = std::sinh(a_ * tau) / a_;
      p.x[1] = std::cosh(a_ * tau) / a_ + spatial_[0];
      for (int i = 2; i < dim_; ++i) p.x[i] = spatial_[i - 1];
      return p;
    }
    case Kind::TruncatedUniform: {
      if (tau <= tau2_) {
        p.x[0] = std::sinh(a_ * tau) / a_;
        p.x[1] = std::cosh(a_ * tau) / a_;
      } else {
        const double dt = tau - tau2_;
        p.x[0] = std::sinh(a_ * tau2_) / a_ + dt * std::cosh(a_ * tau2_);
        p.x[1] = std::cosh(a_ * tau2_) / a_ + dt * std::sinh(a_ * tau2_);
      }
      return p;
    }
    case Kind::AsymptoticUniform: {
      // Far in the past the profile is inertial to machine precision;
      // continue analytically instead of growing the table.
      const double tau_floor = -20.0 * width_;
      if (tau < tau_floor) {
        const SpacetimePoint pf = position(tau_floor);
        const double th = rapidity(tau_floor);
        p.x[0] = pf.x[0] + (tau - tau_floor) * std::cosh(th);
        p.x[1] = pf.x[1] + (tau - tau_floor) * std::sinh(th);
        for (int i = 2; i < dim_; ++i) p.x[i] = 0.0;
        return p;
      }
      if (a_ * tau > 700.0) {
        throw NumericsError("asymptotic worldline: coordinate overflow");
      }
      ensure_cache(tau);
      const AsymCache& c = *cache_;
      long idx = static_cast<long>(std::floor(tau / c.h));
      const double tau_node = idx * c.h;
      const size_t k = static_cast<size_t>(idx - c.i0);
      double t = c.t[k], x = c.x[k];
      // One GL panel from the node to tau.
      const double mid = 0.5 * (tau_node + tau), half = 0.5 * (tau - tau_node);
      if (half != 0.0) {
        double dt = 0.0, dx = 0.0;
        for (int j = 0; j < 5; ++j) {
          for (double sgn : {-1.0, 1.0}) {
            const double th = rapidity(mid + sgn * half * kGlX[j]);
            dt += kGlW[j] * std::cosh(th);
            dx += kGlW[j] * std::sinh(th);
          }
        }
        t += dt * half;
        x += dx * half;
      }
      p.x[0] = t;
      p.x[1] = x;
      for (int i = 2; i < dim_; ++i) p.x[i] = 0.0;
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

std::array<double, 6> Worldline::velocity(double tau) const {
  std::array<double, 6> u{};
  switch (kind_) {
    case Kind::StaticAt:
      u[0] = 1.0;
      return u;
    case Kind::Inertial: {
      double v2 = 0.0;
      for (int i = 0; i < dim_ - 1; ++i) v2 += vel_[i] * vel_[i];
      const double gamma = 1.0 / std::sqrt(1.0 - v2);
      u[0] = gamma;
      for (int i = 1; i < dim_; ++i) u[i] = gamma * vel_[i - 1];
      return u;
    }
    case Kind::UniformAcceleration:
      u[0] = std::cosh(a_ * tau);
      u[1] = std::sinh(a_ * tau);
      return u;
    case Kind::TruncatedUniform: {
      const double te = std::min(tau, tau2_);
      u[0] = std::cosh(a_ * te);
      u[1] = std::sinh(a_ * te);
      return u;
    }
    case Kind::AsymptoticUniform: {
      const double th = rapidity(tau);
      u[0] = std::cosh(th);
      u[1] = std::sinh(th);
      return u;
    }
  }
  throw std::logic_error("unreachable");
}

double Worldline::t_minus_x(double tau) const {
  switch (kind_) {
    case Kind::UniformAcceleration:
      return -std::exp(-a_ * tau) / a_ - spatial_[0];
    case Kind::TruncatedUniform: {
      if (tau <= tau2_) return -std::exp(-a_ * tau) / a_;
      // Inertial continuation: d(t - x)/dtau = exp(-a tau2).
      return std::exp(-a_ * tau2_) * (tau - tau2_ - 1.0 / a_);
    }
    default: {
      const SpacetimePoint p = position(tau);
      return p.x[0] - p.x[1];
    }
  }
}

double Worldline::proper_accel_scalar(double tau) const {
  switch (kind_) {
    case Kind::StaticAt:
    case Kind::Inertial:
      return 0.0;
    case Kind::UniformAcceleration:
      return a_;
    case Kind::TruncatedUniform:
      return tau <= tau2_ ? a_ : 0.0;
    case Kind::AsymptoticUniform:
      return 0.5 * a_ * (1.0 + std::tanh(tau / width_));
  }
  throw std::logic_error("unreachable");
}

bool Worldline::same_trajectory(const Worldline& other) const {
  if (kind_ != other.kind_ || dim_ != other.dim_) return false;
  if (a_ != other.a_ || tau2_ != other.tau2_ || width_ != other.width_) {
    return false;
  }
  for (int i = 0; i < 5; ++i) {
    if (spatial_[i] != other.spatial_[i] || vel_[i] != other.vel_[i]) {
      return false;
    }
  }
  for (int i = 0; i < 6; ++i) {
    if (base_.x[i] != other.base_.x[i]) return false;
  }
  return true;
}

double Worldline::interval_sq(const Worldline& w1, double tau1,
                              const Worldline& w2, double tau2) {
  if (w1.dimension() != w2.dimension()) {
    throw DimensionMismatch("interval_sq: worldlines of different dimension");
  }
  if (w1.same_trajectory(w2)) {
    const double s = tau1 - tau2;
    switch (w1.kind_) {
      case Kind::StaticAt:
      case Kind::Inertial:
        return -s * s;
      case Kind::UniformAcceleration: {
        const double sh = std::sinh(0.5 * w1.a_ * s);
        return -4.0 * sh * sh / (w1.a_ * w1.a_);
      }
      case Kind::TruncatedUniform: {
        const double a = w1.a_, t2 = w1.tau2_;
        const double lo = std::min(tau1, tau2), hi = std::max(tau1, tau2);
        if (hi <= t2) {
          const double sh = std::sinh(0.5 * a * s);
          return -4.0 * sh * sh / (a * a);
        }
        if (lo >= t2) return -s * s;
        // Mixed: lo on the hyperbola, hi on the inertial continuation.
        const double A = a * t2, B = a * lo, d = a * (hi - t2);
        const double sh = std::sinh(0.5 * (A - B));
        return -(4.0 * sh * sh + 2.0 * d * std::sinh(A - B) + d * d) /
               (a * a);
      }
      case Kind::AsymptoticUniform:
        break;  // generic below
    }
  }
  const SpacetimePoint p1 = w1.position(tau1);
  const SpacetimePoint p2 = w2.position(tau2);
  const double dt = p1.x[0] - p2.x[0];
  double q = -dt * dt;
  for (int i = 1; i < w1.dimension(); ++i) {
    const double dx = p1.x[i] - p2.x[i];
    q += dx * dx;
  }
  return q;
}

double Worldline::lightcone_gap(const SpacetimePoint& event,
                                double tau) const {
  const SpacetimePoint p = position(tau);
  double r2 = 0.0;
  for (int i = 1; i < dim_; ++i) {
    const double dx = p.x[i] - event.x[i];
    r2 += dx * dx;
  }
  return (p.x[0] - event.x[0]) - std::sqrt(r2);
}

double Worldline::lightcone_gap_limit(const SpacetimePoint& event) const {
  // lim tau->+inf of lightcone_gap; finite only for worldlines that become
  // asymptotically null (uniform / asymptotically uniform acceleration).
  switch (kind_) {
    case Kind::UniformAcceleration:
      // t - x -> -offset along the acceleration axis.
      return (event.x[1] - spatial_[0]) - event.x[0];
    case Kind::AsymptoticUniform: {
      AsymCache& c = *cache_;
      {
        std::lock_guard<std::mutex> lock(c.mutex);
        if (!c.limit_ready) {
          // t(tau)-x(tau) = -1/a + int_0^inf exp(-theta(s)) ds.
          double acc = 0.0;
          double lo = 0.0;
          const double step = std::max(width_, 1.0 / a_);
          for (int k = 0; k < 400; ++k) {
            const double hi = lo + step;
            const double mid = 0.5 * (lo + hi), half = 0.5 * step;
            double seg = 0.0;
            for (int j = 0; j < 5; ++j) {
              for (double sgn : {-1.0, 1.0}) {
                seg += kGlW[j] *
                       std::exp(-rapidity(mid + sgn * half * kGlX[j]));
              }
            }
            seg *= half;
            acc += seg;
            lo = hi;
            if (seg < 1e-18 * (1.0 + acc)) break;
          }
          c.t_minus_x_limit = -1.0 / a_ + acc;
          c.limit_ready = true;
        }
      }
      return c.t_minus_x_limit + event.x[1] - event.x[0];
    }
    default:
      return std::numeric_limits<double>::infinity();
  }
}

std::optional<double> Worldline::advanced_time(
    const SpacetimePoint& event) const {
  if (event.dim != dim_) {
    throw DimensionMismatch("advanced_time: event dimension mismatch");
  }
  const double limit = lightcone_gap_limit(event);
  if (std::isfinite(limit) && limit <= 0.0) {
    return std::nullopt;  // behind the horizon
  }

  const double scale =
      1.0 + std::abs(event.x[0]) + std::abs(event.x[1]) +
      (kind_ == Kind::UniformAcceleration || kind_ == Kind::TruncatedUniform ||
               kind_ == Kind::AsymptoticUniform
           ? 1.0 / a_
           : 0.0);
  // Bracket: gap is strictly increasing in tau for a timelike worldline.
  double lo = 0.0, hi = 0.0;
  double step = scale;
  for (int k = 0; k < 200; ++k) {
    if (lightcone_gap(event, lo) < 0.0) break;
    lo -= step;
    step *= 2.0;
    if (k == 199) throw NumericsError("advanced_time: no lower bracket");
  }
  // Hyperbolic kinds overflow cosh beyond a*tau ~ 700; a root further out
  // than that is indistinguishable from "behind the horizon" in double.
  double tau_cap = std::numeric_limits<double>::infinity();
  if (kind_ == Kind::UniformAcceleration || kind_ == Kind::AsymptoticUniform) {
    tau_cap = 690.0 / a_;
  }
  step = scale;
  hi = lo;
  bool bracketed = false;
  for (int k = 0; k < 400; ++k) {
    hi = std::min(hi + step, tau_cap);
    step *= 2.0;
    if (lightcone_gap(event, hi) >= 0.0) {
      bracketed = true;
      break;
    }
    if (hi >= tau_cap) break;
  }
  if (!bracketed) return std::nullopt;

  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (lightcone_gap(event, mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace udw
