#include "udw/detector_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace udw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286;

double e1(double x) { return -std::expint(-x); }  // E_1(x), x > 0

// 16-point Gauss-Legendre on [-1,1].
constexpr double kGl16X[8] = {0.0950125098376374, 0.2816035507792589,
                              0.4580167776572274, 0.6178762444026438,
                              0.7554044083550030, 0.8656312023878318,
                              0.9445750230732326, 0.9894009349916499};
constexpr double kGl16W[8] = {0.1894506104550685, 0.1826034150449236,
                              0.1691565193950025, 0.1495959888165767,
                              0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};

// x(s) = -q/s^2 - 1 for the eternal hyperbola, cancellation-free. Capped
// far below overflow; consumers only ever form x/(1+x)-type ratios where
// the cap is indistinguishable from infinity.
double uniform_x(double a, double s) {
  const double v = 0.5 * a * s;
  if (std::abs(v) < 0.2) {
    const double v2 = v * v;
    return v2 * (1.0 / 3.0 + v2 * (2.0 / 45.0 + v2 * (1.0 / 315.0)));
  }
  if (std::abs(v) > 300.0) return 1e280;
  const double sh = std::sinh(v) / v;
  return sh * sh - 1.0;
}

// Same for the truncated hyperbola with the later point at eta (> tau2
// allowed), earlier point at eta - s.
double truncated_x(double a, double tau2, double hi, double lo) {
  if (hi <= tau2) return uniform_x(a, hi - lo);
  if (lo >= tau2) return 0.0;
  const double beta = a * (tau2 - lo);
  const double del = a * (hi - tau2);
  const double wsum = beta + del;  // = a s
  if (wsum < 0.2) {
    return beta * beta * beta * (beta + 4.0 * del) / (12.0 * wsum * wsum);
  }
  if (beta > 600.0) return 1e280;
  const double sh = std::sinh(0.5 * beta);
  // delta^2 - wsum^2 spelled as -beta (delta + wsum) to avoid the
  // difference of large squares.
  const double num = 4.0 * sh * sh + 2.0 * del * std::sinh(beta) -
                     beta * (del + wsum);
  const double x = num / (wsum * wsum);
  return std::min(x, 1e280);
}

}  // namespace

double DetectorParams::omega() const {
  return std::sqrt(omega_r * omega_r - gamma * gamma);
}

double DetectorParams::lambda_sq() const { return 8.0 * kPi * m0 * gamma; }

void DetectorParams::validate() const {
  if (!(m0 > 0.0) || !(hbar > 0.0)) {
    throw std::invalid_argument("DetectorParams: m0, hbar must be positive");
  }
  if (gamma < 0.0) {
    throw std::invalid_argument("DetectorParams: gamma must be >= 0");
  }
  if (!(omega_r > gamma)) {
    throw std::invalid_argument(
        "DetectorParams: requires omega_r > gamma (underdamped regime)");
  }
  if (gamma > 0.0 && lambda1 < 5.0) {
    throw std::invalid_argument(
        "DetectorParams: the correlator engine needs lambda1 >= 5 so the UV "
        "cutoff exp(-lambda1) is far below the dynamical scales");
  }
}

DetectorParams DetectorParams::from_omega(double omega, double gamma,
                                          double m0, double hbar,
                                          double lambda0, double lambda1) {
  DetectorParams p;
  p.m0 = m0;
  p.hbar = hbar;
  p.gamma = gamma;
  p.omega_r = std::sqrt(omega * omega + gamma * gamma);
  p.lambda0 = lambda0;
  p.lambda1 = lambda1;
  return p;
}

DampedKernels damped_kernels(const DetectorParams& p, double t) {
  const double om = p.omega();
  const double e = std::exp(-p.gamma * t);
  const double c = std::cos(om * t), s = std::sin(om * t);
  DampedKernels k;
  k.K = e * (c + p.gamma / om * s);
  k.g = e * s / om;
  k.Kdot = -p.omega_r * p.omega_r * k.g;
  k.gdot = e * (c - p.gamma / om * s);
  return k;
}

Eigen::Matrix2d a_part_propagator(const DetectorParams& p, double t) {
  const DampedKernels k = damped_kernels(p, t);
  Eigen::Matrix2d m;
  m << k.K, k.g / p.m0, p.m0 * k.Kdot, k.gdot;
  return m;
}

// ---------------------------------------------------------------------------
// SelfNoise

struct SelfNoise::Impl {
  DetectorParams p;
  Worldline w;
  NoiseOptions opt;
  bool zero = false;
  double h = 0.0;
  double etamax = 0.0;
  int n_full = 0;
  std::vector<double> jg, jgd;        // drivers at half-grid nodes
  std::vector<double> x, r, y;        // v blocks at full nodes
  std::vector<double> dx, dr, dy;     // RHS at full nodes

  Impl(const DetectorParams& params, const Worldline& wl, double eta_max,
       const NoiseOptions& options)
      : p(params), w(wl), opt(options), etamax(eta_max) {
    p.validate();
    if (p.gamma == 0.0) {
      zero = true;
      return;
    }
    build();
  }

  double accel_scale() const {
    switch (w.kind()) {
      case Worldline::Kind::UniformAcceleration:
      case Worldline::Kind::TruncatedUniform:
      case Worldline::Kind::AsymptoticUniform:
        return w.acceleration_parameter();
      default:
        return 0.0;
    }
  }

  // Regularized kernel remainder R2(eta, s) = Re W0 + 1/(4 pi^2 s^2);
  // coincidence limit acc^2/(48 pi^2).
  double r2_at(double eta, double s) const {
    if (w.kind() == Worldline::Kind::Inertial ||
        w.kind() == Worldline::Kind::StaticAt) {
      return 0.0;
    }
    if (s <= 0.0) {
      const double acc = w.proper_accel_scalar(eta);
      return acc * acc / (48.0 * kPi * kPi);
    }
    double xv = 0.0;
    switch (w.kind()) {
      case Worldline::Kind::UniformAcceleration:
        xv = uniform_x(w.acceleration_parameter(), s);
        break;
      case Worldline::Kind::TruncatedUniform:
        xv = truncated_x(w.acceleration_parameter(), w.truncation_time(), eta,
                         eta - s);
        break;
      default: {
        const double acc = w.proper_accel_scalar(eta);
        if (s < 1e-3 / (1.0 + acc)) {
          xv = acc * acc * s * s / 12.0;
        } else {
          const double q = Worldline::interval_sq(w, eta, w, eta - s);
          xv = -q / (s * s) - 1.0;
        }
        break;
      }
    }
    return xv / (4.0 * kPi * kPi * s * s * (1.0 + xv));
  }

  bool stationary() const {
    switch (w.kind()) {
      case Worldline::Kind::Inertial:
      case Worldline::Kind::StaticAt:
      case Worldline::Kind::UniformAcceleration:
        return true;
      default:
        return false;
    }
  }

  // Closed-form singular pieces. lam = lambda1 (UV cutoff exponent);
  // frequency renormalization removes the 1/eps constant.
  double i_c(double eta) const {
    const double g2 = 2.0 * p.gamma;
    const double z = g2 * eta;
    if (z < 1e-8) {
      return -1.0 / eta - g2 * (std::log(eta) + p.lambda1);
    }
    return -g2 - std::exp(-z) / eta +
           g2 * (kEulerGamma + std::log(g2) + e1(z)) - g2 * p.lambda1;
  }
  double i_cg(double eta) const {
    const double g2 = 2.0 * p.gamma;
    const double z = g2 * eta;
    if (z < 1e-8) {
      return p.lambda1 + std::log(eta) - z;
    }
    return p.lambda1 - kEulerGamma - std::log(g2) - e1(z);
  }

  // Kernel-only regular integrands (g - s c)/s^2 and (gdot - c)/s^2,
  // c = exp(-2 gamma s).
  double reg_g_integrand(double s) const {
    const double om = p.omega(), gm = p.gamma;
    if (s < 1e-4 / (1.0 + p.omega_r)) {
      return gm - (1.5 * gm * gm + om * om / 6.0) * s;
    }
    const DampedKernels k = damped_kernels(p, s);
    return (k.g - s * std::exp(-2.0 * gm * s)) / (s * s);
  }
  double reg_gd_integrand(double s) const {
    const double gm = p.gamma;
    const double or2 = p.omega_r * p.omega_r;
    if (s < 1e-4 / (1.0 + p.omega_r)) {
      return -0.5 * or2 + (2.0 / 3.0) * gm * or2 * s;
    }
    const DampedKernels k = damped_kernels(p, s);
    return (k.gdot - std::exp(-2.0 * gm * s)) / (s * s);
  }

  void rhs(double jg_v, double jgd_v, double xv, double rv, double yv,
           double& dxv, double& drv, double& dyv) const {
    const double l2 = p.lambda_sq();
    dxv = 2.0 * rv / p.m0;
    drv = yv / p.m0 - 2.0 * p.gamma * rv -
          p.m0 * p.omega_r * p.omega_r * xv + l2 / p.m0 * jg_v;
    dyv = -4.0 * p.gamma * yv - 2.0 * p.m0 * p.omega_r * p.omega_r * rv +
          2.0 * l2 * jgd_v;
  }

  // Early-time drivers, eta <= h: linearized regular parts + closed forms.
  void early_drivers(double eta, double& jg_v, double& jgd_v) const {
    const double r20 = [&] {
      const double a = accel_scale();
      return a * a / (48.0 * kPi * kPi);
    }();
    const double hb = p.hbar;
    const double num_g = r20 * 0.5 * eta * eta;
    const double num_gd = r20 * eta;
    const double reg_g = p.gamma * eta;
    const double reg_gd = -0.5 * p.omega_r * p.omega_r * eta;
    jg_v = hb * num_g - hb / (4.0 * kPi * kPi) * (reg_g + i_cg(eta));
    jgd_v = hb * num_gd - hb / (4.0 * kPi * kPi) * (reg_gd + i_c(eta));
  }

  void build() {
    const double scale = std::max({p.omega(), accel_scale(), 1e-6});
    h = (2.0 * kPi / scale) / opt.oversample;
    n_full = static_cast<int>(std::ceil(etamax / h)) + 2;
    const int nh = 2 * n_full + 1;  // half-grid nodes, s_j = j h/2

    // Cumulative integrals on the half grid.
    std::vector<double> fg(nh), fgd(nh), rg(nh), rgd(nh);
    const bool stat = stationary();
    const double tau2 = w.kind() == Worldline::Kind::TruncatedUniform
                            ? w.truncation_time()
                            : std::numeric_limits<double>::infinity();
    for (int j = 0; j < nh; ++j) {
      const double s = 0.5 * h * j;
      const DampedKernels k = damped_kernels(p, s);
      const double r2 = stat ? r2_at(0.0, s) : 0.0;  // stationary R2(s)
      fg[j] = k.g * r2;
      fgd[j] = k.gdot * r2;
      rg[j] = reg_g_integrand(s);
      rgd[j] = reg_gd_integrand(s);
    }
    auto cumulate = [&](const std::vector<double>& f) {
      std::vector<double> c(nh, 0.0);
      for (int k = 0; k + 2 < nh; k += 2) {
        c[k + 1] = c[k] + h / 24.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
        c[k + 2] = c[k] + h / 6.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
      }
      return c;
    };
    std::vector<double> num_g = cumulate(fg);
    std::vector<double> num_gd = cumulate(fgd);
    const std::vector<double> reg_g = cumulate(rg);
    const std::vector<double> reg_gd = cumulate(rgd);

    if (!stat) {
      // Non-stationary memory: recompute the R2 part per node. For the
      // truncated hyperbola R2 vanishes when both points are on the
      // inertial tail, so the support is s in [eta - tau2, eta].
      for (int j = 1; j < nh; ++j) {
        const double eta = 0.5 * h * j;
        if (eta <= tau2) {
          // identical to the eternal hyperbola up to here
          double acc_g = 0.0, acc_gd = 0.0;
          integrate_memory(eta, 0.0, eta, acc_g, acc_gd);
          num_g[j] = acc_g;
          num_gd[j] = acc_gd;
        } else {
          double acc_g = 0.0, acc_gd = 0.0;
          integrate_memory(eta, std::max(0.0, eta - tau2), eta, acc_g,
                           acc_gd);
          num_g[j] = acc_g;
          num_gd[j] = acc_gd;
        }
      }
    }

    const double hb = p.hbar;
    jg.assign(nh, 0.0);
    jgd.assign(nh, 0.0);
    for (int j = 1; j < nh; ++j) {
      const double eta = 0.5 * h * j;
      jg[j] = hb * num_g[j] -
              hb / (4.0 * kPi * kPi) * (reg_g[j] + i_cg(eta));
      jgd[j] = hb * num_gd[j] -
               hb / (4.0 * kPi * kPi) * (reg_gd[j] + i_c(eta));
    }

    // ODE integration. Log-spaced RK4 through the switch-on transient,
    // then uniform RK4 on the grid with exactly-sampled drivers.
    x.assign(n_full + 1, 0.0);
    r.assign(n_full + 1, 0.0);
    y.assign(n_full + 1, 0.0);
    dx.assign(n_full + 1, 0.0);
    dr.assign(n_full + 1, 0.0);
    dy.assign(n_full + 1, 0.0);

    double xv = 0.0, rv = 0.0, yv = 0.0;
    {
      const double eta_start =
          std::max(10.0 * std::exp(-p.lambda1), 1e-14);
      const int nlog = std::max(
          1, static_cast<int>(std::ceil(std::log2(h / eta_start))));
      double eta = eta_start;
      for (int j = 0; j < nlog; ++j) {
        const double eta_next = (j == nlog - 1) ? h : eta * 2.0;
        rk4_step(eta, eta_next - eta, xv, rv, yv,
                 [&](double e, double& a, double& b) { early_drivers(e, a, b); });
        eta = eta_next;
      }
    }
    x[1] = xv;
    r[1] = rv;
    y[1] = yv;
    {
      double a, b;
      early_drivers(h, a, b);
      rhs(a, b, xv, rv, yv, dx[1], dr[1], dy[1]);
    }
    for (int k = 1; k < n_full; ++k) {
      const double j0 = jg[2 * k], j1 = jg[2 * k + 1], j2 = jg[2 * k + 2];
      const double d0 = jgd[2 * k], d1 = jgd[2 * k + 1], d2 = jgd[2 * k + 2];
      double k1x, k1r, k1y, k2x, k2r, k2y, k3x, k3r, k3y, k4x, k4r, k4y;
      rhs(j0, d0, xv, rv, yv, k1x, k1r, k1y);
      rhs(j1, d1, xv + 0.5 * h * k1x, rv + 0.5 * h * k1r, yv + 0.5 * h * k1y,
          k2x, k2r, k2y);
      rhs(j1, d1, xv + 0.5 * h * k2x, rv + 0.5 * h * k2r, yv + 0.5 * h * k2y,
          k3x, k3r, k3y);
      rhs(j2, d2, xv + h * k3x, rv + h * k3r, yv + h * k3y, k4x, k4r, k4y);
      xv += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      rv += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
      yv += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      x[k + 1] = xv;
      r[k + 1] = rv;
      y[k + 1] = yv;
      rhs(j2, d2, xv, rv, yv, dx[k + 1], dr[k + 1], dy[k + 1]);
    }
  }

  template <class Drv>
  void rk4_step(double eta, double step, double& xv, double& rv, double& yv,
                Drv driver) {
    auto f = [&](double e, double xx, double rr, double yy, double& ax,
                 double& ar, double& ay) {
      double a, b;
      driver(e, a, b);
      rhs(a, b, xx, rr, yy, ax, ar, ay);
    };
    double k1x, k1r, k1y, k2x, k2r, k2y, k3x, k3r, k3y, k4x, k4r, k4y;
    f(eta, xv, rv, yv, k1x, k1r, k1y);
    f(eta + 0.5 * step, xv + 0.5 * step * k1x, rv + 0.5 * step * k1r,
      yv + 0.5 * step * k1y, k2x, k2r, k2y);
    f(eta + 0.5 * step, xv + 0.5 * step * k2x, rv + 0.5 * step * k2r,
      yv + 0.5 * step * k2y, k3x, k3r, k3y);
    f(eta + step, xv + step * k3x, rv + step * k3r, yv + step * k3y, k4x,
      k4r, k4y);
    xv += step / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    rv += step / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    yv += step / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  }

  // Simpson over the half-grid-resolution s mesh of kernel * R2(eta, .).
  void integrate_memory(double eta, double slo, double shi, double& acc_g,
                        double& acc_gd) const {
    acc_g = 0.0;
    acc_gd = 0.0;
    if (shi <= slo) return;
    const int n = std::max(
        2, 2 * static_cast<int>(std::ceil((shi - slo) / h)));  // even count
    const double ds = (shi - slo) / n;
    double prev_g = 0.0, prev_gd = 0.0, mid_g = 0.0, mid_gd = 0.0;
    auto eval = [&](double s, double& fg_v, double& fgd_v) {
      const DampedKernels k = damped_kernels(p, std::max(s, 0.0));
      const double r2 = r2_at(eta, s);
      fg_v = k.g * r2;
      fgd_v = k.gdot * r2;
    };
    eval(slo, prev_g, prev_gd);
    for (int i = 0; i + 2 <= n; i += 2) {
      double g2v, gd2v;
      eval(slo + (i + 1) * ds, mid_g, mid_gd);
      eval(slo + (i + 2) * ds, g2v, gd2v);
      acc_g += ds / 3.0 * (prev_g + 4.0 * mid_g + g2v);
      acc_gd += ds / 3.0 * (prev_gd + 4.0 * mid_gd + gd2v);
      prev_g = g2v;
      prev_gd = gd2v;
    }
  }

  CorrelatorBlock at(double eta) const {
    CorrelatorBlock b;
    if (zero || eta <= 0.0) return b;
    if (eta > etamax + h) {
      throw std::invalid_argument("SelfNoise::at: eta beyond precomputed range");
    }
    int k = std::min(static_cast<int>(eta / h), n_full - 1);
    const double t = eta / h - k;
    auto hermite = [&](const std::vector<double>& v,
                       const std::vector<double>& d) {
      const double t2 = t * t, t3 = t2 * t;
      return v[k] * (2 * t3 - 3 * t2 + 1) + v[k + 1] * (-2 * t3 + 3 * t2) +
             h * d[k] * (t3 - 2 * t2 + t) + h * d[k + 1] * (t3 - t2);
    };
    b.qq = hermite(x, dx);
    b.pq = hermite(r, dr);
    b.pp = hermite(y, dy);
    return b;
  }
};

SelfNoise::SelfNoise(const DetectorParams& params, const Worldline& w,
                     double eta_max, const NoiseOptions& opt)
    : impl_(std::make_unique<Impl>(params, w, eta_max, opt)) {}
SelfNoise::~SelfNoise() = default;
SelfNoise::SelfNoise(SelfNoise&&) noexcept = default;
SelfNoise& SelfNoise::operator=(SelfNoise&&) noexcept = default;

CorrelatorBlock SelfNoise::at(double eta) const { return impl_->at(eta); }
double SelfNoise::eta_max() const { return impl_->etamax; }

// ---------------------------------------------------------------------------
// Cross noise

namespace {

// int_L^R (e^{-zeta u} - 1)/u du + ln|R/L|  (principal value across u = 0).
std::complex<double> pv_exp_integral(std::complex<double> zeta, double L,
                                     double R) {
  if (L == R) return 0.0;
  std::complex<double> acc = 0.0;
  auto segment = [&](double lo, double hi) {
    if (hi <= lo) return;
    const int panels =
        1 + static_cast<int>(std::abs(zeta) * (hi - lo) / 3.0);
    const double pw = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * pw, half = 0.5 * pw;
      for (int j = 0; j < 8; ++j) {
        for (double sgn : {-1.0, 1.0}) {
          const double u = c + sgn * half * kGl16X[j];
          std::complex<double> f;
          const std::complex<double> zu = zeta * u;
          if (std::abs(zu) < 1e-4) {
            f = -zeta * (1.0 - 0.5 * zu + zu * zu / 6.0);
          } else {
            f = (std::exp(-zu) - 1.0) / u;
          }
          acc += kGl16W[j] * half * f;
        }
      }
    }
  };
  if (L < 0.0 && R > 0.0) {
    segment(L, 0.0);
    segment(0.0, R);
  } else {
    segment(L, R);
  }
  const double la = std::max(std::abs(L), 1e-14);
  const double ra = std::max(std::abs(R), 1e-14);
  acc += std::log(ra / la);
  return acc;
}

}  // namespace

CrossBlock cross_noise(const DetectorParams& params, const Worldline& wa,
                       double eta_a, const Worldline& wb, double eta_b,
                       const CrossNoiseOptions& opt) {
  params.validate();
  CrossBlock out;
  if (params.gamma == 0.0 || eta_a <= 0.0 || eta_b <= 0.0) return out;
  if (wa.kind() != Worldline::Kind::StaticAt) {
    throw NumericsError(
        "cross_noise: the first worldline must be StaticAt (teleport "
        "geometry); general pairs are not implemented");
  }
  if (wa.dimension() != 4 || wb.dimension() != 4) {
    throw UnsupportedDimension("cross_noise: requires d = 4 worldlines");
  }

  const double om = params.omega();
  const double xa = wa.position(0.0).x[1];
  for (int k = 2; k < 4; ++k) {
    if (wa.position(0.0).x[k] != wb.position(0.0).x[k]) {
      throw NumericsError(
          "cross_noise: worldlines must share the transverse position");
    }
  }
  const std::complex<double> zeta(-params.gamma, om);
  const std::complex<double> i(0.0, 1.0);

  // PV int_0^eta_a e^{-zeta sigma} / (sigma - s0) dsigma. When the pole
  // sits far outside the range a direct panel rule is used; the factored
  // exponential form would overflow for s0 ~ exp(a tau)/a.
  auto pole_integral = [&](double s0) -> std::complex<double> {
    if (s0 > -0.5 && s0 < eta_a + 0.5) {
      return std::exp(-zeta * s0) *
             pv_exp_integral(zeta, -s0, eta_a - s0);
    }
    const double dist = s0 < 0.0 ? -s0 : s0 - eta_a;
    const int panels = 2 + static_cast<int>(std::abs(zeta) * eta_a / 3.0 +
                                            eta_a / std::max(1.0, dist));
    const double pw = eta_a / panels;
    std::complex<double> acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double c = (p + 0.5) * pw, half = 0.5 * pw;
      for (int j = 0; j < 8; ++j) {
        for (double sgn : {-1.0, 1.0}) {
          const double s = c + sgn * half * kGl16X[j];
          acc += kGl16W[j] * half * std::exp(-zeta * s) / (s - s0);
        }
      }
    }
    return acc;
  };

  // Inner row integral over the static worldline's time sigma in [0, eta_a]:
  // row(sp) = PV int e^{-zeta sigma} hbar/(4 pi^2 q) dsigma with
  // q = D^2 - (sigma - T)^2, poles at T -+ D. The near root T - D is formed
  // from the stable t - x of the hyperbola.
  auto row = [&](double sp) -> std::complex<double> {
    const SpacetimePoint zb = wb.position(sp);
    // The null roots are (t - x)_B + x_A and (t + x)_B - x_A, both formed
    // without differences of exponentially large coordinates.
    const double root_in = wb.t_minus_x(sp) + xa;
    const double root_out = (zb.x[0] + zb.x[1]) - xa;
    const double dxv = zb.x[1] - xa;
    if (dxv == 0.0) {
      throw NullSeparation("cross_noise: coincident spatial positions");
    }
    const double D = std::abs(dxv);
    const double s_minus = dxv > 0.0 ? root_in : root_out;
    const double s_plus = dxv > 0.0 ? root_out : root_in;
    const std::complex<double> gm = pole_integral(s_minus);
    const std::complex<double> gp = pole_integral(s_plus);
    return params.hbar / (8.0 * kPi * kPi * D) * (gm - gp);
  };

  // Outer integral over the second worldline's time; refine panels where a
  // pole crosses the inner boundary (log kinks in row()).
  const double base_w = (2.0 * kPi / om) * opt.panel_fraction;
  std::vector<double> edges;
  for (double e = 0.0; e < eta_b; e += base_w) edges.push_back(e);
  edges.push_back(eta_b);

  auto pole_pos = [&](double sp, int which) {
    if (which == 0) return wb.t_minus_x(sp) + xa;
    const SpacetimePoint zb = wb.position(sp);
    return (zb.x[0] + zb.x[1]) - xa;
  };
  std::vector<double> refined;
  for (size_t e = 0; e + 1 < edges.size(); ++e) {
    refined.push_back(edges[e]);
    bool kink = false;
    for (int which = 0; which < 2 && !kink; ++which) {
      for (double bnd : {0.0, eta_a}) {
        const double f0 = pole_pos(edges[e], which) - bnd;
        const double f1 = pole_pos(edges[e + 1], which) - bnd;
        if (f0 * f1 < 0.0) {
          kink = true;
          break;
        }
      }
    }
    if (kink) {
      for (int s = 1; s < 16; ++s) {
        refined.push_back(edges[e] +
                          (edges[e + 1] - edges[e]) * s / 16.0);
      }
    }
  }
  refined.push_back(edges.back());

  std::complex<double> int1 = 0.0, int2 = 0.0;  // with e^{-zeta sp}, e^{-conj zeta sp}
  for (size_t e = 0; e + 1 < refined.size(); ++e) {
    const double c = 0.5 * (refined[e] + refined[e + 1]);
    const double half = 0.5 * (refined[e + 1] - refined[e]);
    if (half <= 0.0) continue;
    for (int j = 0; j < 8; ++j) {
      for (double sgn : {-1.0, 1.0}) {
        const double sp = c + sgn * half * kGl16X[j];
        const std::complex<double> rv = row(sp);
        const double wgt = kGl16W[j] * half;
        int1 += wgt * std::exp(-zeta * sp) * rv;
        int2 += wgt * std::exp(-std::conj(zeta) * sp) * rv;
      }
    }
  }

  const std::complex<double> e_zz =
      std::exp(zeta * (eta_a + eta_b)) * int1;
  const std::complex<double> e_zzb =
      std::exp(zeta * eta_a + std::conj(zeta) * eta_b) * int2;

  const std::complex<double> wg = -i / om;
  const std::complex<double> wd(1.0, params.gamma / om);
  auto combo = [&](std::complex<double> w1, std::complex<double> w2) {
    return 0.5 * (w1 * w2 * e_zz + w1 * std::conj(w2) * e_zzb).real();
  };

  const double l2 = params.lambda_sq();
  out.qq = l2 / (params.m0 * params.m0) * combo(wg, wg);
  out.pp = l2 * combo(wd, wd);
  out.pq = l2 / params.m0 * combo(wd, wg);
  out.qp = l2 / params.m0 * combo(wg, wd);
  return out;
}

// ---------------------------------------------------------------------------
// Series assembly

CorrelatorBlock CorrelatorSeries::self_block(int sample, int detector) const {
  const CorrelatorSample& s = samples.at(sample);
  CorrelatorBlock b;
  b.qq = s.qq(detector, detector);
  b.pp = s.pp(detector, detector);
  b.pq = s.pq(detector, detector);
  return b;
}

CorrelatorSeries evolve_correlators(const DetectorParams& params,
                                    const std::vector<Worldline>& worldlines,
                                    const GaussianState& initial,
                                    const std::vector<double>& grid,
                                    const NoiseOptions& opt) {
  params.validate();
  const int n = static_cast<int>(worldlines.size());
  if (n == 0) throw std::invalid_argument("evolve_correlators: no detectors");
  if (initial.num_modes() != n) {
    throw std::invalid_argument(
        "evolve_correlators: initial state mode count != detector count");
  }
  if (grid.empty() || grid.front() < 0.0) {
    throw std::invalid_argument(
        "evolve_correlators: grid must be ascending from 0");
  }
  for (size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("evolve_correlators: grid must ascend");
    }
  }

  // Canonical -> raw conversion of the initial blocks.
  const double mw = params.m0 * params.omega_r;
  Eigen::MatrixXd qq0 = initial.Qb / mw;
  Eigen::MatrixXd pp0 = initial.Pb * mw;
  Eigen::MatrixXd pq0 = initial.Rb;

  std::vector<SelfNoise> noises;
  if (params.gamma > 0.0) {
    noises.reserve(n);
    for (const auto& w : worldlines) {
      noises.emplace_back(params, w, grid.back(), opt);
    }
  }

  CorrelatorSeries series;
  for (int i = 0; i < n; ++i) series.labels.push_back(initial.modes[i]);

  const double utol = params.hbar * params.hbar *
                      (0.25 * opt.uncertainty_rel_slack) +
                      opt.uncertainty_abs_slack * params.hbar * params.hbar;

  for (double eta : grid) {
    CorrelatorSample smp;
    smp.eta = eta;
    smp.qq_a.resize(n, n);
    smp.pp_a.resize(n, n);
    smp.pq_a.resize(n, n);
    smp.qq_v = Eigen::MatrixXd::Zero(n, n);
    smp.pp_v = Eigen::MatrixXd::Zero(n, n);
    smp.pq_v = Eigen::MatrixXd::Zero(n, n);

    const Eigen::Matrix2d m = a_part_propagator(params, eta);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Eigen::Matrix2d b0;
        // B0_{ij} = [[<Q_i Q_j>, <Q_i P_j>], [<P_i Q_j>, <P_i P_j>]].
        b0 << qq0(i, j), pq0(j, i), pq0(i, j), pp0(i, j);
        const Eigen::Matrix2d b = m * b0 * m.transpose();
        smp.qq_a(i, j) = b(0, 0);
        smp.pq_a(i, j) = b(1, 0);
        smp.pp_a(i, j) = b(1, 1);
      }
    }

    if (params.gamma > 0.0) {
      for (int i = 0; i < n; ++i) {
        const CorrelatorBlock v = noises[i].at(eta);
        smp.qq_v(i, i) = v.qq;
        smp.pp_v(i, i) = v.pp;
        smp.pq_v(i, i) = v.pq;
      }
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          CrossBlock cb;
          if (worldlines[i].kind() == Worldline::Kind::StaticAt) {
            cb = cross_noise(params, worldlines[i], eta, worldlines[j], eta);
          } else if (worldlines[j].kind() == Worldline::Kind::StaticAt) {
            const CrossBlock t =
                cross_noise(params, worldlines[j], eta, worldlines[i], eta);
            cb.qq = t.qq;
            cb.pp = t.pp;
            cb.pq = t.qp;
            cb.qp = t.pq;
          } else {
            throw NumericsError(
                "evolve_correlators: cross noise needs one static detector");
          }
          smp.qq_v(i, j) = smp.qq_v(j, i) = cb.qq;
          smp.pp_v(i, j) = smp.pp_v(j, i) = cb.pp;
          smp.pq_v(i, j) = cb.pq;
          smp.pq_v(j, i) = cb.qp;  // <P_j Q_i> = <Q_i P_j>
        }
      }
    }

    smp.qq = smp.qq_a + smp.qq_v;
    smp.pp = smp.pp_a + smp.pp_v;
    smp.pq = smp.pq_a + smp.pq_v;

    for (int i = 0; i < n; ++i) {
      CorrelatorBlock b{smp.qq(i, i), smp.pp(i, i), smp.pq(i, i)};
      if (b.uncertainty_margin(params.hbar) < -utol) {
        throw UncertaintyViolation(
            "evolve_correlators: uncertainty relation violated at eta = " +
            std::to_string(eta) + " (margin " +
            std::to_string(b.uncertainty_margin(params.hbar)) + ")");
      }
    }
    series.samples.push_back(std::move(smp));
  }
  return series;
}

std::vector<Rho11Sample> rho11_history(const DetectorParams& params, double a,
                                       const std::vector<double>& grid,
                                       const NoiseOptions& opt) {
  params.validate();
  const Worldline w = a > 0.0
                          ? Worldline::uniform_acceleration(4, a)
                          : Worldline::static_at(4, {0.0, 0.0, 0.0});
  const double hb = params.hbar;
  const double mw = params.m0 * params.omega_r;
  const double qq0 = 0.5 * hb / mw;
  const double pp0 = 0.5 * hb * mw;

  std::unique_ptr<SelfNoise> noise;
  if (params.gamma > 0.0 && !grid.empty()) {
    noise = std::make_unique<SelfNoise>(params, w, grid.back(), opt);
  }

  const double utol =
      hb * hb * (0.25 * opt.uncertainty_rel_slack + opt.uncertainty_abs_slack);

  std::vector<Rho11Sample> out;
  out.reserve(grid.size());
  for (double eta : grid) {
    const Eigen::Matrix2d m = a_part_propagator(params, eta);
    Eigen::Matrix2d b0;
    b0 << qq0, 0.0, 0.0, pp0;
    const Eigen::Matrix2d b = m * b0 * m.transpose();
    CorrelatorBlock blk{b(0, 0), b(1, 1), b(1, 0)};
    if (noise) {
      const CorrelatorBlock v = noise->at(eta);
      blk.qq += v.qq;
      blk.pp += v.pp;
      blk.pq += v.pq;
    }
    const double margin = blk.uncertainty_margin(hb);
    if (margin < -utol) {
      throw UncertaintyViolation(
          "rho11_history: uncertainty violated at eta = " +
          std::to_string(eta));
    }
    Rho11Sample s;
    s.eta = eta;
    s.block = blk;
    s.rho11 = margin <= 0.0
                  ? 0.0
                  : excited_population(blk.qq, blk.pp, blk.pq, params.m0,
                                       params.omega_r, hb);
    out.push_back(s);
  }
  return out;
}

PerturbativeRho11 perturbative_rho11(const DetectorParams& params, double a,
                                     double eta) {
  params.validate();
  PerturbativeRho11 r;
  const double pref = params.lambda_sq() / (4.0 * kPi * params.m0);  // = 2 gamma
  if (a > 0.0) {
    r.planck_term = pref * eta / std::expm1(2.0 * kPi * params.omega_r / a);
    r.offset_term = pref *
                    (params.lambda1 + params.lambda0 -
                     2.0 * std::log(a / params.omega_r)) /
                    (2.0 * kPi * params.omega_r);
  } else {
    r.planck_zeroed = true;
    r.planck_term = 0.0;
    r.offset_term = pref * (params.lambda1 + params.lambda0) /
                    (2.0 * kPi * params.omega_r);
  }
  r.value = r.planck_term + r.offset_term;
  return r;
}

double effective_temperature(const CorrelatorBlock& block,
                             const DetectorParams& params) {
  const double hb = params.hbar;
  const double det = block.qq * block.pp - block.pq * block.pq;
  if (det < 0.25 * hb * hb * (1.0 - 1e-6)) {
    throw InvalidState("effective_temperature: invalid correlators");
  }
  const double nu = std::sqrt(det);
  if (nu <= 0.5 * hb * (1.0 + 1e-12)) return 0.0;
  return params.omega_r / std::log((nu + 0.5 * hb) / (nu - 0.5 * hb));
}

}  // namespace udw
