#include "udw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>

#include "udw/switching.hpp"

namespace udw {

namespace {

// Gauss-Kronrod 7-15 nodes and weights (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

struct Panel {
  double a = 0, b = 0;
  double value = 0;
  double error = 0;
  double resabs = 0;  // integral of |f|, sets the roundoff floor
  double fscale = 0;  // max |f| sampled, for blow-up diagnosis
};

struct PanelCmp {
  bool operator()(const Panel& l, const Panel& r) const {
    if (l.error != r.error) return l.error < r.error;
    return l.a > r.a;  // deterministic tie-break
  }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);

  double fv1[7], fv2[7];
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  double fmax = std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    fv1[j] = f(c - dx);
    fv2[j] = f(c + dx);
    const double fsum = fv1[j] + fv2[j];
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    fmax = std::max({fmax, std::abs(fv1[j]), std::abs(fv2[j])});
  }
  for (int j = 0; j < 3; ++j) {
    resg += kWg[j] * (fv1[2 * j + 1] + fv2[2 * j + 1]);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] *
              (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }

  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * h;
  p.fscale = fmax;
  resabs *= std::abs(h);
  p.resabs = resabs;
  resasc *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * resabs);
  }
  p.error = err;
  if (!std::isfinite(p.value)) {
    // Isolated infinities mean the rule sampled a pole; NaNs mean the
    // integrand itself is broken.
    bool saw_inf = std::isinf(fc);
    bool saw_nan = std::isnan(fc);
    for (int j = 0; j < 7; ++j) {
      saw_inf = saw_inf || std::isinf(fv1[j]) || std::isinf(fv2[j]);
      saw_nan = saw_nan || std::isnan(fv1[j]) || std::isnan(fv2[j]);
    }
    if (saw_inf && !saw_nan) {
      throw SingularInterior(
          "quadrature: integrand pole sampled inside the interval");
    }
    throw NumericsError("quadrature: integrand produced a non-finite value");
  }
  return p;
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

IntegralResult adaptive(const std::function<double(double)>& f,
                        const std::vector<double>& mesh,
                        const QuadratureOptions& opt) {
  std::priority_queue<Panel, std::vector<Panel>, PanelCmp> heap;
  std::vector<Panel> done;  // roundoff-limited panels, no longer refined
  long evals = 0;
  const double span = mesh.back() - mesh.front();
  const double width_floor =
      1e3 * std::numeric_limits<double>::epsilon() *
      std::max({std::abs(mesh.front()), std::abs(mesh.back()), 1.0});

  double total = 0.0;
  double total_resabs = 0.0;
  double refinable = 0.0;  // error carried by splittable panels
  double committed = 0.0;  // error pinned at the double-precision floor
  auto push = [&](Panel&& p) {
    total += p.value;
    total_resabs += p.resabs;
    refinable += p.error;
    heap.push(std::move(p));
  };
  for (size_t i = 0; i + 1 < mesh.size(); ++i) {
    if (mesh[i + 1] <= mesh[i]) continue;
    push(eval_panel(f, mesh[i], mesh[i + 1]));
    evals += 15;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  while (!heap.empty()) {
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (refinable + committed <= tol) break;
    // Every panel's error estimate is floored at 50 eps |f|-mass, so the sum
    // can never drop below this; stop once the request is unattainable.
    if (refinable + committed <= 1.1 * 50.0 * eps * total_resabs) break;
    // Roundoff-dominated: further splitting cannot help.
    if (refinable <= 0.05 * committed) break;
    if (evals >= opt.max_evaluations) {
      throw NonConvergence("quadrature: evaluation budget exhausted (error " +
                           fmt_g(refinable + committed) + " > tolerance " +
                           fmt_g(tol) + ")");
    }
    Panel worst = heap.top();
    heap.pop();
    if (worst.b - worst.a < width_floor) {
      const double scale = 1.0 + std::abs(total) / std::max(span, 1e-300);
      if (worst.error > 0.5 * std::max(tol, committed) &&
          worst.fscale > 1e10 * scale) {
        throw SingularInterior("quadrature: unresolved blow-up near x = " +
                               fmt_g(0.5 * (worst.a + worst.b)));
      }
      refinable -= worst.error;
      committed += worst.error;
      done.push_back(worst);
      continue;
    }
    total -= worst.value;
    total_resabs -= worst.resabs;
    refinable -= worst.error;
    const double m = 0.5 * (worst.a + worst.b);
    push(eval_panel(f, worst.a, m));
    push(eval_panel(f, m, worst.b));
    evals += 30;
  }

  // Recompute the sums panel-by-panel for a clean final answer.
  double value = 0.0, err = 0.0;
  for (const auto& p : done) {
    value += p.value;
    err += p.error;
  }
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(value)) {
    throw NumericsError("quadrature: non-finite result");
  }
  return {value, err, evals};
}

}  // namespace

IntegralResult integrate(const std::function<double(double)>& f, double a,
                         double b, const QuadratureOptions& opt) {
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0, 0};
    throw std::invalid_argument("integrate: requires a < b");
  }
  return adaptive(f, {a, b}, opt);
}

IntegralResult integrate_subtracted(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opt) {
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0, 0};
    throw std::invalid_argument("integrate_subtracted: requires a < b");
  }
  // Geometric grading toward `a`.
  std::vector<double> mesh;
  mesh.push_back(a);
  const double w = b - a;
  for (int k = 24; k >= 1; --k) {
    mesh.push_back(a + w * std::ldexp(1.0, -k));
  }
  mesh.push_back(b);
  return adaptive(f, mesh, opt);
}

IntegralResult integrate_with_breakpoints(
    const std::function<double(double)>& f, double a, double b,
    const std::vector<double>& breakpoints, const QuadratureOptions& opt) {
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0, 0};
    throw std::invalid_argument("integrate_with_breakpoints: requires a < b");
  }
  std::vector<double> mesh{a, b};
  for (double x : breakpoints) {
    if (x > a && x < b) mesh.push_back(x);
  }
  std::sort(mesh.begin(), mesh.end());
  mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
  return adaptive(f, mesh, opt);
}

IntegralResult integrate_2d_switch(
    const std::function<double(double, double)>& g,
    const SwitchingFunction& chi, const QuadratureOptions& opt) {
  const auto [lo, hi] = chi.support();
  const double t0 = chi.plateau_lo();
  const double t1 = chi.plateau_hi();
  QuadratureOptions inner_opt = opt;
  inner_opt.rel_tol = 0.25 * opt.rel_tol;
  inner_opt.abs_tol = 0.25 * opt.abs_tol / std::max(hi - lo, 1.0);

  long inner_evals = 0;
  double inner_err_max = 0.0;
  auto outer = [&](double u) -> double {
    const double cu = chi(u);
    if (cu == 0.0) return 0.0;
    const double smin = std::max(0.0, u - hi);
    const double smax = u - lo;
    if (smax <= smin) return 0.0;
    auto ig = [&](double s) { return chi(u - s) * g(u, s); };
    // Graded toward s = smin plus the ramp joints of chi(u - s); the ramps
    // can be much narrower than the range and must be pinned to panel
    // boundaries to stay visible to the rule.
    std::vector<double> mesh;
    mesh.push_back(smin);
    for (int k = 24; k >= 1; --k) {
      mesh.push_back(smin + (smax - smin) * std::ldexp(1.0, -k));
    }
    for (double v : {u - hi, u - t1, u - t0, u - lo}) {
      if (v > smin && v < smax) mesh.push_back(v);
    }
    mesh.push_back(smax);
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
    IntegralResult r = adaptive(ig, mesh, inner_opt);
    inner_evals += r.evaluations;
    inner_err_max = std::max(inner_err_max, r.error_estimate);
    return cu * r.value;
  };
  IntegralResult out =
      integrate_with_breakpoints(outer, lo, hi, {t0, t1}, opt);
  out.evaluations += inner_evals;
  out.error_estimate += inner_err_max * (hi - lo);
  return out;
}

}  // namespace udw
