#include "udw/teleport.hpp"

#include <cmath>
#include <random>

namespace udw {

namespace {

// Raw-unit initial blocks of the (A,B) two-mode squeezed resource, prepared
// in the (Q_A - Q_B, P_A + P_B)-squeezed convention at the renormalized
// frequency.
struct ResourceBlocks {
  Eigen::Matrix2d aa, bb, ab;  // B0_{ij} = [[<QQ>, <QP>], [<PQ>, <PP>]]
};

ResourceBlocks resource_blocks(const TeleportScenario& sc) {
  const double mw = sc.detector.m0 * sc.detector.omega_r;
  const double hb = sc.detector.hbar;
  const double c = std::cosh(2.0 * sc.r1), s = std::sinh(2.0 * sc.r1);
  ResourceBlocks rb;
  rb.aa << 0.5 * hb * c / mw, 0.0, 0.0, 0.5 * hb * mw * c;
  rb.bb = rb.aa;
  rb.ab << 0.5 * hb * s / mw, 0.0, 0.0, -0.5 * hb * mw * s;
  return rb;
}

}  // namespace

void TeleportScenario::validate() const {
  detector.validate();
  if (!(0.0 < a && a < b)) {
    throw InvalidScenario("TeleportScenario: requires 0 < a < b");
  }
  if (r1 < 0.0 || r2 < 0.0) {
    throw InvalidScenario("TeleportScenario: squeezing must be >= 0");
  }
  if (t1_grid.empty()) {
    throw InvalidScenario("TeleportScenario: empty measurement grid");
  }
  for (size_t i = 0; i < t1_grid.size(); ++i) {
    if (t1_grid[i] < 0.0 ||
        (i > 0 && t1_grid[i] <= t1_grid[i - 1])) {
      throw InvalidScenario(
          "TeleportScenario: grid must ascend from a nonnegative moment");
    }
  }
  if (mode == TeleportMode::Physical && !(tau2 > 0.0)) {
    throw InvalidScenario("TeleportScenario: physical mode needs tau2 > 0");
  }
}

TeleportEngine::TeleportEngine(const TeleportScenario& sc) : sc_(sc) {
  sc_.validate();
  alice_ = Worldline::static_at(4, {1.0 / sc_.b, 0.0, 0.0});
  const bool truncated =
      sc_.mode == TeleportMode::Physical && std::isfinite(sc_.tau2);
  rob_ = truncated ? Worldline::truncated_uniform(4, sc_.a, sc_.tau2)
                   : Worldline::uniform_acceleration(4, sc_.a);

  // Maximal proper times the noise series must cover.
  double tau_a_max = 0.0, tau_b_max = 0.0;
  const double t1_max = sc_.t1_grid.back();
  if (sc_.mode == TeleportMode::Physical) {
    tau_a_max = t1_max;
    const auto adv = advanced_time_of_measurement(t1_max);
    tau_b_max = adv ? *adv + 1.0 : rob_time_on_minkowski_slice(t1_max);
  } else if (sc_.foliation == Foliation::Minkowski) {
    tau_a_max = t1_max;
    tau_b_max = rob_time_on_minkowski_slice(t1_max);
  } else {
    tau_a_max = 1.0 / sc_.b;  // Alice frozen under the Rindler slices
    tau_b_max = t1_max;
  }
  if (sc_.detector.gamma > 0.0) {
    noise_a_.emplace(sc_.detector, alice_, tau_a_max + 1e-9);
    noise_b_.emplace(sc_.detector, rob_, tau_b_max + 1e-9);
  }
}

double TeleportEngine::rob_time_on_minkowski_slice(double t1) const {
  return std::asinh(sc_.a * t1) / sc_.a;
}

double TeleportEngine::alice_time_on_quasi_rindler_slice(double tau1) const {
  // Intersection of the R-wedge Rindler slice t/x = tanh(a tau1) with
  // Alice's worldline x = 1/b; her proper time equals that Minkowski time.
  return std::tanh(sc_.a * tau1) / sc_.b;
}

std::optional<double> TeleportEngine::advanced_time_of_measurement(
    double t1) const {
  SpacetimePoint event;
  event.dim = 4;
  event.x = {t1, 1.0 / sc_.b, 0.0, 0.0, 0.0, 0.0};
  return rob_.advanced_time(event);
}

Eigen::Matrix4d TeleportEngine::ab_covariance(double tau_a,
                                              double tau_b) const {
  const ResourceBlocks rb = resource_blocks(sc_);
  const Eigen::Matrix2d ma = a_part_propagator(sc_.detector, tau_a);
  const Eigen::Matrix2d mb = a_part_propagator(sc_.detector, tau_b);
  Eigen::Matrix2d baa = ma * rb.aa * ma.transpose();
  Eigen::Matrix2d bbb = mb * rb.bb * mb.transpose();
  Eigen::Matrix2d bab = ma * rb.ab * mb.transpose();

  if (sc_.detector.gamma > 0.0) {
    const CorrelatorBlock va = noise_a_->at(tau_a);
    const CorrelatorBlock vb = noise_b_->at(tau_b);
    baa(0, 0) += va.qq;
    baa(1, 1) += va.pp;
    baa(0, 1) += va.pq;
    baa(1, 0) += va.pq;
    bbb(0, 0) += vb.qq;
    bbb(1, 1) += vb.pp;
    bbb(0, 1) += vb.pq;
    bbb(1, 0) += vb.pq;
    const CrossBlock cb =
        cross_noise(sc_.detector, alice_, tau_a, rob_, tau_b);
    bab(0, 0) += cb.qq;
    bab(1, 1) += cb.pp;
    bab(1, 0) += cb.pq;  // <P_A Q_B>
    bab(0, 1) += cb.qp;  // <Q_A P_B>
  }

  // Canonical units, ordering (q_A, q_B, p_A, p_B).
  const double mw = sc_.detector.m0 * sc_.detector.omega_r;
  Eigen::Matrix4d cov;
  cov(0, 0) = mw * baa(0, 0);
  cov(1, 1) = mw * bbb(0, 0);
  cov(0, 1) = cov(1, 0) = mw * bab(0, 0);
  cov(2, 2) = baa(1, 1) / mw;
  cov(3, 3) = bbb(1, 1) / mw;
  cov(2, 3) = cov(3, 2) = bab(1, 1) / mw;
  cov(0, 2) = cov(2, 0) = baa(1, 0);  // <q_A p_A> = <P_A Q_A> (symmetrized)
  cov(1, 3) = cov(3, 1) = bbb(1, 0);
  cov(2, 1) = cov(1, 2) = bab(1, 0);  // <p_A q_B> = <P_A Q_B>
  cov(3, 0) = cov(0, 3) = bab(0, 1);  // <p_B q_A> = <Q_A P_B>
  return cov;
}

TeleportEngine::Moment TeleportEngine::moment(double tau_a,
                                              double tau_b) const {
  const double hb = sc_.detector.hbar;
  const Eigen::Matrix4d sab = ab_covariance(tau_a, tau_b);

  Moment m;
  {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    GaussianState ab =
        GaussianState::from_covariance({"A", "B"}, mean, sab, hb);
    m.signed_log_neg = log_negativity_signed(ab, {"A"});
    m.e_n = std::max(0.0, m.signed_log_neg);
  }

  // Blocks over (q_A, q_C, p_A, p_C) and B's cross-covariance with them.
  Eigen::Matrix4d s_ac = Eigen::Matrix4d::Zero();
  s_ac(0, 0) = sab(0, 0);
  s_ac(0, 2) = s_ac(2, 0) = sab(0, 2);
  s_ac(2, 2) = sab(2, 2);
  s_ac(1, 1) = 0.5 * hb;  // frozen coherent C: vacuum covariance
  s_ac(3, 3) = 0.5 * hb;

  Eigen::Matrix<double, 2, 4> s_b_ac = Eigen::Matrix<double, 2, 4>::Zero();
  // rows: (q_B, p_B); cols: (q_A, q_C, p_A, p_C)
  s_b_ac(0, 0) = sab(1, 0);
  s_b_ac(0, 2) = sab(1, 2);
  s_b_ac(1, 0) = sab(3, 0);
  s_b_ac(1, 2) = sab(3, 2);

  Eigen::Matrix2d s_b;
  s_b << sab(1, 1), sab(1, 3), sab(3, 1), sab(3, 3);

  const Eigen::Matrix4d s_meas = two_mode_squeezed_covariance(sc_.r2, hb);
  const Eigen::Matrix4d s_sum = s_ac + s_meas;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(s_sum);
  if (!lu.isInvertible()) {
    throw DegenerateMeasurement("teleport: singular conditioning matrix");
  }
  const Eigen::Matrix4d s_inv = lu.inverse();
  const Eigen::Matrix<double, 2, 4> w = s_b_ac * s_inv;
  m.sigma_b_conditioned = s_b - w * s_b_ac.transpose();

  // Outcome statistics: the POVM center displaces mode C.
  const double c = std::sqrt(2.0 * hb);
  Eigen::Matrix<double, 4, 2> t = Eigen::Matrix<double, 4, 2>::Zero();
  t(1, 0) = c;
  t(3, 1) = c;
  const Eigen::Vector2d alpha_vec(sc_.alpha.real(), sc_.alpha.imag());
  const Eigen::Vector4d delta = t * alpha_vec;  // mean of (A,C) blocks

  const Eigen::Matrix2d sig_beta_inv = t.transpose() * s_inv * t;
  const Eigen::Matrix2d sig_beta = sig_beta_inv.inverse();
  const Eigen::Vector2d beta_bar =
      sig_beta * (t.transpose() * (s_inv * delta));

  // Output mean relative to the target: v(beta) = (W T + D)(beta - alpha).
  const Eigen::Matrix2d mt =
      w * t + c * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d sigma_tot =
      m.sigma_b_conditioned + 0.5 * hb * Eigen::Matrix2d::Identity() +
      mt * sig_beta * mt.transpose();
  const Eigen::Vector2d vbar = mt * (beta_bar - alpha_vec);
  const double det = sigma_tot.determinant();
  if (!(det > 0.0)) {
    throw InvalidState("teleport: non-positive output covariance");
  }
  m.f_av = hb / std::sqrt(det) *
           std::exp(-0.5 * vbar.dot(sigma_tot.inverse() * vbar));
  return m;
}

Eigen::Matrix2d TeleportEngine::conditioned_b_evolved(
    double tau_a, double tau_slice_b, double tau_target_b) const {
  const Moment at_slice = moment(tau_a, tau_slice_b);
  const Eigen::Matrix2d cond_canonical = at_slice.sigma_b_conditioned;

  // Propagate in raw units: sigma(target) = M sigma(slice) M^T + noise
  // increment of the unconditioned evolution.
  const double mw = sc_.detector.m0 * sc_.detector.omega_r;
  auto to_raw = [&](const Eigen::Matrix2d& canon) {
    Eigen::Matrix2d raw;
    raw << canon(0, 0) / mw, canon(0, 1), canon(1, 0), canon(1, 1) * mw;
    return raw;
  };
  auto to_canonical = [&](const Eigen::Matrix2d& raw) {
    Eigen::Matrix2d canon;
    canon << raw(0, 0) * mw, raw(0, 1), raw(1, 0), raw(1, 1) / mw;
    return canon;
  };

  const Eigen::Matrix2d m =
      a_part_propagator(sc_.detector, tau_target_b - tau_slice_b);

  auto unconditioned_raw = [&](double tau) {
    const ResourceBlocks rb = resource_blocks(sc_);
    const Eigen::Matrix2d mb = a_part_propagator(sc_.detector, tau);
    Eigen::Matrix2d b = mb * rb.bb * mb.transpose();
    if (sc_.detector.gamma > 0.0) {
      const CorrelatorBlock v = noise_b_->at(tau);
      b(0, 0) += v.qq;
      b(1, 1) += v.pp;
      b(0, 1) += v.pq;
      b(1, 0) += v.pq;
    }
    return b;
  };
  const Eigen::Matrix2d inc =
      unconditioned_raw(tau_target_b) -
      m * unconditioned_raw(tau_slice_b) * m.transpose();

  Eigen::Matrix2d raw =
      m * to_raw(cond_canonical) * m.transpose() + inc;
  return to_canonical(raw);
}

TeleportEngine::McResult TeleportEngine::mc_fidelity(
    double tau_a, double tau_b, long samples, unsigned long long seed) const {
  const double hb = sc_.detector.hbar;
  const Eigen::Matrix4d sab = ab_covariance(tau_a, tau_b);

  // Joint (B, A, C) state; C frozen coherent alpha.
  GaussianState joint = GaussianState::vacuum({"B", "A", "C"}, hb);
  const double c = std::sqrt(2.0 * hb);
  joint.mean_q(2) = c * sc_.alpha.real();
  joint.mean_p(2) = c * sc_.alpha.imag();
  // order in sab: (q_A, q_B, p_A, p_B); joint modes (B, A, C).
  joint.Qb(0, 0) = sab(1, 1);
  joint.Qb(1, 1) = sab(0, 0);
  joint.Qb(0, 1) = joint.Qb(1, 0) = sab(0, 1);
  joint.Pb(0, 0) = sab(3, 3);
  joint.Pb(1, 1) = sab(2, 2);
  joint.Pb(0, 1) = joint.Pb(1, 0) = sab(2, 3);
  joint.Rb(0, 0) = sab(3, 1);   // <P_B Q_B>
  joint.Rb(1, 1) = sab(2, 0);   // <P_A Q_A>
  joint.Rb(0, 1) = sab(3, 0);   // <P_B Q_A>
  joint.Rb(1, 0) = sab(2, 1);   // <P_A Q_B>

  // Outcome distribution (same algebra as moment()).
  Eigen::Matrix4d s_ac = Eigen::Matrix4d::Zero();
  s_ac(0, 0) = sab(0, 0);
  s_ac(0, 2) = s_ac(2, 0) = sab(0, 2);
  s_ac(2, 2) = sab(2, 2);
  s_ac(1, 1) = 0.5 * hb;
  s_ac(3, 3) = 0.5 * hb;
  const Eigen::Matrix4d s_sum =
      s_ac + two_mode_squeezed_covariance(sc_.r2, hb);
  const Eigen::Matrix4d s_inv = s_sum.inverse();
  Eigen::Matrix<double, 4, 2> t = Eigen::Matrix<double, 4, 2>::Zero();
  t(1, 0) = c;
  t(3, 1) = c;
  const Eigen::Vector2d alpha_vec(sc_.alpha.real(), sc_.alpha.imag());
  const Eigen::Vector4d delta = t * alpha_vec;
  const Eigen::Matrix2d sig_beta =
      (t.transpose() * s_inv * t).inverse().eval();
  const Eigen::Vector2d beta_bar =
      sig_beta * (t.transpose() * (s_inv * delta));
  const Eigen::LLT<Eigen::Matrix2d> llt(sig_beta);

  const Eigen::Matrix4d s_meas = two_mode_squeezed_covariance(sc_.r2, hb);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < samples; ++i) {
    Eigen::Vector2d z(normal(rng), normal(rng));
    const Eigen::Vector2d beta_vec = beta_bar + llt.matrixL() * z;
    const std::complex<double> beta(beta_vec(0), beta_vec(1));
    GaussianState cond =
        condition_on_measurement(joint, {"A", "C"},
                                 s_meas, beta);
    GaussianState out = displace(cond, "B", beta);
    const double f = fidelity_vs_coherent(reduce(out, {"B"}), sc_.alpha);
    sum += f;
    sum_sq += f * f;
  }
  McResult r;
  r.mean = sum / samples;
  const double var = std::max(0.0, sum_sq / samples - r.mean * r.mean);
  r.std_error = std::sqrt(var / samples);
  return r;
}

namespace {

FidelitySeries run_series(const TeleportScenario& sc) {
  TeleportEngine engine(sc);
  FidelitySeries series;
  const double eps = sc.epsilon_over_omega / sc.detector.omega();

  for (double label : sc.t1_grid) {
    FidelityPoint pt;
    pt.t1 = label;
    if (sc.mode == TeleportMode::Physical) {
      const auto adv = engine.advanced_time_of_measurement(label);
      if (!adv) {
        pt.failed = true;
        pt.error =
            "NoIntersection: measurement event is behind Rob's horizon "
            "(tau2 = infinity)";
        series.points.push_back(pt);
        continue;
      }
      pt.tau_adv = *adv;
      pt.tau_a = label;
      pt.tau_b = *adv - eps;
    } else if (sc.foliation == Foliation::Minkowski) {
      pt.tau_a = label;
      pt.tau_b = engine.rob_time_on_minkowski_slice(label);
    } else {
      pt.tau_b = label;
      pt.tau_a = engine.alice_time_on_quasi_rindler_slice(label);
    }
    const TeleportEngine::Moment m = engine.moment(pt.tau_a, pt.tau_b);
    pt.f_av = m.f_av;
    pt.e_n = m.e_n;
    pt.signed_log_neg = m.signed_log_neg;
    series.points.push_back(pt);
  }
  return series;
}

}  // namespace

FidelitySeries run_pseudo(const TeleportScenario& sc) {
  if (sc.mode != TeleportMode::Pseudo) {
    throw InvalidScenario("run_pseudo: scenario mode must be Pseudo");
  }
  return run_series(sc);
}

FidelitySeries run_physical(const TeleportScenario& sc) {
  if (sc.mode != TeleportMode::Physical) {
    throw InvalidScenario("run_physical: scenario mode must be Physical");
  }
  return run_series(sc);
}

TeleportMarkers extract_markers(const FidelitySeries& series,
                                int min_samples_between_peaks) {
  TeleportMarkers mk;
  const auto& pts = series.points;
  std::vector<int> peak_idx;
  for (size_t i = 1; i + 1 < pts.size(); ++i) {
    if (pts[i].failed || pts[i - 1].failed || pts[i + 1].failed) continue;
    if (pts[i].f_av >= pts[i - 1].f_av && pts[i].f_av > pts[i + 1].f_av) {
      peak_idx.push_back(static_cast<int>(i));
    }
  }
  for (size_t k = 0; k + 1 < peak_idx.size(); ++k) {
    if (peak_idx[k + 1] - peak_idx[k] < min_samples_between_peaks) {
      throw UnderSampled(
          "extract_markers: consecutive peaks separated by fewer than " +
          std::to_string(min_samples_between_peaks) + " samples");
    }
  }
  for (int i : peak_idx) mk.peaks.emplace_back(pts[i].t1, pts[i].f_av);

  // Envelope crossing of 1/2.
  for (size_t k = 0; k < mk.peaks.size(); ++k) {
    if (mk.peaks[k].second < 0.5) {
      if (k == 0) {
        mk.t_half = mk.peaks[0].first;
      } else {
        const auto& [t0, f0] = mk.peaks[k - 1];
        const auto& [t1, f1] = mk.peaks[k];
        mk.t_half = t0 + (0.5 - f0) / (f1 - f0) * (t1 - t0);
      }
      break;
    }
  }

  // First zero of E_N via the signed log-negativity.
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].failed || pts[i + 1].failed) continue;
    const double s0 = pts[i].signed_log_neg, s1 = pts[i + 1].signed_log_neg;
    if (i == 0 && s0 <= 0.0) {
      mk.t_de = pts[0].t1;
      break;
    }
    if (s0 > 0.0 && s1 <= 0.0) {
      mk.t_de = pts[i].t1 + s0 / (s0 - s1) * (pts[i + 1].t1 - pts[i].t1);
      break;
    }
  }
  return mk;
}

}  // namespace udw
