#include "udw/gaussian_state.hpp"

#include <algorithm>
#include <cmath>

namespace udw {

namespace {

Eigen::MatrixXd symplectic_form(int n) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return omega;
}

std::vector<double> symplectic_spectrum(const Eigen::MatrixXd& cov,
                                        double scale_hint) {
  const int n2 = static_cast<int>(cov.rows());
  const int n = n2 / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 *
                                                    (cov + cov.transpose()));
  const double scale = std::max(scale_hint, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw InvalidState("covariance matrix is not positive semidefinite");
  }
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd sqrt_cov = es.eigenvectors() *
                             d.cwiseSqrt().asDiagonal() *
                             es.eigenvectors().transpose();
  Eigen::MatrixXd k = sqrt_cov * symplectic_form(n) * sqrt_cov;
  // K is antisymmetric with singular values {nu_i, nu_i}; SVD keeps the
  // small eigenvalues at full absolute accuracy (squaring K would not).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  std::vector<double> nus;
  for (int i = 0; i < n; ++i) {
    nus.push_back(svd.singularValues()(2 * i + 1));
  }
  std::sort(nus.begin(), nus.end());
  return nus;
}

}  // namespace

int GaussianState::index_of(const std::string& label) const {
  for (int i = 0; i < num_modes(); ++i) {
    if (modes[i] == label) return i;
  }
  throw std::invalid_argument("GaussianState: unknown mode label '" + label +
                              "'");
}

Eigen::MatrixXd GaussianState::covariance() const {
  const int n = num_modes();
  Eigen::MatrixXd cov(2 * n, 2 * n);
  cov.topLeftCorner(n, n) = Qb;
  cov.bottomRightCorner(n, n) = Pb;
  cov.topRightCorner(n, n) = Rb.transpose();  // <q_i, p_j> = Rb_{ji}
  cov.bottomLeftCorner(n, n) = Rb;
  return cov;
}

Eigen::VectorXd GaussianState::mean() const {
  const int n = num_modes();
  Eigen::VectorXd m(2 * n);
  m.head(n) = mean_q;
  m.tail(n) = mean_p;
  return m;
}

GaussianState GaussianState::from_covariance(std::vector<std::string> modes,
                                             const Eigen::VectorXd& mean,
                                             const Eigen::MatrixXd& cov,
                                             double hbar) {
  const int n = static_cast<int>(modes.size());
  GaussianState s;
  s.modes = std::move(modes);
  s.hbar = hbar;
  s.mean_q = mean.head(n);
  s.mean_p = mean.tail(n);
  s.Qb = cov.topLeftCorner(n, n);
  s.Pb = cov.bottomRightCorner(n, n);
  s.Rb = cov.bottomLeftCorner(n, n);
  return s;
}

void GaussianState::validate(double slack) const {
  const auto nus = symplectic_eigenvalues(*this);
  if (!nus.empty() && nus.front() < 0.5 * hbar - slack) {
    throw InvalidState(
        "GaussianState: uncertainty violated (nu_min = " +
        std::to_string(nus.front()) + " < hbar/2 = " + std::to_string(0.5 * hbar) +
        ")");
  }
}

GaussianState GaussianState::vacuum(std::vector<std::string> modes,
                                    double hbar) {
  const int n = static_cast<int>(modes.size());
  GaussianState s;
  s.modes = std::move(modes);
  s.hbar = hbar;
  s.mean_q = Eigen::VectorXd::Zero(n);
  s.mean_p = Eigen::VectorXd::Zero(n);
  s.Qb = 0.5 * hbar * Eigen::MatrixXd::Identity(n, n);
  s.Pb = 0.5 * hbar * Eigen::MatrixXd::Identity(n, n);
  s.Rb = Eigen::MatrixXd::Zero(n, n);
  return s;
}

GaussianState GaussianState::coherent(const std::string& mode,
                                      std::complex<double> alpha,
                                      double hbar) {
  GaussianState s = vacuum({mode}, hbar);
  const double c = std::sqrt(2.0 * hbar);
  s.mean_q(0) = c * alpha.real();
  s.mean_p(0) = c * alpha.imag();
  return s;
}

GaussianState GaussianState::thermal(const std::string& mode, double nbar,
                                     double hbar) {
  GaussianState s = vacuum({mode}, hbar);
  s.Qb(0, 0) = hbar * (nbar + 0.5);
  s.Pb(0, 0) = hbar * (nbar + 0.5);
  return s;
}

GaussianState GaussianState::two_mode_squeezed(const std::string& m0,
                                               const std::string& m1, double r,
                                               double hbar) {
  GaussianState s = vacuum({m0, m1}, hbar);
  const double c = 0.5 * hbar * std::cosh(2.0 * r);
  const double sn = 0.5 * hbar * std::sinh(2.0 * r);
  s.Qb << c, sn, sn, c;
  s.Pb << c, -sn, -sn, c;
  return s;
}

GaussianState reduce(const GaussianState& state,
                     const std::vector<std::string>& keep) {
  if (keep.empty()) {
    throw std::invalid_argument("reduce: keep set must be nonempty");
  }
  std::vector<int> idx;
  for (const auto& label : keep) idx.push_back(state.index_of(label));
  const int k = static_cast<int>(idx.size());
  GaussianState out;
  out.modes = keep;
  out.hbar = state.hbar;
  out.mean_q.resize(k);
  out.mean_p.resize(k);
  out.Qb.resize(k, k);
  out.Pb.resize(k, k);
  out.Rb.resize(k, k);
  for (int i = 0; i < k; ++i) {
    out.mean_q(i) = state.mean_q(idx[i]);
    out.mean_p(i) = state.mean_p(idx[i]);
    for (int j = 0; j < k; ++j) {
      out.Qb(i, j) = state.Qb(idx[i], idx[j]);
      out.Pb(i, j) = state.Pb(idx[i], idx[j]);
      out.Rb(i, j) = state.Rb(idx[i], idx[j]);
    }
  }
  return out;
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
  return symplectic_spectrum(state.covariance(), state.hbar);
}

double log_negativity_signed(const GaussianState& state,
                             const std::vector<std::string>& part_a) {
  const int n = state.num_modes();
  if (part_a.empty() || static_cast<int>(part_a.size()) >= n) {
    throw std::invalid_argument(
        "log_negativity: partition must be a proper nonempty subset");
  }
  std::vector<bool> in_a(n, false);
  for (const auto& label : part_a) in_a[state.index_of(label)] = true;

  // Partial transpose = momentum sign flip on the complement of part_a.
  Eigen::VectorXd flip(2 * n);
  for (int i = 0; i < n; ++i) {
    flip(i) = 1.0;
    flip(n + i) = in_a[i] ? 1.0 : -1.0;
  }
  Eigen::MatrixXd cov = flip.asDiagonal() * state.covariance() *
                        flip.asDiagonal();
  const auto nus = symplectic_spectrum(cov, state.hbar);
  return -std::log2(2.0 * nus.front() / state.hbar);
}

double log_negativity(const GaussianState& state,
                      const std::vector<std::string>& part_a) {
  const int n = state.num_modes();
  if (part_a.empty() || static_cast<int>(part_a.size()) >= n) {
    throw std::invalid_argument(
        "log_negativity: partition must be a proper nonempty subset");
  }
  std::vector<bool> in_a(n, false);
  for (const auto& label : part_a) in_a[state.index_of(label)] = true;
  Eigen::VectorXd flip(2 * n);
  for (int i = 0; i < n; ++i) {
    flip(i) = 1.0;
    flip(n + i) = in_a[i] ? 1.0 : -1.0;
  }
  Eigen::MatrixXd cov = flip.asDiagonal() * state.covariance() *
                        flip.asDiagonal();
  double en = 0.0;
  for (double nu : symplectic_spectrum(cov, state.hbar)) {
    en += std::max(0.0, -std::log2(2.0 * nu / state.hbar));
  }
  return en;
}

Eigen::MatrixXd two_mode_squeezed_covariance(double r, double hbar) {
  const double c = 0.5 * hbar * std::cosh(2.0 * r);
  const double sn = 0.5 * hbar * std::sinh(2.0 * r);
  Eigen::MatrixXd cov(4, 4);
  cov << c, sn, 0, 0,
         sn, c, 0, 0,
         0, 0, c, -sn,
         0, 0, -sn, c;
  return cov;
}

GaussianState condition_on_measurement(
    const GaussianState& state,
    const std::pair<std::string, std::string>& measured,
    const Eigen::MatrixXd& meas_covariance, std::complex<double> outcome) {
  const int n = state.num_modes();
  const int ma = state.index_of(measured.first);
  const int mb = state.index_of(measured.second);
  if (ma == mb) {
    throw std::invalid_argument("condition_on_measurement: repeated mode");
  }
  if (meas_covariance.rows() != 4 || meas_covariance.cols() != 4) {
    throw std::invalid_argument(
        "condition_on_measurement: meas_covariance must be 4x4");
  }
  {
    // POVM covariance must itself be a valid state covariance; the slack
    // scales with its norm (strong squeezing costs absolute accuracy).
    GaussianState probe = GaussianState::from_covariance(
        {"m1", "m2"}, Eigen::VectorXd::Zero(4), meas_covariance, state.hbar);
    probe.validate(1e-9 *
                   (state.hbar + meas_covariance.cwiseAbs().maxCoeff()));
  }

  std::vector<int> kept;
  for (int i = 0; i < n; ++i) {
    if (i != ma && i != mb) kept.push_back(i);
  }
  if (kept.empty()) {
    throw std::invalid_argument(
        "condition_on_measurement: no modes left after measurement");
  }
  const int k = static_cast<int>(kept.size());

  // Index maps into the (q..., p...) covariance.
  auto qi = [&](int mode) { return mode; };
  auto pi = [&](int mode) { return n + mode; };
  std::vector<int> kidx, midx;
  for (int i : kept) kidx.push_back(qi(i));
  for (int i : kept) kidx.push_back(pi(i));
  midx = {qi(ma), qi(mb), pi(ma), pi(mb)};

  const Eigen::MatrixXd cov = state.covariance();
  const Eigen::VectorXd mu = state.mean();
  Eigen::MatrixXd s_kk(2 * k, 2 * k), s_km(2 * k, 4), s_mm(4, 4);
  Eigen::VectorXd mu_k(2 * k), mu_m(4);
  for (int i = 0; i < 2 * k; ++i) {
    mu_k(i) = mu(kidx[i]);
    for (int j = 0; j < 2 * k; ++j) s_kk(i, j) = cov(kidx[i], kidx[j]);
    for (int j = 0; j < 4; ++j) s_km(i, j) = cov(kidx[i], midx[j]);
  }
  for (int i = 0; i < 4; ++i) {
    mu_m(i) = mu(midx[i]);
    for (int j = 0; j < 4; ++j) s_mm(i, j) = cov(midx[i], midx[j]);
  }

  Eigen::MatrixXd s_sum = s_mm + meas_covariance;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(s_sum);
  if (!lu.isInvertible()) {
    throw DegenerateMeasurement(
        "condition_on_measurement: singular conditioning matrix");
  }
  const Eigen::MatrixXd w = s_km * lu.inverse();

  // Outcome beta displaces the second measured mode of the POVM family.
  Eigen::VectorXd mu_povm = Eigen::VectorXd::Zero(4);
  const double c = std::sqrt(2.0 * state.hbar);
  mu_povm(1) = c * outcome.real();
  mu_povm(3) = c * outcome.imag();

  Eigen::MatrixXd cov_out = s_kk - w * s_km.transpose();
  Eigen::VectorXd mu_out = mu_k + w * (mu_povm - mu_m);

  std::vector<std::string> kept_labels;
  for (int i : kept) kept_labels.push_back(state.modes[i]);
  return GaussianState::from_covariance(kept_labels, mu_out, cov_out,
                                        state.hbar);
}

GaussianState displace(const GaussianState& state, const std::string& mode,
                       std::complex<double> beta) {
  GaussianState out = state;
  const int i = state.index_of(mode);
  const double c = std::sqrt(2.0 * state.hbar);
  out.mean_q(i) += c * beta.real();
  out.mean_p(i) += c * beta.imag();
  return out;
}

double fidelity_vs_coherent(const GaussianState& state,
                            std::complex<double> alpha) {
  if (state.num_modes() != 1) {
    throw InvalidState("fidelity_vs_coherent: expects a single-mode state");
  }
  const double hbar = state.hbar;
  Eigen::Matrix2d sigma;
  sigma << state.Qb(0, 0), state.Rb(0, 0), state.Rb(0, 0), state.Pb(0, 0);
  Eigen::Matrix2d total = sigma + 0.5 * hbar * Eigen::Matrix2d::Identity();
  const double det = total.determinant();
  if (!(det > 0.0)) {
    throw InvalidState("fidelity_vs_coherent: invalid covariance");
  }
  const double c = std::sqrt(2.0 * hbar);
  Eigen::Vector2d dmu(state.mean_q(0) - c * alpha.real(),
                      state.mean_p(0) - c * alpha.imag());
  const double expo = -0.5 * dmu.dot(total.inverse() * dmu);
  return hbar / std::sqrt(det) * std::exp(expo);
}

double excited_population(double qq, double pp, double pq, double m0,
                          double omega_r, double hbar) {
  const double det = pp * qq - pq * pq;
  const double bound = 0.25 * hbar * hbar;
  if (det < bound * (1.0 - 1e-12) - 1e-300) {
    throw UncertaintyViolation(
        "excited_population: correlators violate the uncertainty relation");
  }
  const double num = hbar * (det - bound);
  const double den_base =
      (pp + 0.5 * hbar * m0 * omega_r) * (qq + 0.5 * hbar / (m0 * omega_r)) -
      pq * pq;
  return num / std::pow(den_base, 1.5);
}

}  // namespace udw
