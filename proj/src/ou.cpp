#include "ipdiff/ou.hpp"

#include <cmath>
#include <stdexcept>

#include "ipdiff/common.hpp"

namespace ipdiff {

namespace {

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

OUParams::OUParams(Eigen::MatrixXd drift, Eigen::MatrixXd noise, double delta)
    : drift_(std::move(drift)), noise_(std::move(noise)), delta_(delta) {
  const Eigen::Index n = drift_.rows();
  if (n < 1 || n > kMaxDim || drift_.cols() != n || noise_.rows() != n || noise_.cols() != n)
    throw ConfigError("OU matrices must be square with matching size between 1 and 4");
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) throw ConfigError("OU delta must be positive");
  const double scale = std::max(1.0, drift_.norm() + noise_.norm());
  if ((drift_ - drift_.transpose()).norm() > 1e-12 * scale ||
      (noise_ - noise_.transpose()).norm() > 1e-12 * scale)
    throw ConfigError("OU matrices A and Lambda must be symmetric");

  if (is_diagonal(drift_) && is_diagonal(noise_)) {
    basis_ = Eigen::MatrixXd::Identity(n, n);
    identity_basis_ = true;
    drift_eig_ = drift_.diagonal();
    noise_eig_ = noise_.diagonal();
  } else {
    if ((drift_ * noise_ - noise_ * drift_).norm() > 1e-10 * scale * scale)
      throw ConfigError("OU matrices A and Lambda must commute");
    // A generic combination separates any shared eigenspaces of A.
    const double mix = 0.7071067811865476 * (drift_.norm() / std::max(noise_.norm(), 1e-300));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(drift_ + mix * noise_);
    basis_ = solver.eigenvectors();
    identity_basis_ = false;
    const Eigen::MatrixXd da = basis_.transpose() * drift_ * basis_;
    const Eigen::MatrixXd dl = basis_.transpose() * noise_ * basis_;
    drift_eig_ = da.diagonal();
    noise_eig_ = dl.diagonal();
    const double off = (da - Eigen::MatrixXd(drift_eig_.asDiagonal())).norm() +
                       (dl - Eigen::MatrixXd(noise_eig_.asDiagonal())).norm();
    if (off > 1e-9 * scale) throw ConfigError("OU matrices A and Lambda are not jointly diagonalisable");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(drift_eig_(i) > 0.0)) throw ConfigError("OU drift matrix A must be positive definite");
    if (noise_eig_(i) < -1e-12 * scale) throw ConfigError("OU noise matrix Lambda must be positive semi-definite");
    if (noise_eig_(i) < 0.0) noise_eig_(i) = 0.0;
  }
}

OUParams OUParams::scalar(double alpha, double lambda, double delta) {
  return diagonal({alpha}, {lambda}, delta);
}

OUParams OUParams::diagonal(const std::vector<double>& alpha, const std::vector<double>& lambda,
                            double delta) {
  if (alpha.size() != lambda.size() || alpha.empty())
    throw ConfigError("OU alpha and lambda lists must have the same non-zero length");
  const auto n = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n), l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = alpha[i];
    l(i, i) = lambda[i] * lambda[i];
  }
  return OUParams(a, l, delta);
}

OUParams OUParams::with_delta(double delta) const { return OUParams(drift_, noise_, delta); }

Eigen::MatrixXd stationary_covariance(const OUParams& p) {
  Eigen::VectorXd c(p.dim());
  for (int i = 0; i < p.dim(); ++i)
    c(i) = p.noise_eigenvalues()(i) / (2.0 * p.drift_eigenvalues()(i) * p.delta());
  if (p.identity_basis()) return c.asDiagonal();
  return p.basis() * c.asDiagonal() * p.basis().transpose();
}

OUStepper::OUStepper(const OUParams& p, double dt)
    : basis_(p.basis()), identity_basis_(p.identity_basis()) {
  if (!(dt > 0.0)) throw std::invalid_argument("OU step requires dt > 0");
  for (int i = 0; i < p.dim(); ++i) {
    const double rate = p.drift_eigenvalues()(i) / p.delta();
    const double c = p.noise_eigenvalues()(i) / (2.0 * rate * p.delta() * p.delta());
    const double e = std::exp(-rate * dt);
    decay_.push_back(e);
    // 1 - e^2 via expm1 keeps accuracy for small rate * dt.
    step_scale_.push_back(std::sqrt(c * -std::expm1(-2.0 * rate * dt)));
    stat_scale_.push_back(std::sqrt(c));
  }
}

void OUStepper::step(double* mu, const double* gauss) const {
  const int n = dim();
  if (identity_basis_) {
    for (int i = 0; i < n; ++i) mu[i] = decay_[i] * mu[i] + step_scale_[i] * gauss[i];
    return;
  }
  double nu[kMaxDim];
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += basis_(k, i) * mu[k];
    nu[i] = decay_[i] * v + step_scale_[i] * gauss[i];
  }
  for (int k = 0; k < n; ++k) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += basis_(k, i) * nu[i];
    mu[k] = v;
  }
}

void OUStepper::sample_stationary(double* mu, const double* gauss) const {
  const int n = dim();
  if (identity_basis_) {
    for (int i = 0; i < n; ++i) mu[i] = stat_scale_[i] * gauss[i];
    return;
  }
  for (int k = 0; k < n; ++k) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += basis_(k, i) * stat_scale_[i] * gauss[i];
    mu[k] = v;
  }
}

Eigen::MatrixXd OUStepper::decay_matrix() const {
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(decay_.data(), dim());
  return basis_ * e.asDiagonal() * basis_.transpose();
}

Eigen::MatrixXd OUStepper::conditional_covariance() const {
  Eigen::VectorXd s(dim());
  for (int i = 0; i < dim(); ++i) s(i) = step_scale_[i] * step_scale_[i];
  return basis_ * s.asDiagonal() * basis_.transpose();
}

Eigen::VectorXd ou_exact_step(const Eigen::VectorXd& mu, double dt, const OUParams& p,
                              std::span<const double> gauss) {
  if (mu.size() != p.dim() || static_cast<int>(gauss.size()) != p.dim())
    throw std::invalid_argument("ou_exact_step: dimension mismatch");
  OUStepper stepper(p, dt);
  Eigen::VectorXd out = mu;
  stepper.step(out.data(), gauss.data());
  return out;
}

Eigen::VectorXd sample_stationary(const OUParams& p, std::span<const double> gauss) {
  if (static_cast<int>(gauss.size()) != p.dim())
    throw std::invalid_argument("sample_stationary: dimension mismatch");
  OUStepper stepper(p, 1.0);
  Eigen::VectorXd out(p.dim());
  stepper.sample_stationary(out.data(), gauss.data());
  return out;
}

}  // namespace ipdiff
