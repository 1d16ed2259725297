#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace ipdiff {

/// Parameters of the modulation process  d mu = -(A/delta) mu dt + (sqrt(Lambda)/delta) dW.
///
/// A must be symmetric positive definite, Lambda symmetric positive
/// semi-definite, and the two must commute. They are diagonalised jointly at
/// construction, so stepping works on independent scalar modes.
class OUParams {
 public:
  OUParams(Eigen::MatrixXd drift, Eigen::MatrixXd noise, double delta);

  /// Scalar process with A = alpha and Lambda = lambda^2.
  static OUParams scalar(double alpha, double lambda, double delta);

  /// Diagonal A = diag(alpha), Lambda = diag(lambda^2).
  static OUParams diagonal(const std::vector<double>& alpha, const std::vector<double>& lambda,
                           double delta);

  int dim() const { return static_cast<int>(drift_.rows()); }
  const Eigen::MatrixXd& A() const { return drift_; }
  const Eigen::MatrixXd& Lambda() const { return noise_; }
  double delta() const { return delta_; }

  /// Orthogonal Q with Q^T A Q and Q^T Lambda Q diagonal.
  const Eigen::MatrixXd& basis() const { return basis_; }
  bool identity_basis() const { return identity_basis_; }
  const Eigen::VectorXd& drift_eigenvalues() const { return drift_eig_; }
  const Eigen::VectorXd& noise_eigenvalues() const { return noise_eig_; }

  OUParams with_delta(double delta) const;

 private:
  Eigen::MatrixXd drift_;
  Eigen::MatrixXd noise_;
  double delta_;
  Eigen::MatrixXd basis_;
  bool identity_basis_ = true;
  Eigen::VectorXd drift_eig_;
  Eigen::VectorXd noise_eig_;
};

/// C solving A C + C A = Lambda / delta.
Eigen::MatrixXd stationary_covariance(const OUParams& p);

/// Exact transition of the OU process over a fixed step dt.
class OUStepper {
 public:
  OUStepper(const OUParams& p, double dt);

  /// In place: mu <- E mu + S g, with g holding dim() standard normals.
  void step(double* mu, const double* gauss) const;

  /// mu <- S_inf g, a draw from the stationary law.
  void sample_stationary(double* mu, const double* gauss) const;

  int dim() const { return static_cast<int>(decay_.size()); }

  /// E = exp(-A dt / delta).
  Eigen::MatrixXd decay_matrix() const;
  /// Covariance of mu' given mu: C_inf - E C_inf E^T.
  Eigen::MatrixXd conditional_covariance() const;

 private:
  Eigen::MatrixXd basis_;
  bool identity_basis_;
  std::vector<double> decay_;        // per eigenmode
  std::vector<double> step_scale_;   // sqrt(c_i (1 - e_i^2))
  std::vector<double> stat_scale_;   // sqrt(c_i)
};

Eigen::VectorXd ou_exact_step(const Eigen::VectorXd& mu, double dt, const OUParams& p,
                              std::span<const double> gauss);

Eigen::VectorXd sample_stationary(const OUParams& p, std::span<const double> gauss);

}  // namespace ipdiff
