#pragma once

#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "ipdiff/ensemble.hpp"

namespace ipdiff {

struct DriftEstimate {
  std::vector<double> V;
  std::vector<double> se;
  /// Some component exceeds three standard errors: the ensemble is not centered.
  bool flagged = false;
};

/// Plateau estimate of the effective diffusivity. Matrices are row-major d x d.
struct DiffusivityEstimate {
  int dim = 0;
  std::vector<double> K;
  std::vector<double> K_sym;
  std::vector<double> std_error;
  DriftEstimate drift;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t window_points = 0;
  /// Least-squares slope of K_11(t) over the window divided by K_11.
  double slope_diag = 0.0;
  std::uint64_t particles = 0;

  double k(int a, int b) const { return K[a * dim + b]; }
  double se(int a, int b) const { return std_error[a * dim + b]; }
  /// Mean of the diagonal and its standard error.
  double isotropic() const;
  double isotropic_se() const;

  nlohmann::json to_json() const;
};

/// Per-checkpoint Lagrangian estimate K(t) = Cov(x(t)) / (2t) and its
/// across-particle standard error.
struct KTrace {
  std::vector<double> t;
  std::vector<std::vector<double>> K;
  std::vector<std::vector<double>> se;
};
KTrace k_trace(const EnsembleStats& stats);

/// Averages K(t) over checkpoints with t >= (1 - window_fraction) * t_last,
/// weighting each by its inverse variance. The standard error propagates the
/// correlation between checkpoints as for Brownian displacements,
/// corr(K(t_j), K(t_k)) = t_j / t_k for t_j <= t_k.
DiffusivityEstimate estimate_K(const EnsembleStats& stats, double window_fraction = 0.5);

/// V = <x(t_hi)> / t_hi at the last checkpoint.
DriftEstimate estimate_drift(const EnsembleStats& stats);

/// (K + K^T) / 2 for a row-major d x d matrix.
std::vector<double> symmetrize(const std::vector<double>& K, int dim);

/// Smallest eigenvalue of a symmetric row-major d x d matrix.
double min_eigenvalue(const std::vector<double>& sym, int dim);

}  // namespace ipdiff
