#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ipdiff/diffusivity.hpp"
#include "ipdiff/dynamics.hpp"

namespace ipdiff {

/// V(z, y, mu) = 1 + coeff_y |y|^2 + coeff_mu |mu|^2 and the drift constant
/// beta in  L V <= -V + beta  for the fast system
///   dz = y dt,  dy = (F(z) mu - y)/tau dt + sigma/tau dB,  dmu = -A mu dt + sqrt(Lambda) dW.
struct LyapunovSpec {
  double coeff_y = 1.0;
  double coeff_mu = 1.0;
  double beta = 1.0;

  /// coeff_y = tau, coeff_mu = (tau^2 F^2 + 1) / (2 lambda_1) with F the sup
  /// norm of the flow and lambda_1 the smallest eigenvalue of A, and
  /// beta = sigma^2 d / 2 + tr(Lambda) / 2 + 1.
  static LyapunovSpec textbook(const ModelParams& m);
};

double lyapunov_V(const LyapunovSpec& spec, std::span<const double> y, std::span<const double> mu);

/// Closed-form generator of the fast system applied to V.
double lyapunov_generator(const ModelParams& m, const LyapunovSpec& spec, std::span<const double> z,
                          std::span<const double> y, std::span<const double> mu);

struct LyapunovResult {
  /// max over samples of L V + V - spec.beta; positive means the bound fails.
  double max_violation = 0.0;
  bool passes = false;
  /// max over samples of L V + V: the smallest beta that works on the samples.
  double fitted_beta = 0.0;
  /// Set when L V + V is a negative semi-definite quadratic in (y, mu) at every
  /// sampled z; the supremum over all (y, mu) is then its constant term.
  std::optional<double> analytic_sup;
  std::size_t samples = 0;
};

/// Samples z uniformly in the cell and y, mu uniformly in balls of `radius`.
/// The sample sequence for a seed is prefix-consistent, so more samples can
/// only raise the maxima.
LyapunovResult lyapunov_drift_check(const ModelParams& m, const LyapunovSpec& spec, std::size_t samples,
                                    double radius, std::uint64_t seed = 0);

struct LyapunovSample {
  std::vector<double> z, y, mu;
};
/// The i-th..(count-1)-th sample points used by lyapunov_drift_check.
std::vector<LyapunovSample> lyapunov_samples(const ModelParams& m, std::size_t count, double radius,
                                             std::uint64_t seed);

struct CenteringResult {
  std::vector<double> mean_velocity_field;
  std::vector<double> se;
  bool centered = false;
  double horizon = 0.0;
};

/// Time average of F(x(t)) mu(t) along one colored inertial trajectory after
/// burn_in, with a batch-means standard error.
CenteringResult centering_check(const ModelParams& m, double burn_in, double horizon, std::uint64_t seed,
                                double dt = 1e-3, int batches = 32);

struct SymmetryResult {
  bool diag_equal = false;
  bool offdiag_zero = false;
  double diag_gap = 0.0;
  double diag_gap_se = 0.0;
};

SymmetryResult symmetry_check(const DiffusivityEstimate& estimate);

}  // namespace ipdiff
