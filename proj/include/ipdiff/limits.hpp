#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipdiff/diffusivity.hpp"
#include "ipdiff/ensemble.hpp"

namespace ipdiff {

enum class SweepAxis { Tau, Sigma, Alpha, Lambda, Delta };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepSpec {
  RunConfig base;
  SweepAxis axis = SweepAxis::Sigma;
  std::vector<double> values;
  /// Also run the colored/white partner of every kind.
  bool paired_models = false;
  /// Model kinds per grid point; empty means base.model.kind.
  std::vector<ModelKind> kinds;
  double window_fraction = 0.5;
  int workers = 0;
  /// Run grid points concurrently, splitting the workers between them.
  bool concurrent_points = false;

  void validate() const;
  std::vector<ModelKind> resolved_kinds() const;
};

/// Base config with one axis value applied. On the tau axis a value of 0
/// selects the tracer counterpart of `kind`; alpha and lambda set the OU
/// diagonals to alpha * I and lambda^2 * I.
RunConfig apply_axis(const RunConfig& base, SweepAxis axis, double value, ModelKind kind);

struct SweepRow {
  double value = 0.0;
  ModelKind kind = ModelKind::ColoredInertial;
  double tau = 0.0;  // effective tau of the point
  double sigma = 0.0;
  /// Free-particle reference sigma^2 / 2.
  double reference = 0.0;
  std::optional<DiffusivityEstimate> estimate;
  std::string error;
  std::vector<std::string> warnings;
};

/// One ensemble per (value, kind). Every point reuses the base seed, so
/// neighbouring points share random numbers and the curves are smooth in the
/// axis variable. A numerical failure is recorded on its row and the sweep
/// continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

struct RateFit {
  bool resolved = false;
  double rate = 0.0;
  double rate_se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t points = 0;
};

/// Weighted least-squares fit of log|diff| = c + p log(delta) over the points
/// with |diff| > 3 se, with a 95% parametric-bootstrap interval for p.
/// Fewer than two such points leaves the rate unresolved.
RateFit fit_rate(const std::vector<double>& deltas, const std::vector<double>& diffs,
                 const std::vector<double>& ses, std::uint64_t seed, int replicates = 2000);

struct LimitPoint {
  double delta = 0.0;
  DiffusivityEstimate colored;
  double diff = 0.0;     // K_col - K_white on the isotropic part
  double diff_se = 0.0;  // combined standard error
  bool resolved = false;
};

struct LimitStudy {
  std::vector<LimitPoint> points;
  DiffusivityEstimate white;
  RateFit fit;
  /// |diff| never grows by more than 3 combined standard errors as delta shrinks.
  bool non_increasing = false;
  /// Smallest-delta colored estimate within 3 combined SE of the white one.
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Colored model at each delta (positive, strictly decreasing) against the
/// white-noise model run once. Requires dt <= min(deltas) / 20.
LimitStudy white_noise_limit_study(const std::vector<double>& deltas, const RunConfig& base,
                                   double window_fraction = 0.5, int workers = 0);

}  // namespace ipdiff
