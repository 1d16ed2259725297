#pragma once

#include <nlohmann/json_fwd.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "ipdiff/diffusivity.hpp"
#include "ipdiff/limits.hpp"

namespace ipdiff {

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

/// Header of the estimate CSV for spatial dimension d. Column order:
/// axis, value, kind, tau, sigma, delta, amplitude, particles, t_lo, t_hi,
/// K<ab> (row-major), se<ab>, Ksym<ab> (a <= b), V<a>, V<a>_se,
/// drift_flagged, slope_diag, reference, error.
std::vector<std::string> estimate_columns(int d);

struct EstimateRowContext {
  std::string axis = "none";
  double value = 0.0;
  ModelKind kind = ModelKind::ColoredInertial;
  double tau = 0.0;
  double sigma = 0.0;
  double delta = 0.0;
  double amplitude = 0.0;
  double reference = 0.0;
  std::string error;
};

void write_estimate_header(std::ostream& out, int d);
/// With no estimate, numeric columns are left empty and `error` is filled.
void write_estimate_row(std::ostream& out, int d, const EstimateRowContext& ctx, const DiffusivityEstimate* est);

/// K(t) per checkpoint: t, count, K<ab>, se<ab>, mean_u2.
void write_ktrace_csv(std::ostream& out, const EnsembleStats& stats);

/// Header plus one estimate row per sweep point.
void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);
void write_sweep_rows(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// delta, K_col, K_col_se, K_white, K_white_se, diff, diff_se, resolved.
void write_limit_csv(std::ostream& out, const LimitStudy& study);

/// t-indexed state dumps: particle, t, x<a>, u<a>, mu<j>.
void write_trajectories_csv(std::ostream& out, const std::vector<TrajectoryDump>& dumps, const std::vector<double>& times,
                            int d, int n);

nlohmann::json limit_study_json(const LimitStudy& study);

/// Version, UTC wall-clock timestamp and elapsed seconds.
nlohmann::json run_metadata(double elapsed_seconds);

}  // namespace ipdiff
