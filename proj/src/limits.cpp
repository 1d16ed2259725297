#include "ipdiff/limits.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "ipdiff/rng.hpp"

namespace ipdiff {

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Tau: return "tau";
    case SweepAxis::Sigma: return "sigma";
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::Delta: return "delta";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "tau") return SweepAxis::Tau;
  if (name == "sigma") return SweepAxis::Sigma;
  if (name == "alpha") return SweepAxis::Alpha;
  if (name == "lambda") return SweepAxis::Lambda;
  if (name == "delta") return SweepAxis::Delta;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep axis has no values");
  for (double v : values) {
    const bool ok = axis == SweepAxis::Tau ? v >= 0.0 : v > 0.0;
    if (!ok || !std::isfinite(v))
      throw ConfigError("sweep value " + std::to_string(v) + " out of range for axis " + std::string(to_string(axis)));
  }
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw ConfigError("window_fraction must lie in (0, 1]");
}

std::vector<ModelKind> SweepSpec::resolved_kinds() const {
  std::vector<ModelKind> out = kinds.empty() ? std::vector<ModelKind>{base.model.kind} : kinds;
  if (paired_models) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const ModelKind p = partner_of(out[i]);
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

RunConfig apply_axis(const RunConfig& base, SweepAxis axis, double value, ModelKind kind) {
  RunConfig cfg = base;
  cfg.model.kind = kind;
  const OUParams& ou = base.model.ou;
  const int n = ou.dim();
  switch (axis) {
    case SweepAxis::Tau:
      if (value == 0.0) {
        cfg.model.kind = tracer_of(kind);
      } else {
        cfg.model.kind = inertial_of(kind);
        cfg.model.tau = value;
      }
      break;
    case SweepAxis::Sigma: cfg.model.sigma = value; break;
    case SweepAxis::Alpha:
      cfg.model.ou = OUParams(value * Eigen::MatrixXd::Identity(n, n), ou.Lambda(), ou.delta());
      break;
    case SweepAxis::Lambda:
      cfg.model.ou = OUParams(ou.A(), value * value * Eigen::MatrixXd::Identity(n, n), ou.delta());
      break;
    case SweepAxis::Delta: cfg.model.ou = ou.with_delta(value); break;
  }
  return cfg;
}

namespace {

SweepRow run_point(const SweepSpec& spec, double value, ModelKind kind, int workers) {
  const RunConfig cfg = apply_axis(spec.base, spec.axis, value, kind);
  SweepRow row;
  row.value = value;
  row.kind = cfg.model.kind;
  row.tau = cfg.model.effective_tau();
  row.sigma = cfg.model.sigma;
  row.reference = 0.5 * cfg.model.sigma * cfg.model.sigma;
  try {
    auto res = run_ensemble(cfg, workers);
    row.estimate = estimate_K(res.stats, spec.window_fraction);
    row.warnings = std::move(res.warnings);
  } catch (const NumericalError& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  spec.base.validate();
  const auto kinds = spec.resolved_kinds();
  std::vector<std::pair<double, ModelKind>> grid;
  for (double v : spec.values)
    for (ModelKind k : kinds) grid.emplace_back(v, k);
  // Surface configuration problems before any work is done.
  for (const auto& [v, k] : grid) apply_axis(spec.base, spec.axis, v, k).validate();

  std::vector<SweepRow> rows(grid.size());
  const int workers = spec.workers > 0 ? spec.workers : omp_get_max_threads();
  if (spec.concurrent_points && workers > 1 && grid.size() > 1) {
    const int outer = std::min<int>(workers, static_cast<int>(grid.size()));
    const int inner = std::max(1, workers / outer);
    omp_set_max_active_levels(2);
#pragma omp parallel for schedule(dynamic, 1) num_threads(outer)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i)
      rows[i] = run_point(spec, grid[i].first, grid[i].second, inner);
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) rows[i] = run_point(spec, grid[i].first, grid[i].second, workers);
  }
  return rows;
}

RateFit fit_rate(const std::vector<double>& deltas, const std::vector<double>& diffs,
                 const std::vector<double>& ses, std::uint64_t seed, int replicates) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    if (std::abs(diffs[i]) > 3.0 * ses[i]) idx.push_back(i);
  RateFit fit;
  fit.points = idx.size();
  if (idx.size() < 2) return fit;

  // Weighted slope of y on x with weights w; returns {slope, slope variance}.
  auto wls = [&](const std::vector<double>& y) {
    double sw = 0, sx = 0, sy = 0;
    std::vector<double> w(idx.size()), x(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const std::size_t i = idx[j];
      const double sy_log = ses[i] / std::abs(diffs[i]);  // delta method on log|diff|
      w[j] = 1.0 / (sy_log * sy_log);
      x[j] = std::log(deltas[i]);
      sw += w[j];
      sx += w[j] * x[j];
      sy += w[j] * y[j];
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      sxx += w[j] * (x[j] - xm) * (x[j] - xm);
      sxy += w[j] * (x[j] - xm) * (y[j] - ym);
    }
    return std::pair{sxy / sxx, 1.0 / sxx};
  };

  std::vector<double> y(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) y[j] = std::log(std::abs(diffs[idx[j]]));
  const auto [slope, var] = wls(y);
  fit.resolved = true;
  fit.rate = slope;
  fit.rate_se = std::sqrt(var);

  RandomStream rng(seed, StreamDomain::Bootstrap, 0);
  std::vector<double> boot;
  boot.reserve(replicates);
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const std::size_t i = idx[j];
      const double sample = std::abs(diffs[i] + ses[i] * rng.normal());
      y[j] = std::log(std::max(sample, 1e-300));
    }
    boot.push_back(wls(y).first);
  }
  std::sort(boot.begin(), boot.end());
  fit.ci_lo = boot[static_cast<std::size_t>(0.025 * (replicates - 1))];
  fit.ci_hi = boot[static_cast<std::size_t>(0.975 * (replicates - 1))];
  return fit;
}

LimitStudy white_noise_limit_study(const std::vector<double>& deltas, const RunConfig& base,
                                   double window_fraction, int workers) {
  if (deltas.empty()) throw ConfigError("delta study needs at least one delta");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw ConfigError("delta values must be positive");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw ConfigError("delta values must be strictly decreasing");
  }
  if (base.dt > deltas.back() / 20.0 * (1.0 + 1e-12))
    throw ConfigError("delta study requires dt <= min(delta)/20");

  const ModelKind colored = is_colored(base.model.kind) ? base.model.kind : partner_of(base.model.kind);
  LimitStudy study;

  RunConfig wcfg = base;
  wcfg.model.kind = partner_of(colored);
  auto wres = run_ensemble(wcfg, workers);
  study.white = estimate_K(wres.stats, window_fraction);
  study.warnings = wres.warnings;

  std::vector<double> diffs, ses;
  for (double delta : deltas) {
    RunConfig ccfg = base;
    ccfg.model.kind = colored;
    ccfg.model.ou = base.model.ou.with_delta(delta);
    auto res = run_ensemble(ccfg, workers);
    for (auto& w : res.warnings) study.warnings.push_back(std::move(w));
    LimitPoint p;
    p.delta = delta;
    p.colored = estimate_K(res.stats, window_fraction);
    p.diff = p.colored.isotropic() - study.white.isotropic();
    p.diff_se = std::hypot(p.colored.isotropic_se(), study.white.isotropic_se());
    p.resolved = std::abs(p.diff) > 3.0 * p.diff_se;
    diffs.push_back(p.diff);
    ses.push_back(p.diff_se);
    study.points.push_back(std::move(p));
  }

  study.non_increasing = true;
  for (std::size_t i = 1; i < study.points.size(); ++i) {
    const auto& a = study.points[i - 1];
    const auto& b = study.points[i];
    if (std::abs(b.diff) - std::abs(a.diff) > 3.0 * std::hypot(a.diff_se, b.diff_se)) study.non_increasing = false;
  }
  study.converged = !study.points.back().resolved;
  study.fit = fit_rate(deltas, diffs, ses, base.seed);
  return study;
}

}  // namespace ipdiff
