#include "ipdiff/commands.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ipdiff/report.hpp"
#include "ipdiff/rng.hpp"
#include "ipdiff/verify.hpp"

namespace ipdiff {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ofstream open_output(const Config& cfg, const std::string& suffix) {
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / (cfg.name + "_" + suffix);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

void write_json(const Config& cfg, const std::string& suffix, const nlohmann::json& j) {
  open_output(cfg, suffix) << j.dump(2) << '\n';
}

int workers_of(const Config& cfg) { return cfg.workers > 0 ? cfg.workers : omp_get_max_threads(); }

nlohmann::json header(const Config& cfg, double elapsed, const std::vector<std::string>& warnings) {
  return {{"config", config_echo(cfg)},
          {"seed", cfg.run.seed},
          {"workers", workers_of(cfg)},
          {"metadata", run_metadata(elapsed)},
          {"warnings", warnings}};
}

EstimateRowContext context_of(const RunConfig& run) {
  EstimateRowContext ctx;
  ctx.kind = run.model.kind;
  ctx.tau = run.model.effective_tau();
  ctx.sigma = run.model.sigma;
  ctx.delta = run.model.ou.delta();
  ctx.amplitude = run.model.flow.amplitude();
  ctx.reference = 0.5 * run.model.sigma * run.model.sigma;
  return ctx;
}

nlohmann::json check(const std::string& name, bool hard, bool passed, nlohmann::json details) {
  return {{"name", name}, {"hard", hard}, {"passed", passed}, {"details", std::move(details)}};
}

}  // namespace

int cmd_simulate(const Config& cfg, std::ostream& log) {
  const auto t0 = Clock::now();
  const auto res = run_ensemble(cfg.run, workers_of(cfg));
  const auto est = estimate_K(res.stats, cfg.window_fraction);
  const int d = cfg.run.model.dim_d();

  {
    auto out = open_output(cfg, "estimate.csv");
    write_estimate_header(out, d);
    write_estimate_row(out, d, context_of(cfg.run), &est);
  }
  {
    auto out = open_output(cfg, "ktrace.csv");
    write_ktrace_csv(out, res.stats);
  }
  write_json(cfg, "stats.json", res.stats.to_json());
  if (!res.trajectories.empty()) {
    auto out = open_output(cfg, "trajectories.csv");
    write_trajectories_csv(out, res.trajectories, res.stats.times(), d, cfg.run.model.dim_n());
  }

  nlohmann::json summary = header(cfg, seconds_since(t0), res.warnings);
  summary["estimate"] = est.to_json();
  summary["free_particle_reference"] = 0.5 * cfg.run.model.sigma * cfg.run.model.sigma;
  summary["min_eigenvalue_K_sym"] = min_eigenvalue(est.K_sym, d);
  if (d == 2) {
    const auto sym = symmetry_check(est);
    summary["symmetry"] = {{"diag_equal", sym.diag_equal},
                           {"offdiag_zero", sym.offdiag_zero},
                           {"diag_gap", sym.diag_gap},
                           {"diag_gap_se", sym.diag_gap_se}};
  }
  write_json(cfg, "summary.json", summary);

  for (const auto& w : res.warnings) log << "warning: " << w << '\n';
  log << "K11 = " << format_real(est.k(0, 0)) << " +- " << format_real(est.se(0, 0));
  if (d > 1) log << ", K22 = " << format_real(est.k(1, 1)) << " +- " << format_real(est.se(1, 1));
  log << " (sigma^2/2 = " << format_real(0.5 * cfg.run.model.sigma * cfg.run.model.sigma) << ")\n";
  return kExitOk;
}

int cmd_sweep(const Config& cfg, std::ostream& log) {
  if (!cfg.sweep) throw ConfigError("missing required section [sweep]");
  const auto& sw = *cfg.sweep;
  if (sw.values.empty()) throw ConfigError("[sweep] has an empty value list");
  const auto t0 = Clock::now();

  if (sw.study == StudyKind::WhiteNoiseLimit) {
    const auto study = white_noise_limit_study(sw.values, cfg.run, cfg.window_fraction, workers_of(cfg));
    {
      auto out = open_output(cfg, "limit.csv");
      write_limit_csv(out, study);
    }
    nlohmann::json j = header(cfg, seconds_since(t0), study.warnings);
    j["study"] = limit_study_json(study);
    j["random_numbers"] = "common: every ensemble reuses the master seed";
    write_json(cfg, "limit.json", j);
    for (const auto& p : study.points)
      log << "delta " << format_real(p.delta) << ": K_col - K_white = " << format_real(p.diff) << " +- "
          << format_real(p.diff_se) << '\n';
    log << "rate: " << (study.fit.resolved ? format_real(study.fit.rate) : std::string("unresolved")) << '\n';
    return kExitOk;
  }

  std::ofstream csv = open_output(cfg, "sweep.csv");
  write_estimate_header(csv, cfg.run.model.dim_d());
  std::vector<std::string> warnings;
  nlohmann::json points = nlohmann::json::array();
  for (SweepAxis axis : sw.axes) {
    SweepSpec spec;
    spec.base = cfg.run;
    spec.axis = axis;
    spec.values = sw.values;
    spec.kinds = sw.kinds;
    spec.paired_models = sw.paired_models;
    spec.concurrent_points = sw.concurrent_points;
    spec.window_fraction = cfg.window_fraction;
    spec.workers = workers_of(cfg);
    const auto rows = run_sweep(spec);
    write_sweep_rows(csv, spec, rows);
    for (const auto& r : rows) {
      for (const auto& w : r.warnings) warnings.push_back(w);
      nlohmann::json p = {{"axis", to_string(axis)}, {"value", r.value}, {"kind", to_string(r.kind)},
                          {"reference", r.reference}};
      if (r.estimate) p["estimate"] = r.estimate->to_json();
      if (!r.error.empty()) p["error"] = r.error;
      points.push_back(std::move(p));
      log << to_string(axis) << " = " << format_real(r.value) << " " << to_string(r.kind) << ": "
          << (r.estimate ? "K = " + format_real(r.estimate->isotropic()) : "failed: " + r.error) << '\n';
    }
  }
  nlohmann::json j = header(cfg, seconds_since(t0), warnings);
  j["points"] = std::move(points);
  j["random_numbers"] = "common: every grid point reuses the master seed";
  write_json(cfg, "sweep.json", j);
  return kExitOk;
}

int cmd_validate(const Config& cfg, std::ostream& log) {
  const auto t0 = Clock::now();
  const auto& m = cfg.run.model;
  const auto& v = cfg.validate;
  nlohmann::json checks = nlohmann::json::array();

  const auto parity = check_parity(m.flow, v.parity_samples, v.parity_tol);
  checks.push_back(check("parity", false, parity.passes, {{"max_violation", parity.max_violation}}));

  const auto div = check_divergence_free(m.flow, v.divergence_grid, v.divergence_tol);
  checks.push_back(check("divergence_free", true, div.passes, {{"max_divergence", div.max_divergence}}));

  if (is_inertial(m.kind)) {
    RandomStream rng(cfg.run.seed, StreamDomain::Synthetic, 1);
    int min_rank = 2 * m.dim_d() + m.dim_n();
    bool all_full = true;
    for (std::size_t i = 0; i < v.rank_points; ++i) {
      std::vector<double> z(m.dim_d()), mu(m.dim_n());
      for (int a = 0; a < m.dim_d(); ++a) z[a] = rng.uniform() * m.flow.period()[a];
      for (auto& x : mu) x = rng.normal();
      const auto r = check_hypoellipticity_rank(m, z, mu);
      min_rank = std::min(min_rank, r.rank);
      all_full = all_full && r.full;
    }
    checks.push_back(check("hypoellipticity_rank", true, all_full,
                           {{"points", v.rank_points}, {"min_rank", min_rank}, {"target", 2 * m.dim_d() + m.dim_n()}}));
  }

  if (m.kind == ModelKind::ColoredInertial) {
    const auto spec = LyapunovSpec::textbook(m);
    const auto r = lyapunov_drift_check(m, spec, v.lyapunov_samples, v.lyapunov_radius, cfg.run.seed);
    nlohmann::json det = {{"samples", r.samples},
                          {"radius", v.lyapunov_radius},
                          {"coeff_y", spec.coeff_y},
                          {"coeff_mu", spec.coeff_mu},
                          {"fitted_beta", r.fitted_beta},
                          {"textbook_beta", spec.beta},
                          {"textbook_beta_holds_on_samples", r.passes},
                          {"textbook_beta_holds", r.analytic_sup ? *r.analytic_sup <= spec.beta : r.passes}};
    if (r.analytic_sup) det["analytic_sup"] = *r.analytic_sup;
    checks.push_back(check("lyapunov_drift", true, std::isfinite(r.fitted_beta), det));

    if (m.sigma > 0.0) {
      const auto c = centering_check(m, v.centering_burn_in, v.centering_horizon, cfg.run.seed, v.centering_dt);
      checks.push_back(check("centering", false, c.centered,
                             {{"mean_velocity_field", c.mean_velocity_field}, {"se", c.se}, {"horizon", c.horizon}}));
    }
  }

  bool ok = true;
  for (const auto& c : checks) {
    const bool hard = c["hard"].get<bool>(), passed = c["passed"].get<bool>();
    if (hard && !passed) ok = false;
    log << (passed ? "PASS " : (hard ? "FAIL " : "WARN ")) << c["name"].get<std::string>() << '\n';
  }
  nlohmann::json j = header(cfg, seconds_since(t0), {});
  j["checks"] = std::move(checks);
  j["passed"] = ok;
  write_json(cfg, "validate.json", j);
  return ok ? kExitOk : kExitCheckFailed;
}

int run_command(Command cmd, const std::string& config_path, const Overrides& overrides, std::ostream& log,
                std::ostream& err) {
  try {
    Config cfg = load_config(config_path);
    apply_overrides(cfg, overrides);
    switch (cmd) {
      case Command::Simulate: return cmd_simulate(cfg, log);
      case Command::Sweep: return cmd_sweep(cfg, log);
      case Command::Validate: return cmd_validate(cfg, log);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace ipdiff
