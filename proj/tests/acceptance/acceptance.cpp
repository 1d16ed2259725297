// Acceptance suite: one PASS/FAIL line per criterion, exit status = number of
// failures. Every stochastic criterion uses the fixed seed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../support/generator_oracle.hpp"
#include "../support/synthetic.hpp"
#include "ipdiff/commands.hpp"
#include "ipdiff/report.hpp"
#include "ipdiff/rng.hpp"
#include "ipdiff/verify.hpp"

using namespace ipdiff;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 12345;
const fs::path kSource = IPDIFF_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Config preset(const std::string& name, bool desk) {
  Config c = load_config((kSource / "presets" / (name + ".ini")).string());
  Overrides o;
  o.desk_scale = desk;
  o.seed = kSeed;
  apply_overrides(c, o);
  return c;
}

DiffusivityEstimate estimate(const RunConfig& run) { return estimate_K(run_ensemble(run).stats); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome free_particle_limit() {
  const Config c = preset("free-particle", false);
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = estimate(c.run);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ref = 0.5 * c.run.model.sigma * c.run.model.sigma;
  bool ok = true;
  std::string d;
  for (int a = 0; a < 2; ++a) {
    const double k = est.k(a, a), se = est.se(a, a);
    ok = ok && std::abs(k - ref) <= 3 * se && std::abs(k - ref) <= 0.05 * ref;
    d += "K" + std::to_string(a + 1) + std::to_string(a + 1) + "=" + num(k) + "+-" + num(se) + " ";
  }
  return {ok, d + "ref=" + num(ref) + " N=" + std::to_string(c.run.particles) + " t=" + num(c.run.t_final) +
                  " runtime=" + num(secs) + "s"};
}

Outcome estimator_oracle() {
  const auto times = default_checkpoints(100.0, 1e-3, 64);
  int passed = 0;
  for (int r = 0; r < 100; ++r) {
    const auto est = estimate_K(testing::brownian_stats(0.05, 500, times, kSeed + r));
    bool ok = true;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) ok = ok && std::abs(est.k(a, b) - (a == b ? 0.05 : 0.0)) <= 3 * est.se(a, b);
    passed += ok;
  }
  return {passed >= 99, std::to_string(passed) + "/100 replications within 3 SE (N=500)"};
}

Outcome ou_exactness() {
  struct Case {
    double alpha, lambda, delta;
  };
  bool ok = true;
  std::string d;
  for (const Case c : {Case{1, 1, 1}, Case{2, 1, 0.1}, Case{0.5, 2, 1}}) {
    const auto p = OUParams::scalar(c.alpha, c.lambda, c.delta);
    const double want = c.lambda * c.lambda / (2 * c.alpha * c.delta);
    const double dt = c.delta / c.alpha;  // lag-one autocorrelation e^-1
    const OUStepper st(p, dt);
    RandomStream rng(kSeed, StreamDomain::Synthetic, 0);
    double g = rng.normal(), mu = 0.0;
    st.sample_stationary(&mu, &g);
    const long n = 1000000;
    double s = 0, ss = 0;
    for (long i = 0; i < n; ++i) {
      g = rng.normal();
      st.step(&mu, &g);
      s += mu;
      ss += mu * mu;
    }
    const double var = (ss - s * s / n) / (n - 1);
    const double rho = std::exp(-1.0);
    const double se = want * std::sqrt(2.0 / n * (1 + rho * rho) / (1 - rho * rho));
    const bool sampled = std::abs(var - want) <= 3 * se;

    double worst = 0;
    for (double h : {1e-3, 0.1, 1.0, 5.0}) {
      const OUStepper full(p, h), half(p, h / 2);
      const double E = full.decay_matrix()(0, 0), Eh = half.decay_matrix()(0, 0);
      const double C = full.conditional_covariance()(0, 0), Ch = half.conditional_covariance()(0, 0);
      worst = std::max({worst, std::abs(E - Eh * Eh), std::abs(C - (Eh * Ch * Eh + Ch))});
    }
    ok = ok && sampled && worst <= 1e-12;
    d += "(" + num(c.alpha) + "," + num(c.lambda) + "," + num(c.delta) + "): var=" + num(var) + " want=" +
         num(want) + "+-" + num(se) + " halfstep=" + num(worst) + "; ";
  }
  return {ok, d};
}

Outcome taylor_green_symmetry() {
  const Config c = preset("tg-defaults", true);
  const auto est = estimate(c.run);
  const auto s = symmetry_check(est);
  return {s.diag_equal && s.offdiag_zero,
          "K11=" + num(est.k(0, 0)) + " K22=" + num(est.k(1, 1)) + " gap=" + num(s.diag_gap) + "+-" +
              num(s.diag_gap_se) + " K12=" + num(est.k(0, 1)) + "+-" + num(est.se(0, 1)) + " K21=" +
              num(est.k(1, 0)) + " N=" + std::to_string(c.run.particles) + " t=" + num(c.run.t_final)};
}

Outcome enhancement() {
  const Config c = preset("fig1b", true);
  const auto est = estimate(c.run);
  const double ref = 0.5 * c.run.model.sigma * c.run.model.sigma;
  return {est.k(0, 0) >= 100 * ref, "sigma=" + num(c.run.model.sigma) + " tau=" + num(c.run.model.tau) + " K11=" +
                                        num(est.k(0, 0)) + " vs 100*sigma^2/2=" + num(100 * ref) +
                                        " N=" + std::to_string(c.run.particles) + " t=" + num(c.run.t_final)};
}

Outcome alpha_lambda_limits() {
  const Config c = preset("tg-defaults", true);
  const double ref = 0.5 * c.run.model.sigma * c.run.model.sigma;
  bool ok = true;
  std::string d;
  for (auto [axis, v] : {std::pair{SweepAxis::Alpha, 100.0}, std::pair{SweepAxis::Lambda, 0.01}}) {
    const auto est = estimate(apply_axis(c.run, axis, v, c.run.model.kind));
    const double rel = std::abs(est.k(0, 0) - ref) / ref;
    ok = ok && rel <= 0.2;
    d += std::string(to_string(axis)) + "=" + num(v) + ": K11=" + num(est.k(0, 0)) + "+-" + num(est.se(0, 0)) +
         " rel=" + num(rel) + "; ";
  }
  return {ok, d + "ref=" + num(ref)};
}

Outcome commutation_of_limits() {
  const Config c = preset("fig-delta", true);
  const auto st = white_noise_limit_study(c.sweep->values, c.run);
  std::string d = "K_white=" + num(st.white.isotropic()) + "+-" + num(st.white.isotropic_se()) + " diffs:";
  for (const auto& p : st.points) d += " " + num(p.delta) + ":" + num(p.diff) + "+-" + num(p.diff_se);
  const bool rate_ok = !st.fit.resolved || (st.fit.rate >= 0.25 && st.fit.rate <= 1.0);
  d += st.fit.resolved ? " rate=" + num(st.fit.rate) + " CI=[" + num(st.fit.ci_lo) + "," + num(st.fit.ci_hi) + "]"
                       : " rate=unresolved";
  d += " non_increasing=" + std::string(st.non_increasing ? "yes" : "no") +
       " converged=" + std::string(st.converged ? "yes" : "no");
  return {st.non_increasing && st.converged && rate_ok, d};
}

Outcome inertia_vs_tracer() {
  Config c = preset("tg-defaults", true);
  c.run.model.sigma = 0.1179;
  const auto inertial = estimate(apply_axis(c.run, SweepAxis::Tau, 1.0, ModelKind::ColoredInertial));
  const auto tracer = estimate(apply_axis(c.run, SweepAxis::Tau, 0.0, ModelKind::ColoredInertial));
  const double gap = inertial.isotropic() - tracer.isotropic();
  const double se = std::hypot(inertial.isotropic_se(), tracer.isotropic_se());
  return {gap > 3 * se, "K(tau=1)=" + num(inertial.isotropic()) + " K(tracer)=" + num(tracer.isotropic()) +
                            " gap=" + num(gap) + "+-" + num(se)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ipdiff-acceptance-determinism";
  fs::remove_all(root);
  std::string ref_stats, ref_est, ref_kt;
  bool ok = true;
  for (int w : {1, 4, 8}) {
    Config c = preset("tg-defaults", false);
    c.run.particles = 500;
    c.run.t_final = 20.0;
    c.run.checkpoints = default_checkpoints(c.run.t_final, c.run.dt, 32);
    c.workers = w;
    c.out_dir = (root / std::to_string(w)).string();
    std::ostringstream log;
    if (cmd_simulate(c, log) != kExitOk) return {false, "simulate failed"};
    const fs::path dir = c.out_dir;
    const auto stats = slurp(dir / "tg-defaults_stats.json");
    const auto est = slurp(dir / "tg-defaults_estimate.csv");
    const auto kt = slurp(dir / "tg-defaults_ktrace.csv");
    if (w == 1) {
      ref_stats = stats, ref_est = est, ref_kt = kt;
    } else {
      ok = ok && stats == ref_stats && est == ref_est && kt == ref_kt;
    }
  }
  return {ok, "workers 1/4/8: stats JSON, estimate CSV and K(t) CSV byte-identical=" + std::string(ok ? "yes" : "no")};
}

Outcome hypoellipticity() {
  const Config c = preset("tg-defaults", false);
  RandomStream rng(kSeed, StreamDomain::Synthetic, 7);
  int min_rank = 99;
  bool all_full = true;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> z{rng.uniform() * c.run.model.flow.period()[0], rng.uniform() * c.run.model.flow.period()[1]};
    const std::vector<double> mu{rng.normal()};
    const auto r = check_hypoellipticity_rank(c.run.model, z, mu);
    min_rank = std::min(min_rank, r.rank);
    all_full = all_full && r.full && r.rank == 5;
  }
  ModelParams degenerate = c.run.model;
  degenerate.sigma = 0.0;
  degenerate.flow = degenerate.flow.with_amplitude(0.0);
  const auto r0 = check_hypoellipticity_rank(degenerate, std::vector<double>{0.4, 1.1}, std::vector<double>{0.3});
  return {all_full && !r0.full, "sigma=" + num(c.run.model.sigma) + ": min rank " + std::to_string(min_rank) +
                                    " over 100 points; sigma=0, amplitude=0: rank " + std::to_string(r0.rank) +
                                    " full=" + (r0.full ? "true" : "false")};
}

Outcome lyapunov() {
  const Config c = preset("tg-defaults", false);
  const auto& m = c.run.model;
  const auto spec = LyapunovSpec::textbook(m);
  const std::size_t n = 100000;
  const double radius = 1000.0;
  const auto r = lyapunov_drift_check(m, spec, n, radius, kSeed);
  bool holds = std::isfinite(r.fitted_beta);
  for (const auto& p : lyapunov_samples(m, n, radius, kSeed))
    holds = holds && lyapunov_generator(m, spec, p.z, p.y, p.mu) <= -lyapunov_V(spec, p.y, p.mu) + r.fitted_beta;
  double worst = 0.0;
  for (const auto& p : lyapunov_samples(m, 100, 10.0, kSeed + 1)) {
    const double cf = lyapunov_generator(m, spec, p.z, p.y, p.mu);
    const double fd = testing::fd_generator(m, spec, p.z, p.y, p.mu);
    worst = std::max(worst, std::abs(cf - fd) / std::max(std::abs(cf), lyapunov_V(spec, p.y, p.mu)));
  }
  std::string d = "fitted_beta=" + num(r.fitted_beta) + " over " + std::to_string(n) + " points (radius " +
                  num(radius) + "), FD oracle max rel err=" + num(worst) + ", textbook beta=" + num(spec.beta);
  if (r.analytic_sup) d += " (sup L V + V=" + num(*r.analytic_sup) + ", reported only)";
  return {holds && worst <= 1e-6, d};
}

Outcome flow_checks() {
  const auto tg = FlowField::taylor_green();
  const auto p = check_parity(tg, 1000, 1e-12);
  const auto dv = check_divergence_free(tg, 64, 1e-8);
  return {p.passes && dv.passes,
          "parity max=" + num(p.max_violation) + " divergence max=" + num(dv.max_divergence) + " (grid 64)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"free-particle limit", free_particle_limit},
      {"estimator oracle", estimator_oracle},
      {"OU exactness", ou_exactness},
      {"Taylor-Green symmetry", taylor_green_symmetry},
      {"enhancement", enhancement},
      {"alpha/lambda limits", alpha_lambda_limits},
      {"commutation of limits", commutation_of_limits},
      {"inertia vs tracer", inertia_vs_tracer},
      {"determinism", determinism},
      {"hypoellipticity rank", hypoellipticity},
      {"Lyapunov drift", lyapunov},
      {"flow checks", flow_checks},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures;
}
