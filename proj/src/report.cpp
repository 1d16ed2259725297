#include "ipdiff/report.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <nlohmann/json.hpp>

namespace ipdiff {

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::vector<std::string> estimate_columns(int d) {
  std::vector<std::string> c{"axis", "value",     "kind", "tau", "sigma", "delta",
                             "amplitude", "particles", "t_lo", "t_hi"};
  auto idx = [](int a, int b) { return std::to_string(a + 1) + std::to_string(b + 1); };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) c.push_back("K" + idx(a, b));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) c.push_back("se" + idx(a, b));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) c.push_back("Ksym" + idx(a, b));
  for (int a = 0; a < d; ++a) c.push_back("V" + std::to_string(a + 1));
  for (int a = 0; a < d; ++a) c.push_back("V" + std::to_string(a + 1) + "_se");
  for (const char* s : {"drift_flagged", "slope_diag", "reference", "error"}) c.push_back(s);
  return c;
}

namespace {

void join(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

// Errors are free text; keep them on one CSV cell.
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

}  // namespace

void write_estimate_header(std::ostream& out, int d) { join(out, estimate_columns(d)); }

void write_estimate_row(std::ostream& out, int d, const EstimateRowContext& ctx, const DiffusivityEstimate* est) {
  std::vector<std::string> c{ctx.axis,
                             ctx.axis == "none" ? "" : format_real(ctx.value),
                             std::string(to_string(ctx.kind)),
                             format_real(ctx.tau),
                             format_real(ctx.sigma),
                             format_real(ctx.delta),
                             format_real(ctx.amplitude)};
  const std::size_t total = estimate_columns(d).size();
  if (est) {
    c.push_back(std::to_string(est->particles));
    c.push_back(format_real(est->t_lo));
    c.push_back(format_real(est->t_hi));
    for (double v : est->K) c.push_back(format_real(v));
    for (double v : est->std_error) c.push_back(format_real(v));
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) c.push_back(format_real(est->K_sym[a * d + b]));
    for (double v : est->drift.V) c.push_back(format_real(v));
    for (double v : est->drift.se) c.push_back(format_real(v));
    c.push_back(est->drift.flagged ? "true" : "false");
    c.push_back(format_real(est->slope_diag));
  } else {
    c.resize(total - 2);
  }
  c.push_back(format_real(ctx.reference));
  c.push_back(quote(ctx.error));
  join(out, c);
}

void write_ktrace_csv(std::ostream& out, const EnsembleStats& stats) {
  const int d = stats.dim();
  std::vector<std::string> head{"t", "count"};
  for (const char* p : {"K", "se"})
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) head.push_back(p + std::to_string(a + 1) + std::to_string(b + 1));
  head.push_back("mean_u2");
  join(out, head);
  const KTrace tr = k_trace(stats);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    std::vector<std::string> c{format_real(tr.t[k]), std::to_string(stats.count(k))};
    for (double v : tr.K[k]) c.push_back(format_real(v));
    for (double v : tr.se[k]) c.push_back(format_real(v));
    c.push_back(format_real(stats.sum_u2(k) / static_cast<double>(stats.count(k))));
    join(out, c);
  }
}

void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  write_estimate_header(out, spec.base.model.dim_d());
  write_sweep_rows(out, spec, rows);
}

void write_sweep_rows(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  const int d = spec.base.model.dim_d();
  for (const auto& r : rows) {
    const RunConfig cfg = apply_axis(spec.base, spec.axis, r.value, r.kind);
    EstimateRowContext ctx;
    ctx.axis = std::string(to_string(spec.axis));
    ctx.value = r.value;
    ctx.kind = r.kind;
    ctx.tau = r.tau;
    ctx.sigma = r.sigma;
    ctx.delta = cfg.model.ou.delta();
    ctx.amplitude = cfg.model.flow.amplitude();
    ctx.reference = r.reference;
    ctx.error = r.error;
    write_estimate_row(out, d, ctx, r.estimate ? &*r.estimate : nullptr);
  }
}

void write_limit_csv(std::ostream& out, const LimitStudy& study) {
  join(out, {"delta", "K_col", "K_col_se", "K_white", "K_white_se", "diff", "diff_se", "resolved"});
  for (const auto& p : study.points)
    join(out, {format_real(p.delta), format_real(p.colored.isotropic()), format_real(p.colored.isotropic_se()),
               format_real(study.white.isotropic()), format_real(study.white.isotropic_se()), format_real(p.diff),
               format_real(p.diff_se), p.resolved ? "true" : "false"});
}

void write_trajectories_csv(std::ostream& out, const std::vector<TrajectoryDump>& dumps,
                            const std::vector<double>& times, int d, int n) {
  std::vector<std::string> head{"particle", "t"};
  for (int a = 0; a < d; ++a) head.push_back("x" + std::to_string(a + 1));
  for (int a = 0; a < d; ++a) head.push_back("u" + std::to_string(a + 1));
  for (int j = 0; j < n; ++j) head.push_back("mu" + std::to_string(j + 1));
  join(out, head);
  for (const auto& dump : dumps)
    for (std::size_t k = 0; k < dump.states.size(); ++k) {
      const auto& s = dump.states[k];
      std::vector<std::string> c{std::to_string(dump.particle), format_real(times[k])};
      for (int a = 0; a < d; ++a) c.push_back(format_real(s.x[a]));
      for (int a = 0; a < d; ++a) c.push_back(format_real(s.u[a]));
      for (int j = 0; j < n; ++j) c.push_back(format_real(s.mu[j]));
      join(out, c);
    }
}

nlohmann::json limit_study_json(const LimitStudy& study) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : study.points)
    pts.push_back({{"delta", p.delta},
                   {"colored", p.colored.to_json()},
                   {"diff", p.diff},
                   {"diff_se", p.diff_se},
                   {"resolved", p.resolved}});
  nlohmann::json fit = {{"resolved", study.fit.resolved}, {"points", study.fit.points}};
  if (study.fit.resolved) {
    fit["rate"] = study.fit.rate;
    fit["rate_se"] = study.fit.rate_se;
    fit["ci95"] = {study.fit.ci_lo, study.fit.ci_hi};
  } else {
    fit["rate"] = "unresolved";
  }
  return {{"points", pts},
          {"white", study.white.to_json()},
          {"fit", fit},
          {"non_increasing", study.non_increasing},
          {"converged", study.converged}};
}

nlohmann::json run_metadata(double elapsed_seconds) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"version", IPDIFF_VERSION}, {"wall_clock_utc", buf}, {"elapsed_seconds", elapsed_seconds}};
}

}  // namespace ipdiff
