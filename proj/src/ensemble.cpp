#include "ipdiff/ensemble.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "ipdiff/rng.hpp"

namespace ipdiff {

void RunConfig::validate() const {
  model.validate();
  if (particles < 2) throw ConfigError("run needs at least 2 particles");
  if (!(dt > 0.0) || !(dt <= t_final)) throw ConfigError("run requires 0 < dt <= t_final");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (!(checkpoints[k] > 0.0) || checkpoints[k] > t_final * (1.0 + 1e-12))
      throw ConfigError("checkpoints must lie in (0, t_final]");
    if (k > 0 && !(checkpoints[k] > checkpoints[k - 1])) throw ConfigError("checkpoints must be increasing");
  }
  if (dump_trajectories > 16) throw ConfigError("trajectory dumps are limited to 16 particles");
}

std::size_t RunConfig::total_steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

std::vector<std::size_t> RunConfig::checkpoint_steps() const {
  const std::vector<double> times = checkpoints.empty() ? default_checkpoints(t_final, dt) : checkpoints;
  std::vector<std::size_t> steps;
  for (double t : times) {
    const auto s = static_cast<std::size_t>(std::max<long long>(1, std::llround(t / dt)));
    if (steps.empty() || s > steps.back()) steps.push_back(s);
  }
  return steps;
}

std::vector<double> default_checkpoints(double t_final, double dt, int count) {
  // Geometric up to t_final/2 for the ballistic regime, then uniform so the
  // plateau window of the estimator holds half of the points.
  std::vector<double> raw;
  const int linear = count / 2, geometric = count - linear;
  const double half = linear > 0 ? 0.5 * t_final : t_final;
  const double start = std::min(std::max(dt, t_final / 1000.0), half);
  const double ratio = geometric > 1 ? std::pow(half / start, 1.0 / (geometric - 1)) : 1.0;
  for (int k = 0; k < geometric; ++k) raw.push_back(k == geometric - 1 ? half : start * std::pow(ratio, k));
  for (int k = 1; k <= linear; ++k) raw.push_back(k == linear ? t_final : half + (t_final - half) * k / linear);

  std::vector<double> out;
  long long last = 0;
  for (double t : raw) {
    const long long s = std::max<long long>(1, std::llround(t / dt));
    if (s > last) {
      out.push_back(static_cast<double>(s) * dt);
      last = s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

EnsembleStats::EnsembleStats(int dim, std::vector<double> times)
    : dim_(dim), times_(std::move(times)), counts_(times_.size(), 0) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("EnsembleStats: dimension out of range");
  sums_.resize(times_.size() * slots());
}

void EnsembleStats::record(std::size_t k, const double* x, double speed_squared) {
  ++counts_[k];
  CompensatedSum* sx = &sums_[offset_x(k)];
  CompensatedSum* sxx = &sums_[offset_xx(k)];
  CompensatedSum* sx2x = &sums_[offset_x2x(k)];
  CompensatedSum* sxx2 = &sums_[offset_xx2(k)];
  for (int a = 0; a < dim_; ++a) {
    sx[a].add(x[a]);
    for (int b = 0; b < dim_; ++b) {
      const double p = x[a] * x[b];
      sxx[a * dim_ + b].add(p);
      sx2x[a * dim_ + b].add(x[a] * p);
      sxx2[a * dim_ + b].add(p * p);
    }
  }
  sums_[offset_u2(k)].add(speed_squared);
}

double EnsembleStats::sum_x(std::size_t k, int a) const { return sums_[offset_x(k) + a].value(); }
double EnsembleStats::sum_xx(std::size_t k, int a, int b) const {
  return sums_[offset_xx(k) + a * dim_ + b].value();
}
double EnsembleStats::sum_xx2(std::size_t k, int a, int b) const {
  return sums_[offset_xx2(k) + a * dim_ + b].value();
}
double EnsembleStats::sum_x2x(std::size_t k, int a, int b) const {
  return sums_[offset_x2x(k) + a * dim_ + b].value();
}
double EnsembleStats::sum_u2(std::size_t k) const { return sums_[offset_u2(k)].value(); }

std::vector<double> EnsembleStats::mean(std::size_t k) const {
  std::vector<double> m(dim_);
  const double n = static_cast<double>(counts_[k]);
  for (int a = 0; a < dim_; ++a) m[a] = sum_x(k, a) / n;
  return m;
}

std::vector<double> EnsembleStats::covariance(std::size_t k) const {
  const double n = static_cast<double>(counts_[k]);
  const auto m = mean(k);
  std::vector<double> c(dim_ * dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) c[a * dim_ + b] = (sum_xx(k, a, b) - n * m[a] * m[b]) / (n - 1.0);
  return c;
}

std::vector<double> EnsembleStats::centered_fourth(std::size_t k) const {
  const double n = static_cast<double>(counts_[k]);
  const auto m = mean(k);
  std::vector<double> out(dim_ * dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      const double ma = m[a], mb = m[b];
      const double v = sum_xx2(k, a, b) / n - 2.0 * mb * sum_x2x(k, a, b) / n - 2.0 * ma * sum_x2x(k, b, a) / n +
                       mb * mb * sum_xx(k, a, a) / n + ma * ma * sum_xx(k, b, b) / n +
                       4.0 * ma * mb * sum_xx(k, a, b) / n - 3.0 * ma * ma * mb * mb;
      out[a * dim_ + b] = std::max(v, 0.0);
    }
  return out;
}

void EnsembleStats::merge_from(const EnsembleStats& other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  if (dim_ != other.dim_ || times_ != other.times_)
    throw std::invalid_argument("merge: ensemble statistics have different checkpoint grids");
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].merge(other.sums_[i]);
}

EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b) {
  EnsembleStats out = a;
  out.merge_from(b);
  return out;
}

nlohmann::json EnsembleStats::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["times"] = times_;
  auto cps = nlohmann::json::array();
  for (std::size_t k = 0; k < times_.size(); ++k) {
    std::vector<double> sx, sxx, sx2x, sxx2;
    for (int a = 0; a < dim_; ++a) sx.push_back(sum_x(k, a));
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) {
        sxx.push_back(sum_xx(k, a, b));
        sx2x.push_back(sum_x2x(k, a, b));
        sxx2.push_back(sum_xx2(k, a, b));
      }
    cps.push_back({{"count", counts_[k]},
                   {"sum_x", sx},
                   {"sum_xx", sxx},
                   {"sum_x2x", sx2x},
                   {"sum_xx2", sxx2},
                   {"sum_u2", sum_u2(k)}});
  }
  j["checkpoints"] = std::move(cps);
  return j;
}

EnsembleStats EnsembleStats::from_sums(int dim, std::vector<double> times, std::vector<std::uint64_t> counts,
                                       const std::vector<std::vector<double>>& sums) {
  EnsembleStats s(dim, std::move(times));
  if (counts.size() != s.size() || sums.size() != s.size())
    throw std::invalid_argument("from_sums: one entry per checkpoint required");
  s.counts_ = std::move(counts);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (sums[k].size() != s.slots()) throw std::invalid_argument("from_sums: wrong number of sums");
    for (std::size_t i = 0; i < s.slots(); ++i) s.sums_[k * s.slots() + i].add(sums[k][i]);
  }
  return s;
}

EnsembleStats EnsembleStats::from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  auto times = j.at("times").get<std::vector<double>>();
  std::vector<std::uint64_t> counts;
  std::vector<std::vector<double>> sums;
  for (const auto& cp : j.at("checkpoints")) {
    counts.push_back(cp.at("count").get<std::uint64_t>());
    std::vector<double> row = cp.at("sum_x").get<std::vector<double>>();
    for (double v : cp.at("sum_xx").get<std::vector<double>>()) row.push_back(v);
    for (double v : cp.at("sum_x2x").get<std::vector<double>>()) row.push_back(v);
    for (double v : cp.at("sum_xx2").get<std::vector<double>>()) row.push_back(v);
    row.push_back(cp.at("sum_u2").get<double>());
    sums.push_back(std::move(row));
  }
  return from_sums(dim, std::move(times), std::move(counts), sums);
}

// ---------------------------------------------------------------------------

ParticleState initial_state(const RunConfig& cfg, std::size_t i, RandomStream& rng) {
  const auto& flow = cfg.model.flow;
  const int d = flow.dim_d();
  ParticleState s;
  if (cfg.layout == InitialLayout::Point) {
    for (int a = 0; a < d; ++a) s.x[a] = cfg.start_point[a];
  } else {
    auto per_axis = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(cfg.particles), 1.0 / d) - 1e-9));
    per_axis = std::max<std::size_t>(per_axis, 1);
    std::size_t rem = i;
    for (int a = 0; a < d; ++a) {
      const std::size_t digit = rem % per_axis;
      rem /= per_axis;
      s.x[a] = flow.period()[a] * (static_cast<double>(digit) + 0.5) / static_cast<double>(per_axis);
    }
  }
  if (is_colored(cfg.model.kind)) {
    double g[kMaxDim];
    rng.fill_normal(g, cfg.model.dim_n());
    OUStepper(cfg.model.ou, 1.0).sample_stationary(s.mu.data(), g);
  }
  return s;
}

std::vector<std::string> step_guard_warnings(const RunConfig& cfg) {
  std::vector<std::string> w;
  const double limit = dt_max(cfg.model);
  if (cfg.dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt=" << cfg.dt << " exceeds the step guard " << limit << " for " << to_string(cfg.model.kind);
    w.push_back(os.str());
  }
  return w;
}

namespace {

struct ParticleFailure {
  std::size_t particle;
  std::size_t step;
};

/// Runs particle i through every checkpoint, recording into `stats`.
/// Returns the failing step on a non-finite state.
std::optional<ParticleFailure> simulate_particle(const RunConfig& cfg, const Stepper& stepper,
                                                 const std::vector<std::size_t>& ck, std::size_t i,
                                                 EnsembleStats& stats, TrajectoryDump* dump) {
  const int d = cfg.model.dim_d(), n = cfg.model.dim_n();
  const int ndraw = cfg.model.draws_per_step();
  const bool inertial = is_inertial(cfg.model.kind);
  RandomStream rng(cfg.seed, StreamDomain::Particle, i);
  ParticleState s = initial_state(cfg, i, rng);
  const Vec x0 = s.x;
  double draws[2 * kMaxDim];
  double disp[kMaxDim];
  std::size_t step = 0;
  for (std::size_t k = 0; k < ck.size(); ++k) {
    for (; step < ck[k]; ++step) {
      rng.fill_normal(draws, ndraw);
      stepper.step(s, draws);
      if (!is_finite(s, d, n)) return ParticleFailure{i, step + 1};
    }
    double u2 = 0.0;
    for (int a = 0; a < d; ++a) {
      disp[a] = s.x[a] - x0[a];
      if (inertial) u2 += s.u[a] * s.u[a];
    }
    stats.record(k, disp, u2);
    if (dump) dump->states.push_back(s);
  }
  return std::nullopt;
}

[[noreturn]] void raise_failure(const RunConfig& cfg, const ParticleFailure& f) {
  std::ostringstream os;
  os << "non-finite state for particle " << f.particle << " at step " << f.step << " (kind="
     << to_string(cfg.model.kind) << ", tau=" << cfg.model.tau << ", sigma=" << cfg.model.sigma
     << ", delta=" << cfg.model.ou.delta() << ", dt=" << cfg.dt << ")";
  throw NumericalError(os.str(), f.particle, f.step);
}

std::vector<double> checkpoint_times(const RunConfig& cfg, const std::vector<std::size_t>& ck) {
  std::vector<double> t;
  for (std::size_t s : ck) t.push_back(static_cast<double>(s) * cfg.dt);
  return t;
}

}  // namespace

EnsembleResult run_ensemble(const RunConfig& cfg, int workers) {
  cfg.validate();
  const auto ck = cfg.checkpoint_steps();
  const auto times = checkpoint_times(cfg, ck);
  const Stepper stepper(cfg.model, cfg.dt);
  const int d = cfg.model.dim_d();
  const std::size_t nblocks = (cfg.particles + kParticleBlock - 1) / kParticleBlock;

  std::vector<EnsembleStats> blocks(nblocks, EnsembleStats(d, times));
  std::vector<std::optional<ParticleFailure>> failures(nblocks);
  std::vector<TrajectoryDump> dumps(cfg.dump_trajectories);
  const int threads = workers > 0 ? workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t first = static_cast<std::size_t>(b) * kParticleBlock;
    const std::size_t last = std::min(cfg.particles, first + kParticleBlock);
    for (std::size_t i = first; i < last; ++i) {
      TrajectoryDump* dump = i < dumps.size() ? &dumps[i] : nullptr;
      if (dump) dump->particle = i;
      if (auto f = simulate_particle(cfg, stepper, ck, i, blocks[b], dump)) {
        failures[b] = f;
        break;
      }
    }
  }

  for (const auto& f : failures)
    if (f) raise_failure(cfg, *f);

  EnsembleResult result;
  result.stats = EnsembleStats(d, times);
  for (const auto& blk : blocks) result.stats.merge_from(blk);
  result.trajectories = std::move(dumps);
  result.warnings = step_guard_warnings(cfg);
  return result;
}

EnsembleResult run_ensemble_serial(const RunConfig& cfg) {
  cfg.validate();
  const auto ck = cfg.checkpoint_steps();
  const Stepper stepper(cfg.model, cfg.dt);
  EnsembleResult result;
  result.stats = EnsembleStats(cfg.model.dim_d(), checkpoint_times(cfg, ck));
  result.trajectories.resize(cfg.dump_trajectories);
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    TrajectoryDump* dump = i < result.trajectories.size() ? &result.trajectories[i] : nullptr;
    if (dump) dump->particle = i;
    if (auto f = simulate_particle(cfg, stepper, ck, i, result.stats, dump)) raise_failure(cfg, *f);
  }
  result.warnings = step_guard_warnings(cfg);
  return result;
}

}  // namespace ipdiff
