#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "ipdiff/dynamics.hpp"

namespace ipdiff {

enum class InitialLayout { Lattice, Point };

struct RunConfig {
  ModelParams model;
  std::size_t particles = 3000;
  double dt = 1e-3;
  double t_final = 1e4;
  /// Sorted times in (0, t_final]; empty selects default_checkpoints().
  std::vector<double> checkpoints;
  std::uint64_t seed = 0;
  InitialLayout layout = InitialLayout::Lattice;
  Vec start_point{};
  /// Number of leading particles whose checkpoint states are kept (<= 16).
  std::size_t dump_trajectories = 0;

  void validate() const;
  std::size_t total_steps() const;
  /// Checkpoint step indices on the dt grid, strictly increasing.
  std::vector<std::size_t> checkpoint_steps() const;
};

/// `count` times: geometric from t_final/1000 to t_final/2, uniform on the
/// second half. Snapped to the dt grid with duplicates removed.
std::vector<double> default_checkpoints(double t_final, double dt, int count = 64);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Running sums of particle displacements x(t) - x(0) at each checkpoint.
///
/// Per checkpoint: particle count, sum x_a, sum x_a x_b, and for standard
/// errors sum x_a^2 x_b and sum (x_a x_b)^2, plus sum |u|^2. Centered moments
/// are formed at read time.
/// A default-constructed object is empty and acts as the merge identity.
class EnsembleStats {
 public:
  EnsembleStats() = default;
  EnsembleStats(int dim, std::vector<double> times);

  void record(std::size_t k, const double* displacement, double speed_squared);

  bool empty() const { return dim_ == 0; }
  int dim() const { return dim_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }

  std::uint64_t count(std::size_t k) const { return counts_[k]; }
  double sum_x(std::size_t k, int a) const;
  double sum_xx(std::size_t k, int a, int b) const;
  double sum_xx2(std::size_t k, int a, int b) const;
  double sum_x2x(std::size_t k, int a, int b) const;
  double sum_u2(std::size_t k) const;

  std::vector<double> mean(std::size_t k) const;
  /// Unbiased (N-1) centered covariance, row-major d x d.
  std::vector<double> covariance(std::size_t k) const;
  /// E[((x_a - m_a)(x_b - m_b))^2] by plug-in, row-major d x d.
  std::vector<double> centered_fourth(std::size_t k) const;

  friend EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b);
  void merge_from(const EnsembleStats& other);

  nlohmann::json to_json() const;
  static EnsembleStats from_json(const nlohmann::json& j);

  /// Rebuild from explicit sums, one row per checkpoint laid out as
  /// [sum_x, sum_xx, sum_x2x, sum_xx2, sum_u2] with matrices row-major.
  static EnsembleStats from_sums(int dim, std::vector<double> times, std::vector<std::uint64_t> counts,
                                 const std::vector<std::vector<double>>& sums);

 private:
  std::size_t slots() const { return static_cast<std::size_t>(dim_ + 3 * dim_ * dim_ + 1); }
  std::size_t offset_x(std::size_t k) const { return k * slots(); }
  std::size_t offset_xx(std::size_t k) const { return k * slots() + dim_; }
  std::size_t offset_x2x(std::size_t k) const { return k * slots() + dim_ + dim_ * dim_; }
  std::size_t offset_xx2(std::size_t k) const { return k * slots() + dim_ + 2 * dim_ * dim_; }
  std::size_t offset_u2(std::size_t k) const { return k * slots() + dim_ + 3 * dim_ * dim_; }

  int dim_ = 0;
  std::vector<double> times_;
  std::vector<std::uint64_t> counts_;
  std::vector<CompensatedSum> sums_;
};

EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b);

struct TrajectoryDump {
  std::size_t particle = 0;
  std::vector<ParticleState> states;  // one per checkpoint
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<TrajectoryDump> trajectories;
  std::vector<std::string> warnings;
};

/// Particles per reduction block. Fixed, so the summation tree never depends
/// on the worker count.
inline constexpr std::size_t kParticleBlock = 64;

/// OpenMP ensemble. workers <= 0 uses the OpenMP default. Output is
/// bit-identical for every worker count.
EnsembleResult run_ensemble(const RunConfig& cfg, int workers = 0);

/// Single-threaded reference: particles in index order into one accumulator.
EnsembleResult run_ensemble_serial(const RunConfig& cfg);

/// Initial state of particle i; consumes the stationary OU draw from `rng`.
class RandomStream;
ParticleState initial_state(const RunConfig& cfg, std::size_t i, RandomStream& rng);

std::vector<std::string> step_guard_warnings(const RunConfig& cfg);

}  // namespace ipdiff
