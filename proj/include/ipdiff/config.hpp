#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ipdiff/ensemble.hpp"
#include "ipdiff/limits.hpp"

namespace ipdiff {

enum class StudyKind { Sweep, WhiteNoiseLimit };

struct SweepSection {
  StudyKind study = StudyKind::Sweep;
  /// Each axis is swept over the same values; rows are concatenated.
  std::vector<SweepAxis> axes{SweepAxis::Sigma};
  std::vector<double> values;  // axis values, or the deltas of the limit study
  std::vector<ModelKind> kinds;
  bool paired_models = false;
  bool concurrent_points = false;
};

struct ValidateSection {
  std::size_t parity_samples = 1000;
  double parity_tol = 1e-12;
  int divergence_grid = 64;
  double divergence_tol = 1e-8;
  std::size_t rank_points = 100;
  std::size_t lyapunov_samples = 100000;
  double lyapunov_radius = 1000.0;
  double centering_burn_in = 100.0;
  double centering_horizon = 2000.0;
  double centering_dt = 1e-2;
};

struct Config {
  RunConfig run;
  double window_fraction = 0.5;
  int workers = 0;
  std::optional<SweepSection> sweep;
  std::string out_dir = "out";
  std::string name = "run";
  ValidateSection validate;
  std::optional<std::size_t> desk_particles;
  std::optional<double> desk_t_final;
  std::optional<double> desk_dt;
  int checkpoint_count = 64;
  bool explicit_checkpoints = false;
  /// Resolved "section.key" -> value text; parsed strings are kept verbatim.
  std::map<std::string, std::string> echo;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> particles;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  bool desk_scale = false;
};

/// Parses an INI document. Sections [model], [flow], [ou] and [run] are
/// required; [sweep], [output] and [validate] are optional. Unknown sections
/// and keys raise ConfigError.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

/// Applies --desk-scale first, then the explicit overrides.
void apply_overrides(Config& cfg, const Overrides& o);

/// Echo as nested JSON {section: {key: value}}.
nlohmann::json config_echo(const Config& cfg);

/// Decimal real; a trailing "pi" multiplies by pi ("2pi", "pi", "0.5pi").
double parse_real(const std::string& text, const std::string& what);
std::vector<double> parse_real_list(const std::string& text, const std::string& what);

}  // namespace ipdiff
