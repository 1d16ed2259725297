#include "ipdiff/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "ipdiff/report.hpp"

namespace ipdiff {

namespace pt = boost::property_tree;

double parse_real(const std::string& text, const std::string& what) {
  std::string s = boost::algorithm::trim_copy(text);
  double scale = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    scale = std::numbers::pi;
    s.resize(s.size() - 2);
    if (s.empty() || s == "+") s = "1";
    if (s == "-") s = "-1";
  }
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(what + ": '" + text + "' is not a finite decimal number");
  return v * scale;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<std::string> parts;
  const std::string t = boost::algorithm::trim_copy(text);
  if (t.empty()) return {};
  boost::algorithm::split(parts, t, boost::is_any_of(" \t,"), boost::token_compress_on);
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_real(p, what));
  return out;
}

namespace {

template <class Int>
Int parse_int(const std::string& text, const std::string& what) {
  const std::string s = boost::algorithm::trim_copy(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(what + ": '" + text + "' is not an integer");
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  const std::string s = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError(what + ": '" + text + "' is not a boolean");
}

/// Reads one section, tracking which keys were consumed.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree, std::map<std::string, std::string>& echo)
      : name_(std::move(name)), tree_(tree), echo_(echo) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    known_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    echo_[name_ + "." + key] = boost::algorithm::trim_copy(*v);
    return *v;
  }
  std::string label(const std::string& key) const { return "[" + name_ + "] " + key; }

  template <class T, class Parse>
  void read(const std::string& key, T& target, Parse parse) {
    if (auto v = raw(key)) target = parse(*v, label(key));
  }
  void real(const std::string& key, double& target) { read(key, target, parse_real); }
  template <class Int>
  void integer(const std::string& key, Int& target) {
    read(key, target, parse_int<Int>);
  }
  void boolean(const std::string& key, bool& target) { read(key, target, parse_bool); }

  /// Keys matching a prefix followed by digits, e.g. psi1, F12.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    if (!tree_) return out;
    for (const auto& [k, v] : *tree_)
      if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0 &&
          std::all_of(k.begin() + prefix.size(), k.end(), [](char c) { return std::isdigit(c); }))
        out.push_back(k);
    return out;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_)
      if (!known_.count(k)) throw ConfigError("unknown key '" + k + "' in section [" + name_ + "]");
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::map<std::string, std::string>& echo_;
  std::set<std::string> known_;
};

/// "k1,k2 amplitude [phase]; ..." -> modes.
FourierSeries parse_modes(const std::string& text, int dim, const std::string& what) {
  FourierSeries out;
  std::vector<std::string> items;
  boost::algorithm::split(items, text, boost::is_any_of(";"));
  for (auto item : items) {
    boost::algorithm::trim(item);
    if (item.empty()) continue;
    std::vector<std::string> f;
    boost::algorithm::split(f, item, boost::is_any_of(" \t"), boost::token_compress_on);
    if (f.size() < 2 || f.size() > 3) throw ConfigError(what + ": mode '" + item + "' needs 'k1,..,kd amplitude [phase]'");
    std::vector<std::string> ks;
    boost::algorithm::split(ks, f[0], boost::is_any_of(","));
    if (static_cast<int>(ks.size()) != dim)
      throw ConfigError(what + ": wavevector '" + f[0] + "' must have " + std::to_string(dim) + " components");
    FourierMode m;
    for (const auto& k : ks) m.wavevector.push_back(parse_int<int>(k, what));
    m.amplitude = parse_real(f[1], what);
    m.phase = f.size() == 3 ? parse_real(f[2], what) : 0.0;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<double> broadcast(std::vector<double> v, int n, const std::string& what) {
  if (v.size() == 1 && n > 1) v.assign(n, v[0]);
  if (static_cast<int>(v.size()) != n)
    throw ConfigError(what + ": expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  return v;
}

FlowField read_flow(Section& s) {
  std::string kind = "taylor_green";
  s.read("kind", kind, [](const std::string& v, const std::string&) { return boost::algorithm::trim_copy(v); });
  double amplitude = 1.0;
  s.real("amplitude", amplitude);
  int dim_d = 2, dim_n = 1;
  s.integer("dim_d", dim_d);
  s.integer("dim_n", dim_n);
  std::vector<double> period;
  if (auto v = s.raw("period")) period = parse_real_list(*v, s.label("period"));

  if (kind == "taylor_green") {
    if (!period.empty() && broadcast(period, 2, s.label("period")) != std::vector<double>(2, 2.0 * std::numbers::pi))
      throw ConfigError("[flow] taylor_green has period 2pi; use stream_function for other cells");
    return FlowField::taylor_green(amplitude);
  }
  if (kind == "stream_function") {
    const auto keys = s.keys_with_prefix("psi");
    if (keys.empty()) throw ConfigError("[flow] stream_function needs psi1, psi2, ... keys");
    std::vector<FourierSeries> psi(keys.size());
    for (const auto& k : keys) {
      const int j = parse_int<int>(k.substr(3), s.label(k));
      if (j < 1 || j > static_cast<int>(keys.size())) throw ConfigError(s.label(k) + ": components must be psi1..psiN");
      psi[j - 1] = parse_modes(*s.raw(k), 2, s.label(k));
    }
    period = period.empty() ? std::vector<double>(2, 2.0 * std::numbers::pi) : broadcast(period, 2, s.label("period"));
    return FlowField::stream_function(std::move(psi), period, amplitude);
  }
  if (kind == "coefficient_table") {
    if (dim_d < 1 || dim_d > kMaxDim || dim_n < 1 || dim_n > kMaxDim)
      throw ConfigError("[flow] dim_d and dim_n must lie in 1.." + std::to_string(kMaxDim));
    std::vector<FourierSeries> entries(dim_d * dim_n);
    for (const auto& k : s.keys_with_prefix("F")) {
      if (k.size() != 3) throw ConfigError(s.label(k) + ": entries are named F<row><col>");
      const int i = k[1] - '1', j = k[2] - '1';
      if (i < 0 || i >= dim_d || j < 0 || j >= dim_n) throw ConfigError(s.label(k) + ": entry outside the matrix");
      entries[i * dim_n + j] = parse_modes(*s.raw(k), dim_d, s.label(k));
    }
    period = period.empty() ? std::vector<double>(dim_d, 2.0 * std::numbers::pi)
                            : broadcast(period, dim_d, s.label("period"));
    return FlowField::coefficient_table(dim_d, dim_n, std::move(entries), period, amplitude);
  }
  throw ConfigError("[flow] unknown kind '" + kind + "'");
}

}  // namespace

Config parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  static const std::set<std::string> sections{"model", "flow", "ou", "run", "sweep", "output", "validate"};
  for (const auto& [name, sub] : tree) {
    if (!sections.count(name)) throw ConfigError("unknown section [" + name + "]");
    if (sub.empty() && !sub.data().empty()) throw ConfigError("key '" + name + "' outside of any section");
  }
  for (const char* req : {"model", "flow", "ou", "run"})
    if (!tree.get_child_optional(req)) throw ConfigError(std::string("missing required section [") + req + "]");

  Config cfg;
  auto section = [&](const char* name) {
    auto child = tree.get_child_optional(name);
    return Section(name, child ? &*child : nullptr, cfg.echo);
  };

  Section flow = section("flow");
  cfg.run.model.flow = read_flow(flow);
  flow.reject_unknown();
  const int n = cfg.run.model.flow.dim_n();

  Section model = section("model");
  if (auto v = model.raw("kind")) cfg.run.model.kind = parse_model_kind(boost::algorithm::trim_copy(*v));
  model.real("tau", cfg.run.model.tau);
  model.real("sigma", cfg.run.model.sigma);
  if (auto v = model.raw("white_tracer_scheme")) {
    const auto s = boost::algorithm::trim_copy(*v);
    if (s != "stratonovich" && s != "ito") throw ConfigError("[model] white_tracer_scheme must be stratonovich or ito");
    cfg.run.model.ito_white_tracer = s == "ito";
  }
  model.reject_unknown();

  Section ou = section("ou");
  std::vector<double> alpha{1.0}, lambda{1.0};
  double delta = 1.0;
  if (auto v = ou.raw("alpha")) alpha = parse_real_list(*v, ou.label("alpha"));
  if (auto v = ou.raw("lambda")) lambda = parse_real_list(*v, ou.label("lambda"));
  ou.real("delta", delta);
  ou.reject_unknown();
  try {
    cfg.run.model.ou = OUParams::diagonal(broadcast(alpha, n, ou.label("alpha")), broadcast(lambda, n, ou.label("lambda")), delta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[ou] ") + e.what());
  }

  Section run = section("run");
  run.integer("particles", cfg.run.particles);
  run.real("dt", cfg.run.dt);
  run.real("t_final", cfg.run.t_final);
  run.integer("seed", cfg.run.seed);
  run.integer("checkpoints", cfg.checkpoint_count);
  if (auto v = run.raw("checkpoint_times")) {
    cfg.run.checkpoints = parse_real_list(*v, run.label("checkpoint_times"));
    cfg.explicit_checkpoints = true;
  }
  if (auto v = run.raw("layout")) {
    const auto s = boost::algorithm::trim_copy(*v);
    if (s == "lattice") cfg.run.layout = InitialLayout::Lattice;
    else if (s == "point") cfg.run.layout = InitialLayout::Point;
    else throw ConfigError("[run] layout must be lattice or point");
  }
  if (auto v = run.raw("start")) {
    const auto p = broadcast(parse_real_list(*v, run.label("start")), cfg.run.model.dim_d(), run.label("start"));
    std::copy(p.begin(), p.end(), cfg.run.start_point.begin());
  }
  run.integer("dump_trajectories", cfg.run.dump_trajectories);
  run.real("window_fraction", cfg.window_fraction);
  run.integer("workers", cfg.workers);
  if (auto v = run.raw("desk_particles")) cfg.desk_particles = parse_int<std::size_t>(*v, run.label("desk_particles"));
  if (auto v = run.raw("desk_t_final")) cfg.desk_t_final = parse_real(*v, run.label("desk_t_final"));
  if (auto v = run.raw("desk_dt")) cfg.desk_dt = parse_real(*v, run.label("desk_dt"));
  run.reject_unknown();
  if (cfg.checkpoint_count < 4) throw ConfigError("[run] checkpoints must be at least 4");
  if (!cfg.explicit_checkpoints && cfg.run.dt > 0.0 && cfg.run.t_final >= cfg.run.dt)
    cfg.run.checkpoints = default_checkpoints(cfg.run.t_final, cfg.run.dt, cfg.checkpoint_count);

  Section sweep = section("sweep");
  if (sweep.present()) {
    SweepSection sw;
    if (auto v = sweep.raw("study")) {
      const auto s = boost::algorithm::trim_copy(*v);
      if (s == "sweep") sw.study = StudyKind::Sweep;
      else if (s == "white_noise_limit") sw.study = StudyKind::WhiteNoiseLimit;
      else throw ConfigError("[sweep] study must be sweep or white_noise_limit");
    }
    if (auto v = sweep.raw("axis")) {
      std::vector<std::string> f;
      const auto t = boost::algorithm::trim_copy(*v);
      boost::algorithm::split(f, t, boost::is_any_of(" \t,"), boost::token_compress_on);
      sw.axes.clear();
      for (const auto& a : f) sw.axes.push_back(parse_sweep_axis(a));
    }
    if (auto v = sweep.raw("values")) sw.values = parse_real_list(*v, sweep.label("values"));
    if (auto v = sweep.raw("range")) {
      std::vector<std::string> f;
      const auto t = boost::algorithm::trim_copy(*v);
      boost::algorithm::split(f, t, boost::is_any_of(" \t"), boost::token_compress_on);
      if (f.size() != 4 || (f[3] != "log" && f[3] != "linear"))
        throw ConfigError("[sweep] range is 'lo hi count log|linear'");
      const double lo = parse_real(f[0], sweep.label("range")), hi = parse_real(f[1], sweep.label("range"));
      const int cnt = parse_int<int>(f[2], sweep.label("range"));
      if (cnt < 2 || (f[3] == "log" && !(lo > 0.0 && hi > 0.0))) throw ConfigError("[sweep] bad range");
      if (!sw.values.empty()) throw ConfigError("[sweep] give either values or range");
      for (int i = 0; i < cnt; ++i) {
        const double u = static_cast<double>(i) / (cnt - 1);
        sw.values.push_back(f[3] == "log" ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u);
      }
    }
    if (auto v = sweep.raw("kinds")) {
      std::vector<std::string> f;
      const auto t = boost::algorithm::trim_copy(*v);
      boost::algorithm::split(f, t, boost::is_any_of(" \t,"), boost::token_compress_on);
      for (const auto& k : f) sw.kinds.push_back(parse_model_kind(k));
    }
    sweep.boolean("paired_models", sw.paired_models);
    sweep.boolean("concurrent_points", sw.concurrent_points);
    sweep.reject_unknown();
    cfg.sweep = std::move(sw);
  }

  Section output = section("output");
  if (auto v = output.raw("dir")) cfg.out_dir = boost::algorithm::trim_copy(*v);
  if (auto v = output.raw("name")) cfg.name = boost::algorithm::trim_copy(*v);
  output.reject_unknown();

  Section val = section("validate");
  auto& vs = cfg.validate;
  val.integer("parity_samples", vs.parity_samples);
  val.real("parity_tol", vs.parity_tol);
  val.integer("divergence_grid", vs.divergence_grid);
  val.real("divergence_tol", vs.divergence_tol);
  val.integer("rank_points", vs.rank_points);
  val.integer("lyapunov_samples", vs.lyapunov_samples);
  val.real("lyapunov_radius", vs.lyapunov_radius);
  val.real("centering_burn_in", vs.centering_burn_in);
  val.real("centering_horizon", vs.centering_horizon);
  val.real("centering_dt", vs.centering_dt);
  val.reject_unknown();

  cfg.run.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(Config& cfg, const Overrides& o) {
  if (o.desk_scale) {
    if (cfg.desk_particles) cfg.run.particles = *cfg.desk_particles;
    if (cfg.desk_t_final) cfg.run.t_final = *cfg.desk_t_final;
    if (cfg.desk_dt) cfg.run.dt = *cfg.desk_dt;
    cfg.echo["run.desk_scale"] = "true";
  }
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.particles) cfg.run.particles = *o.particles;
  if (o.dt) cfg.run.dt = *o.dt;
  if (o.t_final) cfg.run.t_final = *o.t_final;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (cfg.explicit_checkpoints) {
    // Explicit times beyond a shortened horizon are dropped.
    std::erase_if(cfg.run.checkpoints, [&](double t) { return t > cfg.run.t_final; });
  } else if (cfg.run.dt > 0.0 && cfg.run.t_final >= cfg.run.dt) {
    cfg.run.checkpoints = default_checkpoints(cfg.run.t_final, cfg.run.dt, cfg.checkpoint_count);
  }
  if (o.seed || o.desk_scale) cfg.echo["run.seed"] = std::to_string(cfg.run.seed);
  if (o.particles || o.desk_scale) cfg.echo["run.particles"] = std::to_string(cfg.run.particles);
  if (o.dt || (o.desk_scale && cfg.desk_dt)) cfg.echo["run.dt"] = format_real(cfg.run.dt);
  if (o.t_final || (o.desk_scale && cfg.desk_t_final)) cfg.echo["run.t_final"] = format_real(cfg.run.t_final);
  if (o.workers) cfg.echo["run.workers"] = std::to_string(cfg.workers);
  if (o.out_dir) cfg.echo["output.dir"] = cfg.out_dir;
  cfg.run.validate();
}

nlohmann::json config_echo(const Config& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : cfg.echo) {
    const auto dot = key.find('.');
    j[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  return j;
}

}  // namespace ipdiff
