#include "ipdiff/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace ipdiff {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ColoredInertial: return "colored_inertial";
    case ModelKind::WhiteInertial: return "white_inertial";
    case ModelKind::ColoredTracer: return "colored_tracer";
    case ModelKind::WhiteTracer: return "white_tracer";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "colored_inertial") return ModelKind::ColoredInertial;
  if (name == "white_inertial") return ModelKind::WhiteInertial;
  if (name == "colored_tracer") return ModelKind::ColoredTracer;
  if (name == "white_tracer") return ModelKind::WhiteTracer;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

ModelKind tracer_of(ModelKind kind) {
  return is_colored(kind) ? ModelKind::ColoredTracer : ModelKind::WhiteTracer;
}

ModelKind inertial_of(ModelKind kind) {
  return is_colored(kind) ? ModelKind::ColoredInertial : ModelKind::WhiteInertial;
}

ModelKind partner_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::ColoredInertial: return ModelKind::WhiteInertial;
    case ModelKind::WhiteInertial: return ModelKind::ColoredInertial;
    case ModelKind::ColoredTracer: return ModelKind::WhiteTracer;
    case ModelKind::WhiteTracer: return ModelKind::ColoredTracer;
  }
  return kind;
}

void ModelParams::validate() const {
  if (is_inertial(kind) && !(tau > 0.0 && std::isfinite(tau)))
    throw ConfigError("tau must be positive for inertial models");
  if (!(sigma >= 0.0 && std::isfinite(sigma))) throw ConfigError("sigma must be non-negative");
  if (flow.dim_n() != ou.dim())
    throw ConfigError("flow has " + std::to_string(flow.dim_n()) + " modulation components but OU process has " +
                      std::to_string(ou.dim()));
}

double dt_max(const ModelParams& m) {
  switch (m.kind) {
    case ModelKind::ColoredInertial: return std::min(m.tau, m.ou.delta()) / 20.0;
    case ModelKind::WhiteInertial: return m.tau / 20.0;
    case ModelKind::ColoredTracer: return m.ou.delta() / 20.0;
    case ModelKind::WhiteTracer: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

Stepper::Stepper(const ModelParams& m, double dt)
    : model_(m), ou_(m.ou, dt), dt_(dt), sqrt_dt_(std::sqrt(dt)), d_(m.dim_d()), n_(m.dim_n()) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  m.validate();
  const auto& ou = m.ou;
  Eigen::VectorXd gain(n_);
  for (int i = 0; i < n_; ++i)
    gain(i) = std::sqrt(ou.noise_eigenvalues()(i)) / ou.drift_eigenvalues()(i);
  const Eigen::MatrixXd factor = ou.identity_basis()
                                     ? Eigen::MatrixXd(gain.asDiagonal())
                                     : Eigen::MatrixXd(ou.basis() * gain.asDiagonal() * ou.basis().transpose());
  white_factor_ = SmallMatrix(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) white_factor_(i, j) = factor(i, j);
}

void Stepper::step(ParticleState& s, const double* draws) const {
  switch (model_.kind) {
    case ModelKind::ColoredInertial: colored_inertial(s, draws); break;
    case ModelKind::WhiteInertial: white_inertial(s, draws); break;
    case ModelKind::ColoredTracer: colored_tracer(s, draws); break;
    case ModelKind::WhiteTracer: white_tracer(s, draws); break;
  }
}

void Stepper::colored_inertial(ParticleState& s, const double* draws) const {
  const double tau = model_.tau;
  const SmallMatrix f = model_.flow.eval_unchecked(s.x.data());
  const double noise = model_.sigma / tau * sqrt_dt_;
  for (int i = 0; i < d_; ++i) {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += f(i, j) * s.mu[j];
    const double u_old = s.u[i];
    s.u[i] = u_old + dt_ / tau * (v - u_old) + noise * draws[i];
    s.x[i] += u_old * dt_;
  }
  ou_.step(s.mu.data(), draws + d_);
}

SmallMatrix Stepper::white_gain(const double* x) const {
  const SmallMatrix f = model_.flow.eval_unchecked(x);
  SmallMatrix g(d_, n_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < n_; ++j) {
      double v = 0.0;
      for (int k = 0; k < n_; ++k) v += f(i, k) * white_factor_(k, j);
      g(i, j) = v;
    }
  return g;
}

void Stepper::white_inertial(ParticleState& s, const double* draws) const {
  const double tau = model_.tau;
  const SmallMatrix g = white_gain(s.x.data());
  const double noise = model_.sigma / tau * sqrt_dt_;
  for (int i = 0; i < d_; ++i) {
    double w = 0.0;
    for (int j = 0; j < n_; ++j) w += g(i, j) * draws[d_ + j];
    const double u_old = s.u[i];
    s.u[i] = u_old - dt_ / tau * u_old + sqrt_dt_ / tau * w + noise * draws[i];
    s.x[i] += u_old * dt_;
  }
}

void Stepper::colored_tracer(ParticleState& s, const double* draws) const {
  const SmallMatrix f = model_.flow.eval_unchecked(s.x.data());
  const double noise = model_.sigma * sqrt_dt_;
  double next[kMaxDim];
  for (int i = 0; i < d_; ++i) {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += f(i, j) * s.mu[j];
    next[i] = s.x[i] + v * dt_ + noise * draws[i];
  }
  for (int i = 0; i < d_; ++i) s.x[i] = next[i];
  ou_.step(s.mu.data(), draws + d_);
}

void Stepper::white_tracer(ParticleState& s, const double* draws) const {
  const double noise = model_.sigma * sqrt_dt_;
  const SmallMatrix g0 = white_gain(s.x.data());
  double dw[kMaxDim], pred[kMaxDim], incr0[kMaxDim];
  for (int j = 0; j < n_; ++j) dw[j] = sqrt_dt_ * draws[d_ + j];
  for (int i = 0; i < d_; ++i) {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += g0(i, j) * dw[j];
    incr0[i] = v;
    pred[i] = s.x[i] + v + noise * draws[i];
  }
  if (model_.ito_white_tracer) {
    for (int i = 0; i < d_; ++i) s.x[i] = pred[i];
    return;
  }
  const SmallMatrix g1 = white_gain(pred);
  for (int i = 0; i < d_; ++i) {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += g1(i, j) * dw[j];
    s.x[i] = s.x[i] + 0.5 * (incr0[i] + v) + noise * draws[i];
  }
}

bool is_finite(const ParticleState& s, int d, int n) {
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += s.x[i] + s.u[i];
  for (int j = 0; j < n; ++j) acc += s.mu[j];
  return std::isfinite(acc);
}

namespace {

ParticleState checked_step(const ParticleState& s, double dt, const ModelParams& m,
                           std::span<const double> draws, ModelKind expected) {
  if (m.kind != expected)
    throw std::invalid_argument("step function called with model kind " + std::string(to_string(m.kind)));
  if (static_cast<int>(draws.size()) != m.draws_per_step())
    throw std::invalid_argument("step requires d + n standard normal draws");
  if (!is_finite(s, m.dim_d(), m.dim_n()))
    throw NumericalError("non-finite particle state passed to step", 0, 0);
  ParticleState out = s;
  Stepper(m, dt).step(out, draws.data());
  return out;
}

}  // namespace

ParticleState colored_inertial_step(const ParticleState& s, double dt, const ModelParams& m,
                                    std::span<const double> draws) {
  return checked_step(s, dt, m, draws, ModelKind::ColoredInertial);
}

ParticleState white_inertial_step(const ParticleState& s, double dt, const ModelParams& m,
                                  std::span<const double> draws) {
  return checked_step(s, dt, m, draws, ModelKind::WhiteInertial);
}

ParticleState colored_tracer_step(const ParticleState& s, double dt, const ModelParams& m,
                                  std::span<const double> draws) {
  return checked_step(s, dt, m, draws, ModelKind::ColoredTracer);
}

ParticleState white_tracer_step(const ParticleState& s, double dt, const ModelParams& m,
                                std::span<const double> draws) {
  return checked_step(s, dt, m, draws, ModelKind::WhiteTracer);
}

ParticleState step_particle(const ParticleState& s, double dt, const ModelParams& m,
                            std::span<const double> draws) {
  return checked_step(s, dt, m, draws, m.kind);
}

RankResult check_hypoellipticity_rank(const ModelParams& m, std::span<const double> z,
                                      std::span<const double> mu) {
  if (!is_inertial(m.kind)) throw std::invalid_argument("hypoellipticity check needs an inertial model");
  const int d = m.dim_d(), n = m.dim_n();
  if (static_cast<int>(z.size()) != d || static_cast<int>(mu.size()) != n)
    throw std::invalid_argument("hypoellipticity check: point dimension mismatch");
  const int dim = 2 * d + n;
  const double tau = m.tau;

  const SmallMatrix f = m.flow.eval(z);
  const auto df = m.flow.derivatives(z);

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < d; ++i) {
    jac(i, d + i) = 1.0;
    jac(d + i, d + i) = -1.0 / tau;
    for (int l = 0; l < d; ++l) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += df[l](i, j) * mu[j];
      jac(d + i, l) = v / tau;
    }
    for (int j = 0; j < n; ++j) jac(d + i, 2 * d + j) = f(i, j) / tau;
  }
  jac.bottomRightCorner(n, n) = -m.ou.A();

  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(dim, d + n);
  for (int i = 0; i < d; ++i) noise(d + i, i) = m.sigma / tau;
  Eigen::VectorXd root(n);
  for (int j = 0; j < n; ++j) root(j) = std::sqrt(m.ou.noise_eigenvalues()(j));
  noise.bottomRightCorner(n, n) = m.ou.basis() * root.asDiagonal() * m.ou.basis().transpose();

  // Noise directions, then J^k applied to them (first-order brackets with the
  // linearised drift), each column normalised before the rank decision.
  Eigen::MatrixXd span(dim, (d + n) * dim);
  Eigen::MatrixXd block = noise;
  for (int k = 0; k < dim; ++k) {
    span.middleCols(k * (d + n), d + n) = block;
    block = jac * block;
  }
  for (Eigen::Index c = 0; c < span.cols(); ++c) {
    const double norm = span.col(c).norm();
    if (norm > 0.0) span.col(c) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(span);
  const auto& sv = svd.singularValues();
  int rank = 0;
  const double threshold = 1e-9 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  return {rank, dim, rank == dim};
}

}  // namespace ipdiff
