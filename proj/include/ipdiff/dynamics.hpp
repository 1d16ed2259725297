#pragma once

#include <span>
#include <string>
#include <string_view>

#include "ipdiff/common.hpp"
#include "ipdiff/flow.hpp"
#include "ipdiff/ou.hpp"

namespace ipdiff {

enum class ModelKind { ColoredInertial, WhiteInertial, ColoredTracer, WhiteTracer };

constexpr bool is_inertial(ModelKind k) {
  return k == ModelKind::ColoredInertial || k == ModelKind::WhiteInertial;
}
constexpr bool is_colored(ModelKind k) {
  return k == ModelKind::ColoredInertial || k == ModelKind::ColoredTracer;
}

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Tracer counterpart (tau = 0) of an inertial kind, and vice versa.
ModelKind tracer_of(ModelKind kind);
ModelKind inertial_of(ModelKind kind);
/// Colored <-> white partner with the same inertia.
ModelKind partner_of(ModelKind kind);

/// One fully specified particle model.
///
/// Colored:  tau x'' = F(x) mu - x' + sigma xi,  mu an OU process.
/// White:    tau x'' = F(x) A^{-1} sqrt(Lambda) zeta - x' + sigma xi.
/// Tracer kinds drop inertia (tau is ignored and reported as 0).
struct ModelParams {
  double tau = 1.0;
  double sigma = 0.1;
  FlowField flow = FlowField::taylor_green();
  OUParams ou = OUParams::scalar(1.0, 1.0, 1.0);
  ModelKind kind = ModelKind::ColoredInertial;
  /// White tracer only: plain Euler-Maruyama (Ito) instead of Heun.
  bool ito_white_tracer = false;

  int dim_d() const { return flow.dim_d(); }
  int dim_n() const { return flow.dim_n(); }
  /// Standard normals consumed per step: d molecular + n modulation.
  int draws_per_step() const { return dim_d() + dim_n(); }
  double effective_tau() const { return is_inertial(kind) ? tau : 0.0; }

  void validate() const;
};

/// Unwrapped position, velocity (inertial kinds only) and modulation state.
struct ParticleState {
  Vec x{};
  Vec u{};
  Vec mu{};
};

/// Largest step for which the explicit coupling stays accurate:
/// min(tau, delta)/20 for colored inertial, tau/20 for white inertial,
/// delta/20 for the colored tracer, unbounded for the white tracer.
double dt_max(const ModelParams& m);

/// Precomputed single-particle kernel for a fixed model and step.
///
/// Draw layout per step: entries [0, d) drive the molecular noise, entries
/// [d, d+n) drive the modulation (OU increment or white velocity noise).
class Stepper {
 public:
  Stepper(const ModelParams& m, double dt);

  void step(ParticleState& s, const double* draws) const;

  double dt() const { return dt_; }
  const ModelParams& model() const { return model_; }
  const OUStepper& ou() const { return ou_; }

 private:
  void colored_inertial(ParticleState& s, const double* draws) const;
  void white_inertial(ParticleState& s, const double* draws) const;
  void colored_tracer(ParticleState& s, const double* draws) const;
  void white_tracer(ParticleState& s, const double* draws) const;
  /// G = F(x) A^{-1} sqrt(Lambda), the white velocity noise matrix.
  SmallMatrix white_gain(const double* x) const;

  ModelParams model_;
  OUStepper ou_;
  double dt_;
  double sqrt_dt_;
  int d_;
  int n_;
  SmallMatrix white_factor_;  // A^{-1} sqrt(Lambda), n x n
};

ParticleState colored_inertial_step(const ParticleState& s, double dt, const ModelParams& m,
                                    std::span<const double> draws);
ParticleState white_inertial_step(const ParticleState& s, double dt, const ModelParams& m,
                                  std::span<const double> draws);
ParticleState colored_tracer_step(const ParticleState& s, double dt, const ModelParams& m,
                                  std::span<const double> draws);
/// Stratonovich (Heun predictor-corrector) step for the white tracer, or
/// Euler-Maruyama when m.ito_white_tracer is set.
ParticleState white_tracer_step(const ParticleState& s, double dt, const ModelParams& m,
                                std::span<const double> draws);
/// Dispatch on m.kind.
ParticleState step_particle(const ParticleState& s, double dt, const ModelParams& m,
                            std::span<const double> draws);

bool is_finite(const ParticleState& s, int d, int n);

struct RankResult {
  int rank = 0;
  int target = 0;
  bool full = false;
};

/// Dimension of the span of the noise directions of the fast process
/// (dz = y dt, dy = (F mu - y)/tau dt + sigma/tau dW1, dmu = -A mu dt +
/// sqrt(Lambda) dW2) together with repeated products with the drift Jacobian
///   J = [0 I 0; DF/tau -I/tau F/tau; 0 0 -A],
/// evaluated at (z, mu). Full rank is 2d + n.
RankResult check_hypoellipticity_rank(const ModelParams& m, std::span<const double> z,
                                      std::span<const double> mu);

}  // namespace ipdiff
