#include "ipdiff/verify.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ipdiff/rng.hpp"

namespace ipdiff {

LyapunovSpec LyapunovSpec::textbook(const ModelParams& m) {
  const double tau = m.tau;
  const double f = m.flow.sup_norm();
  const double lambda1 = m.ou.drift_eigenvalues().minCoeff();
  LyapunovSpec s;
  s.coeff_y = tau;
  s.coeff_mu = (tau * tau * f * f + 1.0) / (2.0 * lambda1);
  s.beta = 0.5 * m.sigma * m.sigma * m.dim_d() + 0.5 * m.ou.Lambda().trace() + 1.0;
  return s;
}

double lyapunov_V(const LyapunovSpec& spec, std::span<const double> y, std::span<const double> mu) {
  double yy = 0.0, mm = 0.0;
  for (double v : y) yy += v * v;
  for (double v : mu) mm += v * v;
  return 1.0 + spec.coeff_y * yy + spec.coeff_mu * mm;
}

double lyapunov_generator(const ModelParams& m, const LyapunovSpec& spec, std::span<const double> z,
                          std::span<const double> y, std::span<const double> mu) {
  const int d = m.dim_d(), n = m.dim_n();
  const double tau = m.tau;
  const SmallMatrix f = m.flow.eval(z);
  double yfmu = 0.0, yy = 0.0;
  for (int i = 0; i < d; ++i) {
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += f(i, j) * mu[j];
    yfmu += y[i] * v;
    yy += y[i] * y[i];
  }
  double mam = 0.0;
  const auto& A = m.ou.A();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) mam += mu[j] * A(j, k) * mu[k];
  return 2.0 * spec.coeff_y / tau * (yfmu - yy) - 2.0 * spec.coeff_mu * mam +
         spec.coeff_y * m.sigma * m.sigma * d / (tau * tau) + spec.coeff_mu * m.ou.Lambda().trace();
}

namespace {

void ball_point(RandomStream& rng, double radius, int dim, std::vector<double>& out) {
  out.resize(dim);
  double norm = 0.0;
  for (int i = 0; i < dim; ++i) {
    out[i] = rng.normal();
    norm += out[i] * out[i];
  }
  norm = std::sqrt(norm);
  const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  for (int i = 0; i < dim; ++i) out[i] = norm > 0.0 ? out[i] / norm * r : 0.0;
}

// Quadratic part of L V + V in (y, mu) at fixed z.
Eigen::MatrixXd quadratic_form(const ModelParams& m, const LyapunovSpec& s, std::span<const double> z) {
  const int d = m.dim_d(), n = m.dim_n();
  const double tau = m.tau;
  const SmallMatrix f = m.flow.eval(z);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d + n, d + n);
  q.topLeftCorner(d, d).diagonal().setConstant(s.coeff_y - 2.0 * s.coeff_y / tau);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) q(i, d + j) = q(d + j, i) = s.coeff_y / tau * f(i, j);
  q.bottomRightCorner(n, n) = s.coeff_mu * (Eigen::MatrixXd::Identity(n, n) - 2.0 * m.ou.A());
  return q;
}

}  // namespace

std::vector<LyapunovSample> lyapunov_samples(const ModelParams& m, std::size_t count, double radius,
                                             std::uint64_t seed) {
  RandomStream rng(seed, StreamDomain::Lyapunov, 0);
  std::vector<LyapunovSample> out(count);
  for (auto& s : out) {
    s.z.resize(m.dim_d());
    for (int i = 0; i < m.dim_d(); ++i) s.z[i] = rng.uniform() * m.flow.period()[i];
    ball_point(rng, radius, m.dim_d(), s.y);
    ball_point(rng, radius, m.dim_n(), s.mu);
  }
  return out;
}

LyapunovResult lyapunov_drift_check(const ModelParams& m, const LyapunovSpec& spec, std::size_t samples,
                                    double radius, std::uint64_t seed) {
  if (m.kind != ModelKind::ColoredInertial) throw std::invalid_argument("Lyapunov check needs the colored inertial model");
  if (samples < 1) throw std::invalid_argument("Lyapunov check needs at least one sample");
  if (!(spec.coeff_y > 0.0 && spec.coeff_mu > 0.0)) throw std::invalid_argument("Lyapunov coefficients must be positive");
  m.validate();

  const auto pts = lyapunov_samples(m, samples, radius, seed);
  LyapunovResult r;
  r.samples = samples;
  r.fitted_beta = -std::numeric_limits<double>::infinity();
  bool nsd = true;
  for (const auto& p : pts) {
    const double g = lyapunov_generator(m, spec, p.z, p.y, p.mu) + lyapunov_V(spec, p.y, p.mu);
    r.fitted_beta = std::max(r.fitted_beta, g);
    if (nsd) {
      const Eigen::MatrixXd q = quadratic_form(m, spec, p.z);
      const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
      if (top > 1e-12 * std::max(1.0, q.norm())) nsd = false;
    }
  }
  r.max_violation = r.fitted_beta - spec.beta;
  r.passes = r.max_violation <= 0.0;
  if (nsd) {
    const double c = 1.0 + spec.coeff_y * m.sigma * m.sigma * m.dim_d() / (m.tau * m.tau) +
                     spec.coeff_mu * m.ou.Lambda().trace();
    r.analytic_sup = c;
  }
  return r;
}

CenteringResult centering_check(const ModelParams& m, double burn_in, double horizon, std::uint64_t seed, double dt,
                                int batches) {
  if (m.kind != ModelKind::ColoredInertial) throw std::invalid_argument("centering check needs the colored inertial model");
  if (!(m.sigma > 0.0)) throw std::invalid_argument("centering check needs sigma > 0");
  if (!(horizon > 0.0) || burn_in < 0.0 || batches < 2) throw std::invalid_argument("centering check: bad horizon");
  const int d = m.dim_d(), n = m.dim_n();
  const Stepper stepper(m, dt);
  RandomStream rng(seed, StreamDomain::Centering, 0);

  ParticleState s;
  double g[2 * kMaxDim];
  rng.fill_normal(g, n);
  stepper.ou().sample_stationary(s.mu.data(), g);

  const auto burn_steps = static_cast<std::size_t>(std::llround(burn_in / dt));
  const auto batch_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / dt / batches)));
  const int ndraw = m.draws_per_step();
  for (std::size_t i = 0; i < burn_steps; ++i) {
    rng.fill_normal(g, ndraw);
    stepper.step(s, g);
  }

  std::vector<std::vector<double>> means(batches, std::vector<double>(d, 0.0));
  for (int b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < batch_steps; ++i) {
      const SmallMatrix f = m.flow.eval_unchecked(s.x.data());
      for (int a = 0; a < d; ++a) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += f(a, j) * s.mu[j];
        means[b][a] += v;
      }
      rng.fill_normal(g, ndraw);
      stepper.step(s, g);
    }
    if (!is_finite(s, d, n)) throw NumericalError("non-finite state in centering trajectory", 0, b * batch_steps);
    for (int a = 0; a < d; ++a) means[b][a] /= static_cast<double>(batch_steps);
  }

  CenteringResult r;
  r.horizon = static_cast<double>(batch_steps * batches) * dt;
  r.centered = true;
  for (int a = 0; a < d; ++a) {
    double mean = 0.0;
    for (int b = 0; b < batches; ++b) mean += means[b][a];
    mean /= batches;
    double var = 0.0;
    for (int b = 0; b < batches; ++b) var += (means[b][a] - mean) * (means[b][a] - mean);
    var /= (batches - 1);
    const double se = std::sqrt(var / batches);
    r.mean_velocity_field.push_back(mean);
    r.se.push_back(se);
    if (std::abs(mean) > 3.0 * se) r.centered = false;
  }
  return r;
}

SymmetryResult symmetry_check(const DiffusivityEstimate& e) {
  if (e.dim != 2) throw std::invalid_argument("symmetry check needs d = 2");
  SymmetryResult r;
  r.diag_gap = e.k(0, 0) - e.k(1, 1);
  r.diag_gap_se = std::hypot(e.se(0, 0), e.se(1, 1));
  r.diag_equal = std::abs(r.diag_gap) <= 3.0 * r.diag_gap_se;
  r.offdiag_zero = std::abs(e.k(0, 1)) <= 3.0 * e.se(0, 1) && std::abs(e.k(1, 0)) <= 3.0 * e.se(1, 0);
  return r;
}

}  // namespace ipdiff
