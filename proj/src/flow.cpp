#include "ipdiff/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ipdiff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_period(const std::vector<double>& period, int dim_d) {
  if (static_cast<int>(period.size()) != dim_d)
    throw ConfigError("flow period must have " + std::to_string(dim_d) + " entries");
  for (double p : period)
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("flow period entries must be positive");
}

void check_series(const std::vector<FourierSeries>& series, int dim_d) {
  for (const auto& s : series)
    for (const auto& m : s)
      if (static_cast<int>(m.wavevector.size()) != dim_d)
        throw ConfigError("Fourier mode wavevector must have " + std::to_string(dim_d) + " entries");
}

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr unsigned kHaltonBases[kMaxDim] = {2, 3, 5, 7};

}  // namespace

FlowField FlowField::taylor_green(double amplitude) {
  FlowField f;
  f.kind_ = FlowKind::TaylorGreen;
  f.dim_d_ = 2;
  f.dim_n_ = 1;
  f.period_ = {kTwoPi, kTwoPi};
  f.reciprocal_ = {1.0, 1.0};
  f.amplitude_ = amplitude;
  f.series_ = {taylor_green_modes()};
  return f;
}

FourierSeries FlowField::taylor_green_modes() {
  return {FourierMode{{1, -1}, 0.5, 0.0}, FourierMode{{1, 1}, -0.5, 0.0}};
}

FlowField FlowField::stream_function(std::vector<FourierSeries> psi, std::vector<double> period,
                                     double amplitude) {
  if (psi.empty() || static_cast<int>(psi.size()) > kMaxDim)
    throw ConfigError("stream-function flow needs between 1 and " + std::to_string(kMaxDim) +
                      " modulation components");
  check_period(period, 2);
  check_series(psi, 2);
  FlowField f;
  f.kind_ = FlowKind::StreamFunctionFourier;
  f.dim_d_ = 2;
  f.dim_n_ = static_cast<int>(psi.size());
  f.period_ = std::move(period);
  for (double p : f.period_) f.reciprocal_.push_back(kTwoPi / p);
  f.amplitude_ = amplitude;
  f.series_ = std::move(psi);
  return f;
}

FlowField FlowField::coefficient_table(int dim_d, int dim_n, std::vector<FourierSeries> entries,
                                       std::vector<double> period, double amplitude) {
  if (dim_d < 1 || dim_d > kMaxDim || dim_n < 1 || dim_n > kMaxDim)
    throw ConfigError("coefficient table dimensions out of range");
  if (static_cast<int>(entries.size()) != dim_d * dim_n)
    throw ConfigError("coefficient table needs dim_d * dim_n entries");
  check_period(period, dim_d);
  check_series(entries, dim_d);
  FlowField f;
  f.kind_ = FlowKind::CoefficientTable;
  f.dim_d_ = dim_d;
  f.dim_n_ = dim_n;
  f.period_ = std::move(period);
  for (double p : f.period_) f.reciprocal_.push_back(kTwoPi / p);
  f.amplitude_ = amplitude;
  f.series_ = std::move(entries);
  return f;
}

FlowField FlowField::with_amplitude(double amplitude) const {
  FlowField f = *this;
  f.amplitude_ = amplitude;
  return f;
}

double FlowField::wrap(double value, int axis) const {
  const double p = period_[axis];
  double w = value - p * std::floor(value / p);
  if (w >= p) w = 0.0;
  return w;
}

SmallMatrix FlowField::eval(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim_d_)
    throw std::invalid_argument("eval_F: position has " + std::to_string(z.size()) +
                                " entries, flow dimension is " + std::to_string(dim_d_));
  return eval_unchecked(z.data());
}

SmallMatrix FlowField::eval_unchecked(const double* z) const {
  SmallMatrix out(dim_d_, dim_n_);
  double w[kMaxDim];
  for (int i = 0; i < dim_d_; ++i) w[i] = wrap(z[i], i);

  if (kind_ == FlowKind::TaylorGreen) {
    double s1, c1, s2, c2;
    ::sincos(w[0], &s1, &c1);
    ::sincos(w[1], &s2, &c2);
    out(0, 0) = amplitude_ * -(s1 * c2);
    out(1, 0) = amplitude_ * (c1 * s2);
    return out;
  }
  eval_series(w, out);
  return out;
}

void FlowField::eval_series(const double* w, SmallMatrix& out) const {
  auto phase_of = [&](const FourierMode& m) {
    double theta = m.phase;
    for (int i = 0; i < dim_d_; ++i) theta += m.wavevector[i] * reciprocal_[i] * w[i];
    return theta;
  };
  if (kind_ == FlowKind::StreamFunctionFourier) {
    for (int j = 0; j < dim_n_; ++j) {
      double f0 = 0.0, f1 = 0.0;
      for (const auto& m : series_[j]) {
        const double s = m.amplitude * std::sin(phase_of(m));
        f0 += s * m.wavevector[1] * reciprocal_[1];   // -d psi / dz_2
        f1 -= s * m.wavevector[0] * reciprocal_[0];   //  d psi / dz_1
      }
      out(0, j) = amplitude_ * f0;
      out(1, j) = amplitude_ * f1;
    }
    return;
  }
  for (int i = 0; i < dim_d_; ++i)
    for (int j = 0; j < dim_n_; ++j) {
      double v = 0.0;
      for (const auto& m : series_[i * dim_n_ + j]) v += m.amplitude * std::cos(phase_of(m));
      out(i, j) = amplitude_ * v;
    }
}

std::array<SmallMatrix, kMaxDim> FlowField::derivatives(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim_d_)
    throw std::invalid_argument("derivatives: position dimension mismatch");
  std::array<SmallMatrix, kMaxDim> out;
  for (int l = 0; l < dim_d_; ++l) out[l] = SmallMatrix(dim_d_, dim_n_);
  double w[kMaxDim];
  for (int i = 0; i < dim_d_; ++i) w[i] = wrap(z[i], i);

  if (kind_ == FlowKind::TaylorGreen) {
    double s1, c1, s2, c2;
    ::sincos(w[0], &s1, &c1);
    ::sincos(w[1], &s2, &c2);
    const double a = amplitude_;
    out[0](0, 0) = -a * c1 * c2;
    out[1](0, 0) = a * s1 * s2;
    out[0](1, 0) = -a * s1 * s2;
    out[1](1, 0) = a * c1 * c2;
    return out;
  }

  auto phase_of = [&](const FourierMode& m) {
    double theta = m.phase;
    for (int i = 0; i < dim_d_; ++i) theta += m.wavevector[i] * reciprocal_[i] * w[i];
    return theta;
  };
  if (kind_ == FlowKind::StreamFunctionFourier) {
    for (int j = 0; j < dim_n_; ++j)
      for (const auto& m : series_[j]) {
        const double c = amplitude_ * m.amplitude * std::cos(phase_of(m));
        const double k0 = m.wavevector[0] * reciprocal_[0];
        const double k1 = m.wavevector[1] * reciprocal_[1];
        for (int l = 0; l < 2; ++l) {
          const double kl = m.wavevector[l] * reciprocal_[l];
          out[l](0, j) += c * k1 * kl;
          out[l](1, j) -= c * k0 * kl;
        }
      }
    return out;
  }
  for (int i = 0; i < dim_d_; ++i)
    for (int j = 0; j < dim_n_; ++j)
      for (const auto& m : series_[i * dim_n_ + j]) {
        const double s = amplitude_ * m.amplitude * std::sin(phase_of(m));
        for (int l = 0; l < dim_d_; ++l) out[l](i, j) -= s * m.wavevector[l] * reciprocal_[l];
      }
  return out;
}

double FlowField::sup_norm(int grid_per_axis) const {
  std::size_t total = 1;
  for (int i = 0; i < dim_d_; ++i) total *= static_cast<std::size_t>(grid_per_axis);
  double best = 0.0;
  double z[kMaxDim];
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int i = 0; i < dim_d_; ++i) {
      z[i] = period_[i] * static_cast<double>(rem % grid_per_axis) / grid_per_axis;
      rem /= grid_per_axis;
    }
    const SmallMatrix f = eval_unchecked(z);
    Eigen::MatrixXd m(dim_d_, dim_n_);
    for (int i = 0; i < dim_d_; ++i)
      for (int j = 0; j < dim_n_; ++j) m(i, j) = f(i, j);
    const double norm = dim_n_ == 1 ? m.norm() : Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    best = std::max(best, norm);
  }
  return best;
}

ParityResult check_parity(const FlowField& flow, std::size_t samples, double tol) {
  if (samples < 1) throw std::invalid_argument("check_parity: samples must be >= 1");
  const int d = flow.dim_d();
  double worst = 0.0;
  double z[kMaxDim], mz[kMaxDim];
  for (std::size_t s = 1; s <= samples; ++s) {
    for (int i = 0; i < d; ++i) {
      z[i] = flow.period()[i] * radical_inverse(s, kHaltonBases[i]);
      mz[i] = -z[i];
    }
    const SmallMatrix a = flow.eval_unchecked(z);
    const SmallMatrix b = flow.eval_unchecked(mz);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < flow.dim_n(); ++j) worst = std::max(worst, std::abs(a(i, j) + b(i, j)));
  }
  return {worst <= tol, worst};
}

DivergenceResult check_divergence_free(const FlowField& flow, int grid_per_axis, double tol) {
  if (grid_per_axis < 4) throw std::invalid_argument("check_divergence_free: grid must be >= 4");
  const int d = flow.dim_d();
  const int n = flow.dim_n();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(grid_per_axis);

  double worst = 0.0;
  double z[kMaxDim], zs[kMaxDim];
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int i = 0; i < d; ++i) {
      z[i] = flow.period()[i] * static_cast<double>(rem % grid_per_axis) / grid_per_axis;
      rem /= grid_per_axis;
    }
    double div[kMaxDim] = {0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) {
      const double h = flow.period()[i] / grid_per_axis;
      auto shifted = [&](double offset) {
        std::copy(z, z + d, zs);
        zs[i] += offset;
        return flow.eval_unchecked(zs);
      };
      const SmallMatrix p1 = shifted(h), p2 = shifted(2 * h);
      const SmallMatrix m1 = shifted(-h), m2 = shifted(-2 * h);
      for (int j = 0; j < n; ++j)
        div[j] += (-p2(i, j) + 8.0 * p1(i, j) - 8.0 * m1(i, j) + m2(i, j)) / (12.0 * h);
    }
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(div[j]));
  }
  return {worst, worst <= tol};
}

}  // namespace ipdiff
