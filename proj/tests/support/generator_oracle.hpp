#pragma once

#include <vector>

#include "ipdiff/verify.hpp"

namespace ipdiff::testing {

// Generator of dz = y dt, dy = (F mu - y)/tau dt + sigma/tau dB,
// dmu = -A mu dt + sqrt(Lambda) dW applied to V by central differences.
inline double fd_generator(const ModelParams& m, const LyapunovSpec& spec, const std::vector<double>& z,
                           const std::vector<double>& y, const std::vector<double>& mu) {
  const int d = m.dim_d(), n = m.dim_n();
  const double h = 0.1, tau = m.tau;
  auto V = [&](const std::vector<double>& yy, const std::vector<double>& mm) { return lyapunov_V(spec, yy, mm); };
  const auto f = m.flow.eval(z);
  double out = 0.0;
  for (int i = 0; i < d; ++i) {
    auto yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    const double vp = V(yp, mu), vm = V(ym, mu), v0 = V(y, mu);
    double drift = -y[i];
    for (int j = 0; j < n; ++j) drift += f(i, j) * mu[j];
    out += drift / tau * (vp - vm) / (2 * h);
    out += 0.5 * (m.sigma / tau) * (m.sigma / tau) * (vp - 2 * v0 + vm) / (h * h);
  }
  // V does not depend on z, so the dz = y dt transport contributes nothing.
  const auto& A = m.ou.A();
  const auto& L = m.ou.Lambda();
  for (int j = 0; j < n; ++j) {
    auto mp = mu, mm = mu;
    mp[j] += h;
    mm[j] -= h;
    double drift = 0.0;
    for (int k = 0; k < n; ++k) drift -= A(j, k) * mu[k];
    out += drift * (V(y, mp) - V(y, mm)) / (2 * h);
    for (int k = 0; k < n; ++k) {
      auto pp = mu, pm = mu, mp2 = mu, mm2 = mu;
      pp[j] += h, pp[k] += h;
      pm[j] += h, pm[k] -= h;
      mp2[j] -= h, mp2[k] += h;
      mm2[j] -= h, mm2[k] -= h;
      const double second = (V(y, pp) - V(y, pm) - V(y, mp2) + V(y, mm2)) / (4 * h * h);
      out += 0.5 * L(j, k) * second;
    }
  }
  return out;
}

}  // namespace ipdiff::testing
