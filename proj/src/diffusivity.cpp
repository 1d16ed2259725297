#include "ipdiff/diffusivity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace ipdiff {

double DiffusivityEstimate::isotropic() const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += k(a, a);
  return s / dim;
}

double DiffusivityEstimate::isotropic_se() const {
  // Diagonal entries treated as independent; conservative enough for isotropic flows.
  double v = 0.0;
  for (int a = 0; a < dim; ++a) v += se(a, a) * se(a, a);
  return std::sqrt(v) / dim;
}

nlohmann::json DiffusivityEstimate::to_json() const {
  return {{"dim", dim},
          {"K", K},
          {"K_sym", K_sym},
          {"stderr", std_error},
          {"drift_V", drift.V},
          {"drift_se", drift.se},
          {"drift_flagged", drift.flagged},
          {"window", {t_lo, t_hi}},
          {"window_points", window_points},
          {"slope_diag", slope_diag},
          {"particles", particles}};
}

KTrace k_trace(const EnsembleStats& stats) {
  const int d = stats.dim();
  KTrace tr;
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const double n = static_cast<double>(stats.count(k));
    if (n < 2) throw std::invalid_argument("estimate_K: fewer than 2 particles at a checkpoint");
    const double t = stats.times()[k];
    const auto c = stats.covariance(k);
    const auto m4 = stats.centered_fourth(k);
    std::vector<double> kk(d * d), se(d * d);
    for (int i = 0; i < d * d; ++i) {
      kk[i] = c[i] / (2.0 * t);
      se[i] = std::sqrt(std::max(m4[i] - c[i] * c[i], 0.0) / n) / (2.0 * t);
    }
    tr.t.push_back(t);
    tr.K.push_back(std::move(kk));
    tr.se.push_back(std::move(se));
  }
  return tr;
}

std::vector<double> symmetrize(const std::vector<double>& K, int dim) {
  std::vector<double> out(K.size());
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) out[a * dim + b] = 0.5 * (K[a * dim + b] + K[b * dim + a]);
  return out;
}

double min_eigenvalue(const std::vector<double>& sym, int dim) {
  Eigen::MatrixXd m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) m(a, b) = sym[a * dim + b];
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

DriftEstimate estimate_drift(const EnsembleStats& stats) {
  if (stats.size() < 2) throw std::invalid_argument("estimate_drift: needs at least 2 checkpoints");
  const std::size_t last = stats.size() - 1;
  const double t = stats.times()[last];
  const double n = static_cast<double>(stats.count(last));
  const int d = stats.dim();
  const auto m = stats.mean(last);
  const auto c = stats.covariance(last);
  DriftEstimate out;
  for (int a = 0; a < d; ++a) {
    out.V.push_back(m[a] / t);
    out.se.push_back(std::sqrt(std::max(c[a * d + a], 0.0) / n) / t);
    if (std::abs(out.V[a]) > 3.0 * out.se[a]) out.flagged = true;
  }
  return out;
}

DiffusivityEstimate estimate_K(const EnsembleStats& stats, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("estimate_K: window_fraction must lie in (0, 1]");
  if (stats.empty() || stats.size() == 0) throw std::invalid_argument("estimate_K: no checkpoints");
  const int d = stats.dim();
  const KTrace tr = k_trace(stats);
  const double t_last = tr.t.back();
  const double t_cut = (1.0 - window_fraction) * t_last;
  std::vector<std::size_t> win;
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    if (tr.t[k] >= t_cut) win.push_back(k);
  if (win.size() < 4) throw std::invalid_argument("estimate_K: fewer than 4 checkpoints in the window");

  DiffusivityEstimate est;
  est.dim = d;
  est.K.assign(d * d, 0.0);
  est.std_error.assign(d * d, 0.0);
  est.t_lo = tr.t[win.front()];
  est.t_hi = t_last;
  est.window_points = win.size();
  est.particles = stats.count(win.back());

  for (int e = 0; e < d * d; ++e) {
    std::vector<double> w(win.size());
    bool degenerate = false;
    for (std::size_t j = 0; j < win.size(); ++j) {
      const double s = tr.se[win[j]][e];
      if (!(s > 0.0)) degenerate = true;
      w[j] = s > 0.0 ? 1.0 / (s * s) : 0.0;
    }
    // Zero spread (deterministic input): plain average, zero error.
    if (degenerate) std::fill(w.begin(), w.end(), 1.0);
    double wsum = 0.0, ksum = 0.0;
    for (std::size_t j = 0; j < win.size(); ++j) {
      wsum += w[j];
      ksum += w[j] * tr.K[win[j]][e];
    }
    est.K[e] = ksum / wsum;
    double var = 0.0;
    for (std::size_t j = 0; j < win.size(); ++j)
      for (std::size_t l = 0; l < win.size(); ++l) {
        const double tj = tr.t[win[j]], tl = tr.t[win[l]];
        const double rho = std::min(tj, tl) / std::max(tj, tl);
        var += w[j] * w[l] * tr.se[win[j]][e] * tr.se[win[l]][e] * rho;
      }
    est.std_error[e] = std::sqrt(var) / wsum;
  }
  est.K_sym = symmetrize(est.K, d);

  // Least-squares slope of K_11 against t over the window.
  double tm = 0.0, km = 0.0;
  for (std::size_t k : win) {
    tm += tr.t[k];
    km += tr.K[k][0];
  }
  tm /= win.size();
  km /= win.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k : win) {
    sxy += (tr.t[k] - tm) * (tr.K[k][0] - km);
    sxx += (tr.t[k] - tm) * (tr.t[k] - tm);
  }
  est.slope_diag = sxx > 0.0 && est.K[0] != 0.0 ? (sxy / sxx) / est.K[0] : 0.0;

  est.drift = estimate_drift(stats);
  return est;
}

}  // namespace ipdiff
