#include <doctest.h>

#include <cmath>
#include <vector>

#include "ipdiff/common.hpp"
#include "ipdiff/ou.hpp"
#include "ipdiff/rng.hpp"

using namespace ipdiff;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= v.size();
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= (v.size() - 1);
  return m;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int i = 0;
  for (auto r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("stationary covariance closed form") {
  CHECK(stationary_covariance(OUParams::scalar(1, 1, 1))(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stationary_covariance(OUParams::scalar(1, 1, 0.1))(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(stationary_covariance(OUParams::scalar(1, 0, 1)).norm() == 0.0);
  const auto c = stationary_covariance(OUParams::diagonal({2.0, 0.5}, {1.0, 2.0}, 0.1));
  CHECK(c(0, 0) == doctest::Approx(1.0 / (2 * 2.0 * 0.1)));
  CHECK(c(1, 1) == doctest::Approx(4.0 / (2 * 0.5 * 0.1)));
  CHECK(c(0, 1) == 0.0);
}

TEST_CASE("stationary covariance solves the Lyapunov equation in a rotated basis") {
  // A and Lambda commute but are not diagonal.
  const OUParams p(mat({{2.0, 0.5}, {0.5, 2.0}}), mat({{1.0, 0.25}, {0.25, 1.0}}), 0.3);
  CHECK_FALSE(p.identity_basis());
  const auto c = stationary_covariance(p);
  const Eigen::MatrixXd res = p.A() * c + c * p.A() - p.Lambda() / p.delta();
  CHECK(res.norm() < 1e-12);
}

TEST_CASE("invalid OU parameters") {
  CHECK_THROWS_AS(OUParams::scalar(1, 1, 0), ConfigError);
  CHECK_THROWS_AS(OUParams::scalar(-1, 1, 1), ConfigError);
  CHECK_THROWS_AS(OUParams(mat({{1.0, 0.3}, {0.0, 1.0}}), mat({{1.0, 0.0}, {0.0, 1.0}}), 1.0), ConfigError);
  CHECK_THROWS_AS(OUParams(mat({{1.0, 0.0}, {0.0, 2.0}}), mat({{1.0, 0.5}, {0.5, 1.0}}), 1.0), ConfigError);
  CHECK_THROWS_AS(OUParams(mat({{1.0, 0.0}, {0.0, 1.0}}), mat({{-1.0, 0.0}, {0.0, 1.0}}), 1.0), ConfigError);
}

TEST_CASE("exact step: pure decay") {
  const auto p = OUParams::scalar(1, 0, 1);
  Eigen::VectorXd mu(1);
  mu << 1.0;
  const std::vector<double> g{0.7};
  const auto out = ou_exact_step(mu, std::log(2.0), p, g);
  CHECK(out(0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("exact step: conditional moments against sampling") {
  const auto p = OUParams::scalar(1, 1, 1);
  const double dt = 0.1;
  const double want = 0.5 * (1 - std::exp(-0.2));
  CHECK(want == doctest::Approx(0.0906346).epsilon(1e-6));
  OUStepper st(p, dt);
  CHECK(st.conditional_covariance()(0, 0) == doctest::Approx(want).epsilon(1e-14));

  RandomStream rng(1, StreamDomain::Synthetic, 0);
  const int n = 1000000;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double mu = 0.8, g = rng.normal();
    st.step(&mu, &g);
    out[i] = mu;
  }
  const auto m = moments(out);
  CHECK(std::abs(m.mean - 0.8 * std::exp(-0.1)) < 3 * std::sqrt(want / n));
  CHECK(std::abs(m.var - want) < 3 * want * std::sqrt(2.0 / n));
}

TEST_CASE("exact step: long step forgets the start") {
  const auto p = OUParams::scalar(2, 1.5, 0.5);
  OUStepper st(p, 200.0);
  CHECK(st.decay_matrix()(0, 0) < 1e-300);
  CHECK(st.conditional_covariance()(0, 0) == doctest::Approx(stationary_covariance(p)(0, 0)).epsilon(1e-15));
}

TEST_CASE("two half steps equal one full step") {
  const OUParams rotated(mat({{2.0, 0.5}, {0.5, 2.0}}), mat({{1.0, 0.25}, {0.25, 1.0}}), 0.3);
  for (const auto& p : {OUParams::scalar(1, 1, 1), OUParams::scalar(2, 1, 0.1), OUParams::scalar(0.5, 2, 1), rotated}) {
    for (double dt : {1e-3, 0.05, 1.0, 7.0}) {
      const OUStepper full(p, dt), half(p, dt / 2);
      const Eigen::MatrixXd E = full.decay_matrix(), Eh = half.decay_matrix();
      const Eigen::MatrixXd C = full.conditional_covariance(), Ch = half.conditional_covariance();
      CHECK((E - Eh * Eh).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((C - (Eh * Ch * Eh.transpose() + Ch)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("stationary law is preserved by one step") {
  for (const auto& p : {OUParams::scalar(1, 1, 1), OUParams::scalar(2, 1, 0.1), OUParams::diagonal({0.5, 3}, {2, 1}, 1)}) {
    const OUStepper st(p, 0.37);
    const Eigen::MatrixXd cinf = stationary_covariance(p);
    const Eigen::MatrixXd E = st.decay_matrix();
    const Eigen::MatrixXd next = E * cinf * E.transpose() + st.conditional_covariance();
    CHECK((next - cinf).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, cinf.norm()));
  }
}

TEST_CASE("halving delta halves the correlation time") {
  const auto p = OUParams::scalar(1.3, 0.7, 0.4);
  for (double t : {0.01, 0.3, 2.0}) {
    const double a = OUStepper(p, t).decay_matrix()(0, 0);
    const double b = OUStepper(p.with_delta(2 * 0.4), 2 * t).decay_matrix()(0, 0);
    CHECK(std::abs(a - b) <= 1e-15);
  }
}

TEST_CASE("stationary sampling") {
  CHECK(sample_stationary(OUParams::scalar(1, 0, 1), std::vector<double>{1.3})(0) == 0.0);
  struct Case {
    double alpha, lambda, delta;
  };
  for (const Case c : {Case{1, 1, 1}, Case{2, 1, 0.1}, Case{0.5, 2, 1}}) {
    const auto p = OUParams::scalar(c.alpha, c.lambda, c.delta);
    const double want = c.lambda * c.lambda / (2 * c.alpha * c.delta);
    RandomStream rng(2, StreamDomain::Synthetic, 1);
    const int n = 1000000;
    std::vector<double> v(n);
    for (auto& x : v) {
      const double g = rng.normal();
      x = sample_stationary(p, std::span<const double>(&g, 1))(0);
    }
    const auto m = moments(v);
    CHECK(std::abs(m.var - want) < 3 * want * std::sqrt(2.0 / n));
    CHECK(std::abs(m.mean) < 3 * std::sqrt(want / n));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const auto p = OUParams::scalar(1, 1, 1);
  Eigen::VectorXd mu(2);
  mu.setZero();
  CHECK_THROWS_AS(ou_exact_step(mu, 0.1, p, std::vector<double>{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(OUStepper(p, 0.0), std::invalid_argument);
}
