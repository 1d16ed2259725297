#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ipdiff/flow.hpp"

using namespace ipdiff;
using std::numbers::pi;

namespace {

double psi_tg(double x1, double x2) { return std::sin(x1) * std::sin(x2); }

// Skew gradient of psi_TG by central differences.
std::array<double, 2> fd_column(double x1, double x2) {
  const double h = 1e-5;
  const double d1 = (psi_tg(x1 + h, x2) - psi_tg(x1 - h, x2)) / (2 * h);
  const double d2 = (psi_tg(x1, x2 + h) - psi_tg(x1, x2 - h)) / (2 * h);
  return {-d2, d1};
}

FlowField odd_stream_function() {
  // sin x1 cos x2 = 0.5 cos(x1 + x2 - pi/2) + 0.5 cos(x1 - x2 - pi/2)
  FourierSeries s{{{1, 1}, 0.5, -pi / 2}, {{1, -1}, 0.5, -pi / 2}};
  return FlowField::stream_function({s}, {2 * pi, 2 * pi});
}

}  // namespace

TEST_CASE("Taylor-Green values at reference points") {
  const auto tg = FlowField::taylor_green();
  const std::vector<std::array<double, 2>> pts{{pi / 2, 0.0}, {0.0, 0.0}, {pi / 2, pi / 2}};
  const std::vector<std::array<double, 2>> want{{-1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto f = tg.eval(pts[i]);
    const auto fd = fd_column(pts[i][0], pts[i][1]);
    CHECK(std::abs(f(0, 0) - want[i][0]) < 1e-15);
    CHECK(std::abs(f(1, 0) - want[i][1]) < 1e-15);
    CHECK(std::abs(f(0, 0) - fd[0]) < 1e-9);
    CHECK(std::abs(f(1, 0) - fd[1]) < 1e-9);
  }
}

TEST_CASE("Taylor-Green matches finite differences of the stream function") {
  const auto tg = FlowField::taylor_green();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const std::array<double, 2> z{u(gen), u(gen)};
    const auto f = tg.eval(z);
    const auto fd = fd_column(z[0], z[1]);
    CHECK(std::abs(f(0, 0) - fd[0]) < 1e-9);
    CHECK(std::abs(f(1, 0) - fd[1]) < 1e-9);
  }
}

TEST_CASE("spatial derivatives match finite differences of F") {
  const auto flow = odd_stream_function();
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 2 * pi);
  for (int i = 0; i < 50; ++i) {
    std::array<double, 2> z{u(gen), u(gen)};
    const auto df = flow.derivatives(z);
    for (int l = 0; l < 2; ++l) {
      const double h = 1e-6;
      auto zp = z, zm = z;
      zp[l] += h;
      zm[l] -= h;
      const auto fp = flow.eval(zp), fm = flow.eval(zm);
      for (int a = 0; a < 2; ++a) CHECK(std::abs(df[l](a, 0) - (fp(a, 0) - fm(a, 0)) / (2 * h)) < 1e-8);
    }
  }
}

TEST_CASE("eval rejects a position of the wrong dimension") {
  const auto tg = FlowField::taylor_green();
  const std::vector<double> z{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(tg.eval(z), std::invalid_argument);
}

TEST_CASE("invalid flows are rejected") {
  CHECK_THROWS_AS(FlowField::stream_function({FlowField::taylor_green_modes()}, {2 * pi, 0.0}), ConfigError);
  CHECK_THROWS_AS(FlowField::stream_function({FlowField::taylor_green_modes()}, {2 * pi}), ConfigError);
  FourierSeries bad{{{1, 0, 0}, 1.0, 0.0}};
  CHECK_THROWS_AS(FlowField::stream_function({bad}, {2 * pi, 2 * pi}), ConfigError);
}

TEST_CASE("periodicity under integer period shifts") {
  const auto tg = FlowField::taylor_green();
  const auto odd = odd_stream_function();
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 2 * pi);
  std::uniform_int_distribution<int> k(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, 2> z{u(gen), u(gen)};
    const std::array<double, 2> s{z[0] + k(gen) * 2 * pi, z[1] + k(gen) * 2 * pi};
    for (const auto* f : {&tg, &odd}) {
      const auto a = f->eval(z), b = f->eval(s);
      CHECK(std::abs(a(0, 0) - b(0, 0)) < 1e-12);
      CHECK(std::abs(a(1, 0) - b(1, 0)) < 1e-12);
    }
  }
}

TEST_CASE("wrap stays inside the cell and leaves in-cell values alone") {
  const auto tg = FlowField::taylor_green();
  for (double v : {-1e6, -7.0, -1e-300, 0.0, 1.0, 6.2, 2 * pi, 1e6}) {
    const double w = tg.wrap(v, 0);
    CHECK(w >= 0.0);
    CHECK(w < 2 * pi);
  }
  CHECK(tg.wrap(1.25, 1) == 1.25);
}

TEST_CASE("amplitude scales F exactly") {
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const auto unit = FlowField::taylor_green(1.0);
  for (double a : {0.0, 0.3, -2.0, 7.5}) {
    const auto scaled = unit.with_amplitude(a);
    for (int i = 0; i < 100; ++i) {
      const std::array<double, 2> z{u(gen), u(gen)};
      const auto fs = scaled.eval(z), f1 = unit.eval(z);
      CHECK(fs(0, 0) == a * f1(0, 0));
      CHECK(fs(1, 0) == a * f1(1, 0));
    }
  }
}

TEST_CASE("Taylor-Green fast path agrees with the general Fourier path") {
  const auto tg = FlowField::taylor_green();
  const auto general = FlowField::stream_function({FlowField::taylor_green_modes()}, {2 * pi, 2 * pi});
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, 2> z{u(gen), u(gen)};
    const auto a = tg.eval(z), b = general.eval(z);
    worst = std::max({worst, std::abs(a(0, 0) - b(0, 0)), std::abs(a(1, 0) - b(1, 0))});
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("parity check") {
  SUBCASE("Taylor-Green is odd") {
    const auto r = check_parity(FlowField::taylor_green(), 1000, 1e-12);
    CHECK(r.passes);
    CHECK(r.max_violation <= 1e-12);
  }
  SUBCASE("odd stream function gives an even field") {
    const auto r = check_parity(odd_stream_function(), 1000, 1e-12);
    CHECK_FALSE(r.passes);
    CHECK(r.max_violation > 0.5);
  }
  SUBCASE("even stream function gives an odd field") {
    FourierSeries s{{{1, 1}, 0.5, 0.0}, {{1, -1}, 0.5, 0.0}};  // cos x1 cos x2
    const auto r = check_parity(FlowField::stream_function({s}, {2 * pi, 2 * pi}), 1000, 1e-12);
    CHECK(r.passes);
  }
  SUBCASE("zero field") {
    const auto r = check_parity(FlowField::taylor_green(0.0), 100, 1e-12);
    CHECK(r.passes);
    CHECK(r.max_violation == 0.0);
  }
  CHECK_THROWS_AS(check_parity(FlowField::taylor_green(), 0, 1e-12), std::invalid_argument);
}

TEST_CASE("divergence check") {
  SUBCASE("Taylor-Green on a 64 grid") {
    const auto r = check_divergence_free(FlowField::taylor_green(), 64, 1e-8);
    CHECK(r.passes);
    CHECK(r.max_divergence <= 1e-8);
  }
  SUBCASE("compressible table F = (sin x1, 0) has divergence cos x1") {
    FourierSeries f11{{{1, 0}, 1.0, -pi / 2}};
    const auto flow = FlowField::coefficient_table(2, 1, {f11, {}}, {2 * pi, 2 * pi});
    const auto r = check_divergence_free(flow, 64, 1e-8);
    CHECK_FALSE(r.passes);
    CHECK(std::abs(r.max_divergence - 1.0) < 1e-5);
  }
  SUBCASE("zero field") {
    CHECK(check_divergence_free(FlowField::taylor_green(0.0), 64, 1e-8).max_divergence == 0.0);
  }
  CHECK_THROWS_AS(check_divergence_free(FlowField::taylor_green(), 3, 1e-8), std::invalid_argument);
}

TEST_CASE("sup norm of Taylor-Green is one") {
  CHECK(FlowField::taylor_green().sup_norm() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(FlowField::taylor_green(2.5).sup_norm() == doctest::Approx(2.5).epsilon(1e-3));
}
