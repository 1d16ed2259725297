#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ipdiff/common.hpp"

namespace ipdiff {

enum class FlowKind { TaylorGreen, StreamFunctionFourier, CoefficientTable };

/// One real Fourier mode  a * cos(sum_i k_i * 2*pi*z_i / L_i + phase).
/// The wavevector is integer in units of the cell's reciprocal lattice.
struct FourierMode {
  std::vector<int> wavevector;
  double amplitude = 0.0;
  double phase = 0.0;
};

using FourierSeries = std::vector<FourierMode>;

/// Spatially periodic structure matrix F(z) of the velocity field v = F(z) mu.
///
/// Stream-function flows are two dimensional; column j of F is the skew
/// gradient (-d psi_j / dz_2, d psi_j / dz_1) of the j-th stream function,
/// so every column is divergence free. Coefficient tables give each entry
/// F_ij directly and may be compressible. The object is immutable.
class FlowField {
 public:
  /// psi(z) = sin(z_1) sin(z_2) on the 2*pi-periodic cell, one modulation mode.
  static FlowField taylor_green(double amplitude = 1.0);

  /// Taylor-Green stream function written as plane-wave modes:
  /// sin z1 sin z2 = 0.5 cos(z1 - z2) - 0.5 cos(z1 + z2).
  static FourierSeries taylor_green_modes();

  static FlowField stream_function(std::vector<FourierSeries> psi, std::vector<double> period,
                                   double amplitude = 1.0);

  /// entries are F_ij in row-major order (dim_d rows, dim_n columns).
  static FlowField coefficient_table(int dim_d, int dim_n, std::vector<FourierSeries> entries,
                                     std::vector<double> period, double amplitude = 1.0);

  FlowKind kind() const { return kind_; }
  int dim_d() const { return dim_d_; }
  int dim_n() const { return dim_n_; }
  const std::vector<double>& period() const { return period_; }
  double amplitude() const { return amplitude_; }
  const std::vector<FourierSeries>& series() const { return series_; }

  FlowField with_amplitude(double amplitude) const;

  /// F(z); z is wrapped into the cell before evaluation.
  SmallMatrix eval(std::span<const double> z) const;

  /// Hot-path evaluation; z must hold dim_d() entries.
  SmallMatrix eval_unchecked(const double* z) const;

  /// dF/dz_l for l in [0, dim_d).
  std::array<SmallMatrix, kMaxDim> derivatives(std::span<const double> z) const;

  /// Floored modulo into [0, period).
  double wrap(double value, int axis) const;

  /// Largest spectral norm of F(z) over a uniform grid of the cell.
  double sup_norm(int grid_per_axis = 128) const;

 private:
  FlowField() = default;
  void eval_series(const double* wrapped, SmallMatrix& out) const;

  FlowKind kind_ = FlowKind::TaylorGreen;
  int dim_d_ = 2;
  int dim_n_ = 1;
  std::vector<double> period_;
  std::vector<double> reciprocal_;  // 2*pi / period
  double amplitude_ = 1.0;
  // StreamFunctionFourier: one series per modulation component.
  // CoefficientTable: one series per matrix entry, row-major.
  std::vector<FourierSeries> series_;
};

struct ParityResult {
  bool passes = false;
  double max_violation = 0.0;
};

/// max over Halton points of |F(-z) + F(z)|_inf.
ParityResult check_parity(const FlowField& flow, std::size_t samples, double tol);

struct DivergenceResult {
  double max_divergence = 0.0;
  bool passes = false;
};

/// Fourth-order central differences of every column's divergence on a uniform
/// grid with spacing period / grid_per_axis.
DivergenceResult check_divergence_free(const FlowField& flow, int grid_per_axis, double tol);

}  // namespace ipdiff
