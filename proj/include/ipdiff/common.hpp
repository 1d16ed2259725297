#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ipdiff {

/// Upper bound on the spatial dimension d and the modulation dimension n.
inline constexpr int kMaxDim = 4;

/// Fixed-capacity vector; the logical length (d or n) is carried by the owner.
using Vec = std::array<double, kMaxDim>;

/// Small dense matrix with fixed capacity, row-major with stride kMaxDim.
struct SmallMatrix {
  int rows = 0;
  int cols = 0;
  std::array<double, kMaxDim * kMaxDim> data{};

  SmallMatrix() = default;
  SmallMatrix(int r, int c) : rows(r), cols(c) {}

  double& operator()(int i, int j) { return data[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return data[i * kMaxDim + j]; }

  bool operator==(const SmallMatrix& other) const = default;
};

/// Malformed configuration or parameters violating a documented invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory produced a non-finite state.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t particle, std::size_t step)
      : std::runtime_error(what), particle_(particle), step_(step) {}

  std::size_t particle() const { return particle_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t particle_;
  std::size_t step_;
};

}  // namespace ipdiff
