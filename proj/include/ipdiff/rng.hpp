#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cstdint>
#include <random>

namespace ipdiff {

/// Stream families; keeps per-particle streams disjoint from diagnostic streams.
enum class StreamDomain : std::uint64_t {
  Particle = 0,
  Centering = 1,
  Lyapunov = 2,
  Synthetic = 3,
  Bootstrap = 4,
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed words for the stream (master, domain, index). Pure function of its
/// arguments: the stream of particle i never depends on how particles are
/// scheduled across workers.
std::seed_seq stream_seed(std::uint64_t master, StreamDomain domain, std::uint64_t index);

/// Independent normal/uniform stream: mt19937_64 keyed by stream_seed, with
/// Boost's ziggurat normal sampler (portable output across standard libraries).
class RandomStream {
 public:
  RandomStream(std::uint64_t master, StreamDomain domain, std::uint64_t index);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(double* out, int count) {
    for (int i = 0; i < count; ++i) out[i] = normal_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
};

}  // namespace ipdiff
