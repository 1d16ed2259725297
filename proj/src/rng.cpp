#include "ipdiff/rng.hpp"

namespace ipdiff {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::seed_seq stream_seed(std::uint64_t master, StreamDomain domain, std::uint64_t index) {
  // Hash the three key components through separate splitmix64 rounds, then
  // expand to eight 32-bit seed words.
  std::uint64_t state = master;
  std::uint64_t h = splitmix64(state);
  state = h ^ static_cast<std::uint64_t>(domain);
  h = splitmix64(state);
  state = h ^ index;
  std::uint32_t words[8];
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t v = splitmix64(state);
    words[2 * i] = static_cast<std::uint32_t>(v);
    words[2 * i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  return std::seed_seq(words, words + 8);
}

RandomStream::RandomStream(std::uint64_t master, StreamDomain domain, std::uint64_t index) {
  auto seq = stream_seed(master, domain, index);
  engine_.seed(seq);
}

}  // namespace ipdiff
