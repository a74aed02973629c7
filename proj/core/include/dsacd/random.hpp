#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "dsacd/types.hpp"

namespace dsacd {

/// SplitMix64 finalizer; mixes a parent seed with a stream index into an
/// independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seedable random stream. Normal draws keep no cached state, so the whole
/// stream state is the engine state and serializes exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform();                    // [0, 1)
  double normal();                     // N(0, 1)
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)
  int uniform_int(int lo, int hi);     // inclusive
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);
  std::uint64_t next_u64() { return engine_(); }

  std::string serialize() const;
  void deserialize(const std::string& state);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsacd
