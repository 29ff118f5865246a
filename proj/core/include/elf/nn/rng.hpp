#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace elf::nn {

// xoshiro256** seeded through splitmix64. Self-contained so that seeded runs
// are bit-identical across platforms and standard library versions
// (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) { reseed(seed); }

  void reseed(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, n), n >= 1. Unbiased (rejection sampling).
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Box-Muller. Draws are consumed in pairs internally.
  double normal();

  void fill_normal(std::vector<float>& out, float mean = 0.f, float stddev = 1.f);
  void fill_uniform(std::vector<float>& out, float lo, float hi);

  // Derives an independent stream, e.g. one per speaker or per worker item.
  Rng fork();

  std::array<uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<uint64_t, 4>& s) {
    s_ = s;
    has_spare_ = false;
  }

 private:
  std::array<uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace elf::nn
