#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <random>

namespace attrmtl {

// Deterministic random stream. mt19937_64 is fully specified by the
// standard; uniform/normal conversions are done by hand instead of through
// std distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Independent sub-stream derived from (seed, tag). Keying sub-streams by
  // name rather than position keeps draws stable under task reordering.
  static Rng sub(std::uint64_t seed, std::string_view tag);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal();

  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace attrmtl
