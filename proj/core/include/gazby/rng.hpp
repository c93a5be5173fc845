#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gazby {

// Seeded generator with explicit conversions so streams are reproducible
// bit-for-bit across runs. std::distributions are avoided on purpose: their
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Derived stream for a parallel or structurally separate task.
  Rng fork(std::uint64_t stream) const {
    std::mt19937_64 probe(engine_);
    return Rng(probe() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gazby
