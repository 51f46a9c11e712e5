#ifndef MVSEARCH_COMMON_RNG_H_
#define MVSEARCH_COMMON_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace mvsearch {

// Seeded generator with platform-independent derived distributions.
// std::mt19937_64's raw output is fixed by the standard; the standard
// distributions are not, so the helpers below are written out.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t UniformIndex(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  // Uniform double in [0, 1).
  double UniformUnit() { return (engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * UniformUnit(); }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformIndex(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mvsearch

#endif  // MVSEARCH_COMMON_RNG_H_
