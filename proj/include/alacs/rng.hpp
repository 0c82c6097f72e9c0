#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace alacs {

// splitmix64 finalizer; used to derive independent child seeds so that
// per-round / per-batch streams are reproducible regardless of evaluation
// order (serial or parallel).
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::uint64_t stream,
                                           std::uint64_t index = 0) {
  return mix64(mix64(seed ^ mix64(stream)) ^ mix64(index));
}

// mt19937_64 with hand-rolled distributions. The standard distribution
// adapters are implementation-defined; these are not, so identical seeds
// give identical samples everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng derived(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index = 0) {
    return Rng(derive_seed(seed, stream, index));
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one spare cached per pair.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  /// Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  /// k distinct indices drawn from [0, n), partial Fisher-Yates order.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace alacs
