#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace shadow {

/// mt19937_64 with hand-rolled conversions, so sample streams are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Radical inverse in base `prime`.
inline double radical_inverse(std::uint64_t i, unsigned prime) {
  double inv = 1.0 / prime, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % prime);
    i /= prime;
    f *= inv;
  }
  return r;
}

inline constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

/// Halton point `i` in [0,1)^dim with a Cranley-Patterson shift.
inline std::vector<double> halton(std::uint64_t i, int dim, const std::vector<double>& shift) {
  std::vector<double> x(dim);
  for (int d = 0; d < dim; ++d) {
    double v = radical_inverse(i + 1, kPrimes[d]) + shift[d];
    x[d] = v - std::floor(v);
  }
  return x;
}

/// Static-partition parallel loop; body(i) must only write to slot i.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace shadow
