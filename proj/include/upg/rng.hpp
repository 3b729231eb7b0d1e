#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace upg {

// Seeded random stream. One owner per stream; parallel work uses fork().
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 1) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Child stream for index i. Reproducible: depends only on (seed, i).
  RngStream fork(std::uint64_t index) const {
    return RngStream(mix(seed_ ^ mix(index + 0x632be59bd9b4e019ULL)));
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

  double exponential() { return -std::log(uniform()); }

  // Gamma(shape, rate = 1).
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace upg
