#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aging {

// Seeded 64-bit engine. Uniforms are built from raw engine output rather than
// std distributions so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal(double mean = 0.0, double sd = 1.0);

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed for stream `a`, `b` under `root`.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0);

std::uint64_t hash_label(std::string_view label);

}  // namespace aging
