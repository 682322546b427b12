#include "aging/random.hpp"

#include "aging/numerics.hpp"

namespace aging {

double Rng::normal(double mean, double sd) { return mean + sd * std_normal_quantile(uniform()); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(root) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
}

// FNV-1a
std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace aging
