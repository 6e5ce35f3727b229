#pragma once

#include <cstdint>
#include <string_view>

namespace ober {

// FNV-1a over raw bytes. Experiment bucketing and simulator seeding must be
// reproducible across runs, machines, and standard libraries, which rules out
// std::hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 finalizer; improves avalanche when combining hashes and seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Maps 64 random bits to a double in [0,1) using the top 53 bits; exact on
// any IEEE-754 platform.
constexpr double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Seed for a named per-entity random stream, e.g. one stream per simulated
// learner. Domain tags keep streams for different purposes uncorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view domain,
                                    std::string_view entity_id) {
  return mix64(mix64(root_seed ^ fnv1a64(domain)) ^ fnv1a64(entity_id));
}

}  // namespace ober
