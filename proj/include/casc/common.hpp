#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace casc {

/// Raised when user-supplied data or parameters are invalid (CLI maps this to exit code 2).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised for numerical failures that are not recoverable in place (CLI maps this to exit code 3).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed derivation for independent substreams (replicates,
/// restarts, grid cells). Mixing avoids correlated neighboring streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(base ^ splitmix64(a + 0x632be59bd9b4e019ULL ^ splitmix64(b)));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

}  // namespace casc
