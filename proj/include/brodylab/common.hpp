#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace brodylab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr char kVersion[] = "0.1.0";
inline constexpr char kGeneratorId[] = "splitmix64-annulus-v1";

// Error taxonomy shared by all modules.  The CLI maps categories to exit
// codes: Config -> 2, Numerical -> 3, SearchGuard -> 4.
enum class ErrorKind {
  InvalidInput,
  InvalidPoint,
  DivergentSum,
  PoleProximity,
  ChartError,
  QuadratureFailure,
  SearchGuardExceeded,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Quadrature failure carries the last (unconverged) estimate so callers can
// still inspect it.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double last_estimate)
      : Error(ErrorKind::QuadratureFailure, what), last_estimate_(last_estimate) {}
  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

// SplitMix64: counter-based generator used for all seeded draws.  Values are
// a pure function of the key, so coefficient tables are reproducible
// bit-for-bit regardless of evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash a (seed, a, b, c) key into one 64-bit state.
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

// Uniform double in [0, 1) from 53 high bits.
inline double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Map a signed lattice index to a u64 (zig-zag) so negative coordinates hash
// distinctly.
inline std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

// FNV-1a over a string; used for config hashes embedded in outputs.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace brodylab
