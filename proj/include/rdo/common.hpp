#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rdo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Err {
  NonFinite,
  EmptySystem,
  ZeroReference,
  LengthMismatch,
  NonPositiveRange,
  DimensionMismatch,
  ZeroWeightRow,
  UnsupportedActivation,
  UnsupportedOrder,
  MissingSolutionValues,
  NonlinearPde,
  NewtonDivergence,
  FactorizationFailure,
  DegenerateDomain,
  CorruptManifest,
  VersionMismatch,
  TruncatedArray,
  ConfigInvalid,
  Untrained,
  IoError,
};

class Error : public std::runtime_error {
public:
  Error(Err code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Err code() const noexcept { return code_; }

private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, Err code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

// --- seeding ----------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed; used so every layer,
/// realization and sampling step owns its own reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (stream + 1));
  return splitmix64(s);
}

// --- random numbers ---------------------------------------------------------

// Thin generator wrapper. Doubles are produced from raw 64-bit output instead
// of std::uniform_real_distribution so streams do not depend on the standard
// library implementation.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // splitmix warm-up avoids correlated low-entropy seeds
    state_ = splitmix64(seed);
    inc_ = splitmix64(seed) | 1ull;
  }

  std::uint64_t next_u64() {
    // xorshift128+ style mix on a splitmix-driven counter stream
    std::uint64_t s = state_;
    state_ += inc_;
    return splitmix64(s);
  }

  /// uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// uniform in (lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// standard normal via Box-Muller (two uniforms per draw, no cache)
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace rdo
