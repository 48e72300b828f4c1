#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace softlspi {

/// Engine used by every stochastic routine. Draws are converted by the helpers
/// below rather than std distributions, whose output is library-specific.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi);

/// Uniform integer in [0, n), unbiased (rejection on the tail).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal via Box-Muller (consumes two draws).
double standard_normal(Rng& rng);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream seed from a root seed and a purpose tag.
///
/// seed = mix64(mix64(root) ^ fnv1a(purpose)), then each extra key k is folded in
/// as seed = mix64(seed ^ mix64(k)). Streams depend only on their own keys, so
/// adding grid points never perturbs the seeds of existing cells.
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose);
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose,
                          std::initializer_list<std::uint64_t> keys);

/// Bit pattern of a double, for use as a derive_seed key.
std::uint64_t double_key(double value);

}  // namespace softlspi
