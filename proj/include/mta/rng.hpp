#pragma once

#include <cstdint>
#include <random>

namespace mta {

/**
 * Deterministic random source used everywhere in the library.
 *
 * The generator is std::mt19937_64, whose output sequence is pinned by the
 * standard, so a seed reproduces the same draws on any platform. The
 * transformations on top of it are fixed here (not delegated to
 * std::*_distribution, which is implementation-defined):
 *
 *   uniform():  u = (x >> 11 + 0.5) * 2^-53, strictly inside (0,1)
 *   normal():   Box-Muller on two uniforms; pairs are generated together and
 *               the second value is cached, so draws come in (cos, sin) order
 *   gumbel(s):  -s * log(-log(u)), one uniform per draw
 *
 * Tests freeze the seed-to-value mapping; changing any formula above is a
 * breaking change.
 */
class Rng64 {
public:
    explicit Rng64(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    double uniform() {
        const std::uint64_t x = gen_() >> 11; // 53 high bits
        return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
    }

    double normal();

    double gumbel(double scale);

    /// Index into a discrete distribution given cumulative weights cw[0..k-1], cw[k-1]=total.
    int pick(const double* cw, int k);

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a 64-bit hash of a byte string (config hashing, seed tagging).
std::uint64_t fnv1a64(const void* data, std::size_t n);

/**
 * Child seed for a tagged purpose and an index, derived from a master seed.
 * child = mix64(mix64(master ^ fnv1a64(tag)) + index)
 */
std::uint64_t derive_seed(std::uint64_t master, const char* tag, std::uint64_t index);

} // namespace mta
