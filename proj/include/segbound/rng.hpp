#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace segbound {

/// Deterministic random source. Every randomized operation in the library
/// draws through this wrapper instead of std::uniform_int_distribution,
/// whose output is implementation-defined; runs must be bit-reproducible
/// across platforms and across serial/parallel schedules.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

    /// Uniform double in [0, 1).
    double uniform_real();

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(uniform(0, v.size() - 1))];
    }

    /// Derive an independent substream without consuming this stream.
    /// Forking by (tag, subtag) gives every document/step its own
    /// schedule-independent generator.
    Rng fork(std::uint64_t tag, std::uint64_t subtag = 0) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Stable 64-bit hash for strings (FNV-1a); used to derive per-document
/// substreams from ids.
std::uint64_t stable_hash(std::string_view s);

} // namespace segbound
