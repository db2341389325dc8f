#include "segbound/rng.hpp"

namespace segbound {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t Rng::next() { return engine_(); }

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t range = hi - lo + 1;
    if (range == 0) // full 64-bit range
        return next();
    // Modulo with rejection of the biased tail; deterministic everywhere.
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range + 1) % range;
    std::uint64_t v = next();
    while (v > limit)
        v = next();
    return lo + v % range;
}

double Rng::uniform_real() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

Rng Rng::fork(std::uint64_t tag, std::uint64_t subtag) const {
    std::uint64_t child = splitmix64(seed_ ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
    child = splitmix64(child ^ splitmix64(subtag + 0x9E6C63D0876A90C1ULL));
    return Rng(child);
}

std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace segbound
