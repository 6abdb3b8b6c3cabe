#pragma once

#include <cstdint>
#include <random>

namespace sqdrift {

// splitmix64 finalizer, used both to whiten seeds and to derive independent
// sub-streams from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG stream. Uniform doubles are produced from the top 53 bits
// of the engine output instead of std::uniform_real_distribution so that the
// sampled values do not depend on the standard-library implementation.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

// Derives the seed of an independent sub-stream from a master seed and a list
// of integer tags (e.g. krylov index, randomization id, purpose tag). Chaining
// splitmix64 over the tags gives a counter-based split: streams for distinct
// tag tuples are unrelated, and the construction is order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t t : tags) s = splitmix64(s ^ (t + 0xd1b54a32d192ed03ULL));
    return s;
}

inline RngStream derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    return RngStream(derive_seed(master, tags));
}

} // namespace sqdrift
