#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace sqdrift {

// Slater determinant in a spatial-orbital basis: one occupation bitmask per
// spin channel, bit p = spatial orbital p. Limited to 32 orbitals so that an
// (alpha, beta) pair packs into one 64-bit key.
struct Determinant {
    std::uint64_t alpha = 0;
    std::uint64_t beta = 0;

    auto operator<=>(const Determinant&) const = default;

    int n_alpha() const { return std::popcount(alpha); }
    int n_beta() const { return std::popcount(beta); }

    bool occupied_alpha(int p) const { return (alpha >> p) & 1; }
    bool occupied_beta(int p) const { return (beta >> p) & 1; }

    std::uint64_t key(int n_orb) const { return alpha | (beta << n_orb); }
    static Determinant from_key(std::uint64_t k, int n_orb) {
        const std::uint64_t mask = (n_orb == 64) ? ~0ULL : ((1ULL << n_orb) - 1);
        return {k & mask, (k >> n_orb) & mask};
    }

    // lowercase hex of key(n_orb), used as the bitstring id in JSON artifacts
    std::string hex(int n_orb) const;
    static Determinant from_hex(const std::string& s, int n_orb);
};

// Aufbau reference: lowest n_alpha / n_beta orbitals occupied.
Determinant hf_determinant(int n_orb, int n_alpha, int n_beta);

// Number of bits set in mask strictly below bit `p`.
inline int popcount_below(std::uint64_t mask, int p) {
    return std::popcount(mask & ((1ULL << p) - 1));
}

// All determinants of the (n_alpha, n_beta) sector of n_orb orbitals, in
// ascending (alpha, beta) integer order. Sector sizes stay desk-scale
// (binomial(n_orb, n_alpha) * binomial(n_orb, n_beta)).
std::vector<Determinant> enumerate_sector(int n_orb, int n_alpha, int n_beta);

// binomial(n, k) as unsigned 64-bit; n small (desk scale)
std::uint64_t binomial(int n, int k);

} // namespace sqdrift
