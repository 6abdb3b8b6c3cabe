#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace sqdrift {

// Pauli word over <= 64 qubits in symplectic (x, z) form: bit q of `x` set
// means an X component at qubit q, bit q of `z` a Z component; both set = Y.
// `coefficient` is real: grouped-excitation mappings always produce real
// weights, and the mapping code asserts this before constructing PauliString.
struct PauliString {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    int n_qubits = 0;
    double coefficient = 0.0;

    bool is_identity() const { return (x | z) == 0; }
    int weight() const { return std::popcount(x | z); }

    char letter(int q) const {
        const bool bx = (x >> q) & 1, bz = (z >> q) & 1;
        return bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
    }

    // word with qubit 0 first, e.g. "XZY I" -> qubits 0..3
    std::string word() const {
        std::string s(static_cast<std::size_t>(n_qubits), 'I');
        for (int q = 0; q < n_qubits; ++q) s[static_cast<std::size_t>(q)] = letter(q);
        return s;
    }

    static PauliString from_word(const std::string& w, double coeff);

    bool commutes_with(const PauliString& o) const {
        return ((std::popcount(x & o.z) + std::popcount(z & o.x)) & 1) == 0;
    }
};

// Pauli word with a complex amplitude, canonical form  phase * prod_q X^x Z^z.
// Used internally while expanding operator products; Y at qubit q is
// represented as i * X_q Z_q, so converting letters <-> (x, z) moves factors
// of i in and out of `phase`.
struct PhasedPauli {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    std::complex<double> phase = 1.0;
};

inline PhasedPauli from_letters(const PauliString& p) {
    // Y = i X Z, so each Y contributes a factor i when moving to XZ form
    const int ny = std::popcount(p.x & p.z);
    static constexpr std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return {p.x, p.z, p.coefficient * ipow[ny & 3]};
}

inline std::complex<double> letter_coefficient(const PhasedPauli& p) {
    // inverse of the Y = i X Z bookkeeping
    const int ny = std::popcount(p.x & p.z);
    static constexpr std::complex<double> ipow_conj[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    return p.phase * ipow_conj[ny & 3];
}

inline PhasedPauli mul(const PhasedPauli& a, const PhasedPauli& b) {
    // (X^xa Z^za)(X^xb Z^zb) = (-1)^{za.xb} X^{xa^xb} Z^{za^zb}
    PhasedPauli r;
    r.x = a.x ^ b.x;
    r.z = a.z ^ b.z;
    r.phase = a.phase * b.phase;
    if (std::popcount(a.z & b.x) & 1) r.phase = -r.phase;
    return r;
}

} // namespace sqdrift
