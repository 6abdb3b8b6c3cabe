#include "sqdrift/determinant.hpp"

#include <stdexcept>

namespace sqdrift {

std::string Determinant::hex(int n_orb) const {
    std::uint64_t k = key(n_orb);
    if (k == 0) return "0";
    std::string s;
    while (k) {
        s.insert(s.begin(), "0123456789abcdef"[k & 0xf]);
        k >>= 4;
    }
    return s;
}

Determinant Determinant::from_hex(const std::string& s, int n_orb) {
    std::uint64_t k = 0;
    for (char c : s) {
        k <<= 4;
        if (c >= '0' && c <= '9') k |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') k |= static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') k |= static_cast<std::uint64_t>(c - 'A' + 10);
        else throw std::invalid_argument("bad hex digit in bitstring: " + s);
    }
    return from_key(k, n_orb);
}

Determinant hf_determinant(int n_orb, int n_alpha, int n_beta) {
    if (n_alpha > n_orb || n_beta > n_orb) throw std::invalid_argument("occupation exceeds orbital count");
    auto fill = [](int n) { return n == 0 ? 0ULL : ((n == 64) ? ~0ULL : ((1ULL << n) - 1)); };
    return {fill(n_alpha), fill(n_beta)};
}

namespace {

// all n_orb-bit masks with k bits set, ascending (Gosper's hack)
std::vector<std::uint64_t> bit_strings(int n_orb, int k) {
    std::vector<std::uint64_t> out;
    if (k == 0) return {0ULL};
    if (k > n_orb) return out;
    std::uint64_t v = (1ULL << k) - 1;
    const std::uint64_t limit = 1ULL << n_orb;
    while (v < limit) {
        out.push_back(v);
        std::uint64_t c = v & -v;
        std::uint64_t r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    return out;
}

} // namespace

std::vector<Determinant> enumerate_sector(int n_orb, int n_alpha, int n_beta) {
    if (n_orb < 1 || n_orb > 32) throw std::invalid_argument("n_orb must be in [1, 32]");
    auto as = bit_strings(n_orb, n_alpha);
    auto bs = bit_strings(n_orb, n_beta);
    std::vector<Determinant> out;
    out.reserve(as.size() * bs.size());
    for (auto a : as)
        for (auto b : bs) out.push_back({a, b});
    return out;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

} // namespace sqdrift
