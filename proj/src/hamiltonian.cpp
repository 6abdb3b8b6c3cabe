#include "sqdrift/hamiltonian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "sqdrift/determinant.hpp"

namespace sqdrift {

void MolecularHamiltonian::allocate(int norb) {
    if (norb < 1 || norb > 32) throw std::invalid_argument("n_orb must be in [1, 32]");
    n_orb = norb;
    h_one.assign(static_cast<std::size_t>(norb) * norb, 0.0);
    eri.assign(static_cast<std::size_t>(norb) * norb * norb * norb, 0.0);
}

void MolecularHamiltonian::set_h1(int p, int q, double v) {
    h_one[static_cast<std::size_t>(p * n_orb + q)] = v;
    h_one[static_cast<std::size_t>(q * n_orb + p)] = v;
}

void MolecularHamiltonian::set_eri(int p, int q, int r, int s, double v) {
    const auto n = static_cast<std::size_t>(n_orb);
    auto at = [&](int a, int b, int c, int d) -> double& {
        return eri[((static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)) * n +
                    static_cast<std::size_t>(c)) * n + static_cast<std::size_t>(d)];
    };
    // chemist-notation 8-fold symmetry
    at(p, q, r, s) = v;
    at(q, p, r, s) = v;
    at(p, q, s, r) = v;
    at(q, p, s, r) = v;
    at(r, s, p, q) = v;
    at(s, r, p, q) = v;
    at(r, s, q, p) = v;
    at(s, r, q, p) = v;
}

MolecularHamiltonian build_hubbard(int sites, double t_hop, double u, int na, int nb) {
    if (sites < 1) throw std::invalid_argument("hubbard: sites must be >= 1");
    if (na < 0 || nb < 0 || na > sites || nb > sites)
        throw std::invalid_argument("hubbard: bad electron count");
    MolecularHamiltonian h;
    h.allocate(sites);
    h.n_alpha = na;
    h.n_beta = nb;
    for (int i = 0; i + 1 < sites; ++i) h.set_h1(i, i + 1, -t_hop);
    for (int i = 0; i < sites; ++i) h.set_eri(i, i, i, i, u);
    return h;
}

// ---------------------------------------------------------------------------
// Local dense representation of one grouped term, used to normalize its
// spectral radius exactly. The environment outside the term's modes only
// flips hop-factor signs block-by-block, which leaves the spectrum symmetric,
// so diagonalizing on the local modes with an empty environment is exact.
// ---------------------------------------------------------------------------

namespace {

std::vector<int> local_modes_of(const std::vector<TermPart>& parts) {
    std::set<int> modes;
    for (const auto& part : parts) {
        for (const auto& hop : part.hops) {
            modes.insert(hop.a);
            modes.insert(hop.b);
        }
        for (int m : part.dens) modes.insert(m);
    }
    return {modes.begin(), modes.end()};
}

// apply a_m then a+_m' style ladder steps on a small occupation mask with
// Jordan-Wigner parity signs
struct Amplitude {
    std::uint32_t state;
    double amp;
};

void apply_part(const TermPart& part, const std::vector<int>& modes, std::uint32_t ket,
                std::vector<Amplitude>& out) {
    auto slot = [&](int mode) {
        return static_cast<int>(std::lower_bound(modes.begin(), modes.end(), mode) - modes.begin());
    };
    std::vector<Amplitude> cur = {{ket, part.weight}};
    for (int m : part.dens) {
        const int i = slot(m);
        std::erase_if(cur, [&](const Amplitude& a) { return !((a.state >> i) & 1); });
        if (cur.empty()) return;
    }
    for (const auto& hop : part.hops) {
        const int ia = slot(hop.a), ib = slot(hop.b);
        std::vector<Amplitude> next;
        for (const auto& a : cur) {
            const bool occ_a = (a.state >> ia) & 1, occ_b = (a.state >> ib) & 1;
            if (occ_a == occ_b) continue; // both directions annihilate
            const int from = occ_a ? ia : ib, to = occ_a ? ib : ia;
            double sign = (popcount_below(a.state, from) & 1) ? -1.0 : 1.0;
            std::uint32_t s = a.state ^ (1u << from);
            if (popcount_below(s, to) & 1) sign = -sign;
            next.push_back({s | (1u << to), a.amp * sign});
        }
        cur = std::move(next);
        if (cur.empty()) return;
    }
    out.insert(out.end(), cur.begin(), cur.end());
}

double spectral_radius(const std::vector<TermPart>& parts) {
    const auto modes = local_modes_of(parts);
    const int dim = 1 << modes.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<Amplitude> col;
    for (int ket = 0; ket < dim; ++ket) {
        col.clear();
        for (const auto& part : parts) apply_part(part, modes, static_cast<std::uint32_t>(ket), col);
        for (const auto& a : col) m(static_cast<int>(a.state), ket) += a.amp;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct RawTerm {
    TermKind kind;
    std::vector<int> support;
    std::string signature;
    std::vector<TermPart> parts;
};

std::string one_body_signature(int p, int q) {
    std::ostringstream os;
    os << "h(" << p << "," << q << ")";
    return os.str();
}

std::string two_body_signature(int a1, int a2, int b1, int b2, const char* role) {
    std::ostringstream os;
    os << "g(" << a1 << "," << a2 << "|" << b1 << "," << b2 << ")" << role;
    return os.str();
}

} // namespace

TermDistribution enumerate_terms(const MolecularHamiltonian& h, double threshold) {
    const int n = h.n_orb;
    auto am = [&](int p) { return alpha_mode(p, n); };
    auto bm = [&](int p) { return beta_mode(p, n); };
    auto hop = [](int x, int y) { return HopFactor{std::min(x, y), std::max(x, y)}; };

    std::vector<RawTerm> raw;
    auto emit = [&](TermKind kind, std::vector<int> support, std::string sig,
                    std::vector<TermPart> parts) {
        std::sort(support.begin(), support.end());
        raw.push_back({kind, std::move(support), std::move(sig), std::move(parts)});
    };

    // one-body
    for (int p = 0; p < n; ++p) {
        for (int q = p; q < n; ++q) {
            const double w = h.h1(p, q);
            if (w == 0.0) continue;
            if (p == q) {
                emit(TermKind::one_body, {p}, one_body_signature(p, p),
                     {{w, {}, {am(p)}}, {w, {}, {bm(p)}}});
            } else {
                emit(TermKind::one_body, {p, q}, one_body_signature(p, q),
                     {{w, {hop(am(p), am(q))}, {}}, {w, {hop(bm(p), bm(q))}, {}}});
            }
        }
    }

    // two-body: iterate canonical orbit representatives of the 8-fold symmetry
    for (int a1 = 0; a1 < n; ++a1) {
        for (int a2 = a1; a2 < n; ++a2) {
            for (int b1 = a1; b1 < n; ++b1) {
                for (int b2 = b1; b2 < n; ++b2) {
                    if (b1 == a1 && b2 < a2) continue; // enforce (a1,a2) <= (b1,b2)
                    const double w = h.g(a1, a2, b1, b2);
                    if (w == 0.0) continue;

                    const bool a_pair = a1 < a2, b_pair = b1 < b2;
                    if (!a_pair && !b_pair) {
                        // (aa|bb): pure density-density, diagonal
                        const int a = a1, b = b1;
                        if (a == b) {
                            emit(TermKind::two_body, {a}, two_body_signature(a, a, a, a, ""),
                                 {{w, {}, {am(a), bm(a)}}});
                        } else {
                            emit(TermKind::two_body, {a, b}, two_body_signature(a, a, b, b, ""),
                                 {{w, {}, {am(a), am(b)}},
                                  {w, {}, {am(a), bm(b)}},
                                  {w, {}, {bm(a), am(b)}},
                                  {w, {}, {bm(a), bm(b)}}});
                        }
                    } else if (a_pair != b_pair) {
                        // one genuine pair, one repeated index: density-dressed hop
                        const int h1i = a_pair ? a1 : b1, h2i = a_pair ? a2 : b2;
                        const int x = a_pair ? b1 : a1;
                        if (x != h1i && x != h2i) {
                            std::vector<TermPart> parts;
                            for (int hs = 0; hs < 2; ++hs)
                                for (int ds = 0; ds < 2; ++ds)
                                    parts.push_back({w,
                                                     {hop(hs ? bm(h1i) : am(h1i), hs ? bm(h2i) : am(h2i))},
                                                     {ds ? bm(x) : am(x)}});
                            emit(TermKind::two_body, {h1i, h2i, x},
                                 two_body_signature(a1, a2, b1, b2, ""), std::move(parts));
                        } else {
                            // spectator density sits on one of the hop's own
                            // orbitals: the two spin channels do not commute
                            // string-wise and become separate terms
                            emit(TermKind::two_body, {h1i, h2i},
                                 two_body_signature(a1, a2, b1, b2, ":a"),
                                 {{w, {hop(am(h1i), am(h2i))}, {bm(x)}}});
                            emit(TermKind::two_body, {h1i, h2i},
                                 two_body_signature(a1, a2, b1, b2, ":b"),
                                 {{w, {hop(bm(h1i), bm(h2i))}, {am(x)}}});
                        }
                    } else {
                        // two genuine pairs
                        if (a1 == b1 && a2 == b2) {
                            // same pair twice: opposite-spin double hop plus a
                            // same-spin density residue
                            const int p = a1, q = a2;
                            emit(TermKind::two_body, {p, q},
                                 two_body_signature(a1, a2, b1, b2, ":x"),
                                 {{w, {hop(am(p), am(q)), hop(bm(p), bm(q))}, {}}});
                            emit(TermKind::two_body, {p, q},
                                 two_body_signature(a1, a2, b1, b2, ":n"),
                                 {{-w, {}, {am(p), am(q)}}, {-w, {}, {bm(p), bm(q)}}});
                        } else if (a1 == b1 || a2 == b2 || a2 == b1) {
                            // pairs share one orbital x; u, v are the partners
                            int x, u, v;
                            if (a1 == b1) { x = a1; u = a2; v = b2; }
                            else if (a2 == b2) { x = a2; u = a1; v = b1; }
                            else { x = a2; u = a1; v = b2; }
                            emit(TermKind::two_body, {x, u, v},
                                 two_body_signature(a1, a2, b1, b2, ":x"),
                                 {{w, {hop(am(x), am(u)), hop(bm(x), bm(v))}, {}},
                                  {w, {hop(am(x), am(v)), hop(bm(x), bm(u))}, {}}});
                            emit(TermKind::two_body, {x, u, v},
                                 two_body_signature(a1, a2, b1, b2, ":n"),
                                 {{-w, {hop(am(u), am(v))}, {am(x)}},
                                  {-w, {hop(bm(u), bm(v))}, {bm(x)}}});
                        } else {
                            // four distinct orbitals: product of two spatial hops
                            std::vector<TermPart> parts;
                            for (int s1 = 0; s1 < 2; ++s1)
                                for (int s2 = 0; s2 < 2; ++s2)
                                    parts.push_back(
                                        {w,
                                         {hop(s1 ? bm(a1) : am(a1), s1 ? bm(a2) : am(a2)),
                                          hop(s2 ? bm(b1) : am(b1), s2 ? bm(b2) : am(b2))},
                                         {}});
                            emit(TermKind::two_body, {a1, a2, b1, b2},
                                 two_body_signature(a1, a2, b1, b2, ""), std::move(parts));
                        }
                    }
                }
            }
        }
    }

    std::sort(raw.begin(), raw.end(), [](const RawTerm& l, const RawTerm& r) {
        return std::tie(l.kind, l.support, l.signature) < std::tie(r.kind, r.support, r.signature);
    });

    TermDistribution dist;
    for (auto& rt : raw) {
        const double c = spectral_radius(rt.parts);
        if (!(c >= threshold)) continue; // also drops NaN and the +inf threshold case
        ExcitationTerm term;
        term.kind = rt.kind;
        term.support = std::move(rt.support);
        term.signature = std::move(rt.signature);
        term.coefficient = c;
        term.parts = std::move(rt.parts);
        for (auto& part : term.parts) part.weight /= c;
        dist.terms.push_back(std::move(term));
    }
    dist.lambda = 0.0;
    for (const auto& t : dist.terms) dist.lambda += t.coefficient;
    dist.cumulative.reserve(dist.terms.size());
    double acc = 0.0;
    for (const auto& t : dist.terms) {
        acc += t.coefficient / dist.lambda;
        dist.cumulative.push_back(acc);
    }
    if (!dist.cumulative.empty()) dist.cumulative.back() = 1.0;
    return dist;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

std::string hamiltonian_to_json(const MolecularHamiltonian& h) {
    nlohmann::json j;
    j["n_orb"] = h.n_orb;
    j["n_alpha"] = h.n_alpha;
    j["n_beta"] = h.n_beta;
    j["e_core"] = h.e_core;
    j["h_one"] = h.h_one;
    auto records = nlohmann::json::array();
    for (int a1 = 0; a1 < h.n_orb; ++a1)
        for (int a2 = a1; a2 < h.n_orb; ++a2)
            for (int b1 = a1; b1 < h.n_orb; ++b1)
                for (int b2 = b1; b2 < h.n_orb; ++b2) {
                    if (b1 == a1 && b2 < a2) continue;
                    const double v = h.g(a1, a2, b1, b2);
                    if (v != 0.0) records.push_back({a1, a2, b1, b2, v});
                }
    j["eri_unique"] = std::move(records);
    return j.dump(2);
}

MolecularHamiltonian hamiltonian_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MolecularHamiltonian h;
    h.allocate(j.at("n_orb").get<int>());
    h.n_alpha = j.at("n_alpha").get<int>();
    h.n_beta = j.at("n_beta").get<int>();
    h.e_core = j.at("e_core").get<double>();
    const auto h1 = j.at("h_one").get<std::vector<double>>();
    if (h1.size() != h.h_one.size()) throw std::runtime_error("hamiltonian json: h_one has wrong length");
    h.h_one = h1;
    for (const auto& rec : j.at("eri_unique")) {
        if (!rec.is_array() || rec.size() != 5) throw std::runtime_error("hamiltonian json: bad eri record");
        h.set_eri(rec[0].get<int>(), rec[1].get<int>(), rec[2].get<int>(), rec[3].get<int>(),
                  rec[4].get<double>());
    }
    if (h.n_alpha < 0 || h.n_beta < 0 || h.n_alpha > h.n_orb || h.n_beta > h.n_orb)
        throw std::runtime_error("hamiltonian json: electron counts out of range");
    return h;
}

} // namespace sqdrift
