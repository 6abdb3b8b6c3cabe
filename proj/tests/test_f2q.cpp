#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "sqdrift/f2q.hpp"
#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/oracle.hpp"
#include "sqdrift/rng.hpp"

using namespace sqdrift;

namespace {

ExcitationTerm term_of_parts(std::vector<TermPart> parts) {
    ExcitationTerm t;
    t.parts = std::move(parts);
    return t;
}

IndexMap random_layout(int n_modes, RngStream& rng) {
    std::vector<int> m2q(static_cast<std::size_t>(n_modes));
    std::iota(m2q.begin(), m2q.end(), 0);
    for (int i = n_modes - 1; i > 0; --i)
        std::swap(m2q[static_cast<std::size_t>(i)],
                  m2q[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i + 1)))]);
    return IndexMap::from_mode_to_qubit(std::move(m2q));
}

const PauliString* find_word(const std::vector<PauliString>& strings, const std::string& w) {
    for (const auto& s : strings)
        if (s.word() == w) return &s;
    return nullptr;
}

} // namespace

TEST_CASE("index map basics") {
    const auto id = IndexMap::identity(4);
    CHECK(id.is_identity());
    CHECK(id.n_modes() == 4);

    const auto m = IndexMap::from_mode_to_qubit({2, 0, 1});
    CHECK_FALSE(m.is_identity());
    CHECK(m.mode_to_qubit == std::vector<int>{2, 0, 1});
    CHECK(m.qubit_to_mode == std::vector<int>{1, 2, 0});

    CHECK_THROWS(IndexMap::from_mode_to_qubit({0, 0, 1}));  // not a bijection
    CHECK_THROWS(IndexMap::from_mode_to_qubit({0, 1, 3}));  // out of range
}

TEST_CASE("adjacent hop maps to XX and YY") {
    TermPart part;
    part.weight = 1.0;
    part.hops = {{0, 1}};
    const auto strings = map_part_jw(part, IndexMap::identity(2));
    REQUIRE(strings.size() == 2);
    const auto* xx = find_word(strings, "XX");
    const auto* yy = find_word(strings, "YY");
    REQUIRE(xx != nullptr);
    REQUIRE(yy != nullptr);
    CHECK(xx->coefficient == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(yy->coefficient == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("distant hop carries the parity chain") {
    TermPart part;
    part.weight = 2.0;
    part.hops = {{0, 2}};
    const auto strings = map_part_jw(part, IndexMap::identity(3));
    REQUIRE(strings.size() == 2);
    const auto* xzx = find_word(strings, "XZX");
    const auto* yzy = find_word(strings, "YZY");
    REQUIRE(xzx != nullptr);
    REQUIRE(yzy != nullptr);
    CHECK(xzx->coefficient == doctest::Approx(1.0).epsilon(1e-15)); // weight folded in
    CHECK(yzy->coefficient == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("the chain follows the qubit line, not the mode line") {
    TermPart part;
    part.weight = 1.0;
    part.hops = {{0, 1}};
    // mode 0 -> qubit 2, mode 1 -> qubit 0: the hop spans qubits 0..2
    const auto layout = IndexMap::from_mode_to_qubit({2, 0, 1});
    const auto strings = map_part_jw(part, layout);
    REQUIRE(strings.size() == 2);
    CHECK(find_word(strings, "XZX") != nullptr);
    CHECK(find_word(strings, "YZY") != nullptr);
}

TEST_CASE("density factor splits into identity and Z") {
    TermPart part;
    part.weight = 1.0;
    part.dens = {1};
    const auto strings = map_part_jw(part, IndexMap::identity(2));
    REQUIRE(strings.size() == 2);
    const auto* ident = find_word(strings, "II");
    const auto* z = find_word(strings, "IZ");
    REQUIRE(ident != nullptr);
    REQUIRE(z != nullptr);
    CHECK(ident->coefficient == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(z->coefficient == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("hop times density expands to four strings") {
    TermPart part;
    part.weight = 1.0;
    part.hops = {{0, 1}};
    part.dens = {2};
    const auto strings = map_part_jw(part, IndexMap::identity(3));
    CHECK(strings.size() == 4); // XXI, XXZ, YYI, YYZ
    for (const auto& s : strings) CHECK(std::abs(s.coefficient) == doctest::Approx(0.25));
}

TEST_CASE("exact cancellations are dropped when parts merge") {
    TermPart plus, minus;
    plus.weight = 1.0;
    plus.dens = {0};
    minus.weight = -1.0;
    minus.dens = {0};
    const auto strings = map_excitation_jw(term_of_parts({plus, minus}), IndexMap::identity(1));
    CHECK(strings.empty());
}

TEST_CASE("mapped strings of one term commute pairwise") {
    RngStream rng(17);
    for (const auto& h : {build_hubbard(4, 1.0, 2.0, 2, 2), build_hubbard(3, 0.7, 1.3, 2, 1)}) {
        const auto dist = enumerate_terms(h);
        for (int trial = 0; trial < 3; ++trial) {
            const auto layout =
                trial == 0 ? IndexMap::identity(h.n_modes()) : random_layout(h.n_modes(), rng);
            for (const auto& term : dist.terms) {
                const auto strings = map_excitation_jw(term, layout);
                for (std::size_t i = 0; i < strings.size(); ++i)
                    for (std::size_t j = i + 1; j < strings.size(); ++j) {
                        CAPTURE(term.signature);
                        CHECK(strings[i].commutes_with(strings[j]));
                    }
            }
        }
    }
}

TEST_CASE("mapping is layout covariant up to fermionic reordering signs") {
    // relabeling modes conjugates the dense operator by a signed permutation:
    // basis state s maps to its qubit image, with the parity of the
    // mode-order -> qubit-order resorting of the occupied modes as sign
    const auto h = build_hubbard(2, 1.0, 1.0, 1, 1);
    const auto dist = enumerate_terms(h);
    RngStream rng(5);
    const auto layout = random_layout(h.n_modes(), rng);
    const int n_modes = h.n_modes();
    const int dim = 1 << n_modes;

    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        int t = 0;
        std::vector<int> images;
        for (int mode = 0; mode < n_modes; ++mode)
            if ((s >> mode) & 1) {
                const int img = layout.mode_to_qubit[static_cast<std::size_t>(mode)];
                t |= 1 << img;
                images.push_back(img);
            }
        int inversions = 0;
        for (std::size_t i = 0; i < images.size(); ++i)
            for (std::size_t j = i + 1; j < images.size(); ++j)
                if (images[i] > images[j]) ++inversions;
        q(t, s) = (inversions % 2 == 0) ? 1.0 : -1.0;
    }

    for (const auto& term : dist.terms) {
        CAPTURE(term.signature);
        const auto a = dense_term(term, IndexMap::identity(n_modes), n_modes);
        const auto b = dense_term(term, layout, n_modes);
        CHECK((b - q * a * q.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("penalized pairs are the distinct hop pairs") {
    TermPart p1, p2;
    p1.weight = 0.5;
    p1.hops = {{0, 2}, {1, 3}};
    p2.weight = -0.5;
    p2.hops = {{0, 2}};
    p2.dens = {4};
    const auto pairs = penalized_pairs(term_of_parts({p1, p2}));
    CHECK(pairs == std::vector<std::pair<int, int>>{{0, 2}, {1, 3}});
}

TEST_CASE("layout objective sums qubit distances over the batch") {
    TermPart part;
    part.weight = 1.0;
    part.hops = {{0, 3}};
    const auto term = term_of_parts({part});
    const std::vector<const ExcitationTerm*> batch{&term, &term};
    CHECK(layout_objective(batch, IndexMap::identity(4)) == 6);
    CHECK(layout_objective(batch, IndexMap::from_mode_to_qubit({0, 2, 3, 1})) == 2);
}

TEST_CASE("optimizer reaches the brute-force optimum on a small batch") {
    TermPart a, b;
    a.weight = 1.0;
    a.hops = {{0, 3}};
    b.weight = 1.0;
    b.hops = {{1, 2}};
    const auto ta = term_of_parts({a});
    const auto tb = term_of_parts({b});
    const std::vector<const ExcitationTerm*> batch{&ta, &tb};

    long brute_best = 1 << 30;
    std::vector<int> m2q = {0, 1, 2, 3};
    std::sort(m2q.begin(), m2q.end());
    do {
        brute_best = std::min(brute_best,
                              layout_objective(batch, IndexMap::from_mode_to_qubit(m2q)));
    } while (std::next_permutation(m2q.begin(), m2q.end()));
    CHECK(brute_best == 2);

    const auto opt = optimize_layout(batch, 4);
    CHECK(layout_objective(batch, opt) == brute_best);
}

TEST_CASE("optimizer never loses to the identity layout") {
    RngStream rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int n_modes = 10 + static_cast<int>(rng.next_below(6)); // 10..15
        std::vector<ExcitationTerm> terms;
        const int n_terms = 3 + static_cast<int>(rng.next_below(5));
        for (int i = 0; i < n_terms; ++i) {
            TermPart part;
            part.weight = 1.0;
            int x = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_modes)));
            int y = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_modes)));
            if (x == y) y = (y + 1) % n_modes;
            part.hops = {{std::min(x, y), std::max(x, y)}};
            terms.push_back(term_of_parts({part}));
        }
        std::vector<const ExcitationTerm*> batch;
        for (const auto& t : terms) batch.push_back(&t);

        const auto opt = optimize_layout(batch, n_modes);
        const auto ident = IndexMap::identity(n_modes);
        CHECK(layout_objective(batch, opt) <= layout_objective(batch, ident));
        CHECK(total_mapped_weight(batch, opt) <= total_mapped_weight(batch, ident));
    }
}

TEST_CASE("a compiled sequence exponentiates the sampled terms in order") {
    const auto h = build_hubbard(2, 1.0, 1.0, 1, 1);
    const auto dist = enumerate_terms(h);
    RngStream rng(7);
    const auto seq = sample_sequence(dist, 6, 0.35, rng);
    const auto layout = IndexMap::identity(h.n_modes());
    const auto circuit =
        compile_sequence(seq, dist, layout, hf_determinant(h.n_orb, h.n_alpha, h.n_beta), h.n_orb);
    CHECK(circuit.n_qubits == h.n_modes());

    const auto u_circuit = dense_circuit_unitary(circuit);
    const int dim = 1 << h.n_modes();
    Eigen::MatrixXcd u_exact = Eigen::MatrixXcd::Identity(dim, dim);
    for (int idx : seq.term_indices) {
        const auto ht = dense_term(dist.terms[static_cast<std::size_t>(idx)], layout, h.n_modes());
        u_exact = dense_exponential(ht, seq.step_angle) * u_exact;
    }
    CHECK((u_circuit - u_exact).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("circuit json round trip preserves words and angles") {
    const auto h = build_hubbard(2, 1.0, 2.0, 1, 1);
    const auto dist = enumerate_terms(h);
    RngStream rng(3);
    const auto seq = sample_sequence(dist, 4, 0.5, rng);
    const auto layout = IndexMap::from_mode_to_qubit({1, 0, 3, 2});
    const auto circuit =
        compile_sequence(seq, dist, layout, hf_determinant(h.n_orb, h.n_alpha, h.n_beta), h.n_orb);

    int n_orb_back = 0;
    const auto back = circuit_from_json(circuit_to_json(circuit, h.n_orb), &n_orb_back);
    CHECK(n_orb_back == h.n_orb);
    CHECK(back.n_qubits == circuit.n_qubits);
    CHECK(back.layout == circuit.layout);
    CHECK(back.initial_occupation == circuit.initial_occupation);
    REQUIRE(back.rotations.size() == circuit.rotations.size());
    for (std::size_t i = 0; i < back.rotations.size(); ++i) {
        CHECK(back.rotations[i].first.word() == circuit.rotations[i].first.word());
        CHECK(back.rotations[i].second ==
              doctest::Approx(circuit.rotations[i].second).epsilon(1e-15));
    }
}
