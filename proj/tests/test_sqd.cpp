#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "sqdrift/determinant.hpp"
#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/oracle.hpp"
#include "sqdrift/sqd.hpp"

using namespace sqdrift;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR "/") + name; }

SampleBatch batch_of(std::vector<std::pair<Determinant, int>> counts, int k, int rid) {
    SampleBatch b;
    b.krylov_index = k;
    b.randomization_id = rid;
    for (const auto& [det, n] : counts) {
        b.counts[det] = n;
        b.shots += n;
    }
    return b;
}

} // namespace

TEST_CASE("slater-condon elements match the sector projection oracle") {
    for (const auto& h : {build_hubbard(3, 1.0, 2.0, 2, 1),
                          parse_fcidump_file(fixture("h2_sto3g.fcidump")),
                          parse_fcidump_file(fixture("h4_sto3g.fcidump"))}) {
        const SectorOracle oracle(h);
        const auto& dets = oracle.dets();
        for (std::size_t i = 0; i < dets.size(); ++i)
            for (std::size_t j = 0; j < dets.size(); ++j) {
                CAPTURE(i);
                CAPTURE(j);
                CHECK(hamiltonian_element(dets[i], dets[j], h) ==
                      doctest::Approx(oracle.matrix()(static_cast<Eigen::Index>(i),
                                                      static_cast<Eigen::Index>(j)))
                          .epsilon(1e-10));
            }
    }
}

TEST_CASE("matrix elements are symmetric") {
    const auto h = parse_fcidump_file(fixture("h4_sto3g.fcidump"));
    const auto dets = enumerate_sector(h.n_orb, h.n_alpha, h.n_beta);
    for (std::size_t i = 0; i < dets.size(); i += 3)
        for (std::size_t j = i; j < dets.size(); j += 5)
            CHECK(hamiltonian_element(dets[i], dets[j], h) ==
                  doctest::Approx(hamiltonian_element(dets[j], dets[i], h)).epsilon(1e-12));
}

TEST_CASE("collect unions batches and filters the sector") {
    const Determinant d1{0b011ULL, 0b011ULL};
    const Determinant d2{0b101ULL, 0b011ULL};
    const Determinant d3{0b110ULL, 0b101ULL};
    const Determinant bad{0b111ULL, 0b001ULL}; // 3 alpha, 1 beta

    const std::vector<SampleBatch> batches = {
        batch_of({{d1, 5}, {d2, 1}, {bad, 3}}, 1, 0),
        batch_of({{d1, 2}, {d3, 4}}, 2, 1),
    };
    const auto sub = collect_subspace(batches, 2, 2);
    REQUIRE(sub.determinants.size() == 3);
    CHECK(std::is_sorted(sub.determinants.begin(), sub.determinants.end()));
    CHECK(std::count(sub.determinants.begin(), sub.determinants.end(), bad) == 0);

    // provenance records the sorted (k, rid) sources of each determinant
    const auto it = std::find(sub.determinants.begin(), sub.determinants.end(), d1);
    REQUIRE(it != sub.determinants.end());
    const auto& prov = sub.provenance[static_cast<std::size_t>(it - sub.determinants.begin())];
    CHECK(prov == std::vector<std::pair<int, int>>{{1, 0}, {2, 1}});

    CHECK_THROWS(collect_subspace({batch_of({{bad, 1}}, 0, 0)}, 2, 2));
}

TEST_CASE("recombination closes alpha and beta strings") {
    const Determinant d1{0b011ULL, 0b011ULL};
    const Determinant d2{0b101ULL, 0b110ULL};
    const auto sub = collect_subspace({batch_of({{d1, 1}, {d2, 1}}, 0, 0)}, 2, 2, true);
    REQUIRE(sub.determinants.size() == 4); // 2 alpha strings x 2 beta strings
    std::set<std::uint64_t> alphas, betas;
    for (const auto& det : sub.determinants) {
        alphas.insert(det.alpha);
        betas.insert(det.beta);
    }
    CHECK(alphas == std::set<std::uint64_t>{0b011ULL, 0b101ULL});
    CHECK(betas == std::set<std::uint64_t>{0b011ULL, 0b110ULL});
}

TEST_CASE("truncation keeps the most sampled determinants") {
    const Determinant d1{0b011ULL, 0b011ULL};
    const Determinant d2{0b101ULL, 0b011ULL};
    const Determinant d3{0b110ULL, 0b011ULL};
    const auto sub = collect_subspace(
        {batch_of({{d1, 9}, {d2, 2}, {d3, 5}}, 0, 0)}, 2, 2, false, std::size_t{2});
    REQUIRE(sub.determinants.size() == 2);
    CHECK(sub.determinants == std::vector<Determinant>{d1, d3});

    // tie at the cut: the lexicographically smaller bitstring wins
    const auto tied = collect_subspace(
        {batch_of({{d1, 9}, {d2, 5}, {d3, 5}}, 0, 0)}, 2, 2, false, std::size_t{2});
    CHECK(tied.determinants == std::vector<Determinant>{d1, d2});
}

TEST_CASE("subsampling is a deterministic bernoulli thinning") {
    const Determinant d1{0b011ULL, 0b011ULL};
    const Determinant d2{0b101ULL, 0b011ULL};
    const std::vector<SampleBatch> batches = {batch_of({{d1, 400}, {d2, 100}}, 1, 0),
                                              batch_of({{d1, 50}}, 2, 0)};

    RngStream a(9), b(9);
    const auto ta = subsample_batches(batches, 0.5, a);
    const auto tb = subsample_batches(batches, 0.5, b);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i].counts == tb[i].counts);

    for (const auto& t : ta)
        for (const auto& [det, n] : t.counts) CHECK(n > 0);

    // fraction 1 keeps everything, fraction 0 keeps nothing
    RngStream c(9);
    const auto full = subsample_batches(batches, 1.0, c);
    REQUIRE(full.size() == 2);
    CHECK(full[0].counts == batches[0].counts);
    CHECK(full[1].counts == batches[1].counts);
    RngStream d(9);
    CHECK(subsample_batches(batches, 0.0, d).empty());
    RngStream e(9);
    CHECK_THROWS(subsample_batches(batches, 1.5, e));

    // thinning at 0.5 lands near half of the 550 total shots
    int kept = 0;
    for (const auto& t : ta) kept += t.shots;
    CHECK(kept > 200);
    CHECK(kept < 350);
}

TEST_CASE("subspace operator reproduces the dense sector matrix") {
    const auto h = build_hubbard(4, 1.0, 2.0, 2, 2);
    const SectorOracle oracle(h);
    SubspaceOperator op(oracle.dets(), h);
    REQUIRE(op.dim() == oracle.dim());

    const auto n = static_cast<Eigen::Index>(op.dim());
    for (Eigen::Index i = 0; i < n; ++i)
        CHECK(op.diagonal(static_cast<std::size_t>(i)) ==
              doctest::Approx(oracle.matrix()(i, i)).epsilon(1e-12));

    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
    Eigen::VectorXd y(n);
    op.apply(x.data(), y.data());
    const Eigen::VectorXd expected = oracle.matrix() * x;
    CHECK((y - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("full-sector diagonalization reaches the exact ground energy") {
    for (const auto& h : {build_hubbard(4, 1.0, 2.0, 2, 2),
                          parse_fcidump_file(fixture("h4_sto3g.fcidump"))}) {
        const SectorOracle oracle(h);
        Subspace sub;
        sub.determinants = oracle.dets();
        sub.provenance.resize(sub.determinants.size());
        const auto res = diagonalize(sub, h);
        CHECK(res.dimension == static_cast<int>(oracle.dim()));
        CHECK(res.energy == doctest::Approx(oracle.fci_energy()).epsilon(1e-10));
        CHECK(res.ground_vector.size() == oracle.dim());
    }
}

TEST_CASE("energies decrease monotonically over nested subspaces") {
    const auto h = parse_fcidump_file(fixture("h4_sto3g.fcidump"));
    const SectorOracle oracle(h);
    const auto all = oracle.dets();

    double previous = 1e300;
    for (std::size_t size : {1ul, 5ul, 12ul, 24ul, all.size()}) {
        Subspace sub;
        sub.determinants.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
        std::sort(sub.determinants.begin(), sub.determinants.end());
        sub.provenance.resize(sub.determinants.size());
        const auto res = diagonalize(sub, h);
        CHECK(res.energy <= previous + 1e-12);
        CHECK(res.energy >= oracle.fci_energy() - 1e-9);
        previous = res.energy;
    }
}

TEST_CASE("davidson and lanczos agree above the dense cutoff") {
    // 4900 determinants: diagonalize switches to davidson, fci_solve to lanczos
    const auto h = build_hubbard(8, 1.0, 2.0, 4, 4);
    Subspace sub;
    sub.determinants = enumerate_sector(h.n_orb, h.n_alpha, h.n_beta);
    REQUIRE(sub.determinants.size() == 4900);
    sub.provenance.resize(sub.determinants.size());
    const auto res = diagonalize(sub, h, 1e-9);
    const auto fci = fci_solve(h);
    CHECK(res.energy == doctest::Approx(fci.energy).epsilon(1e-7));
    CHECK(res.solver_iterations > 0);
    CHECK(res.residual_norm < 1e-6);
}

TEST_CASE("diagonalize rejects an empty subspace") {
    const auto h = build_hubbard(2, 1.0, 1.0, 1, 1);
    CHECK_THROWS(diagonalize(Subspace{}, h));
}

TEST_CASE("result json lists the dimension, energy, and top weights") {
    const auto h = build_hubbard(2, 1.0, 4.0, 1, 1);
    Subspace sub;
    sub.determinants = enumerate_sector(2, 1, 1);
    sub.provenance.resize(sub.determinants.size());
    const auto res = diagonalize(sub, h);
    const auto j = nlohmann::json::parse(result_to_json(res, sub, h.n_orb, 2));
    CHECK(j.at("dimension").get<int>() == 4);
    CHECK(j.at("energy").get<double>() == doctest::Approx(res.energy));
    CHECK(j.at("top_coefficients").size() == 2);
}

TEST_CASE("reference selection minimizes the mean-field diagonal") {
    // half-filled chain at strong U: lowest-index filling stacks three doubly
    // occupied sites (diagonal 3U) while the alternating-spin determinant has
    // none and the strongest hopping connectivity
    const auto h = build_hubbard(6, 1.0, 4.0, 3, 3);
    const Determinant ref = select_reference(h);
    CHECK(ref.alpha == 0b101010u);
    CHECK(ref.beta == 0b010101u);
    CHECK(hamiltonian_element(ref, ref, h) == doctest::Approx(0.0));
    const Determinant aufbau = hf_determinant(6, 3, 3);
    CHECK(hamiltonian_element(aufbau, aufbau, h) == doctest::Approx(12.0));

    // deterministic across calls
    const Determinant again = select_reference(h);
    CHECK(again == ref);
}

TEST_CASE("reference selection keeps the aufbau determinant when it is best") {
    for (const char* name : {"h2_sto3g.fcidump", "h4_sto3g.fcidump"}) {
        CAPTURE(name);
        const auto h = parse_fcidump_file(fixture(name));
        const Determinant ref = select_reference(h);
        CHECK(ref == hf_determinant(h.n_orb, h.n_alpha, h.n_beta));
    }

    // all diagonals tie at zero for the free dimer; the smallest key wins and
    // that is again the lowest-index filling
    const auto dimer = build_hubbard(2, 1.0, 0.0, 1, 1);
    CHECK(select_reference(dimer) == hf_determinant(2, 1, 1));
}

TEST_CASE("reference selection falls back to aufbau above the scan cap") {
    const auto h = build_hubbard(6, 1.0, 4.0, 3, 3);
    CHECK(select_reference(h, 10) == hf_determinant(6, 3, 3));
}
