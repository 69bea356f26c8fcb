#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ducharge/chain.hpp"
#include "ducharge/pauli.hpp"

using namespace ducharge;

namespace {

PauliTerm term(cx coeff, std::initializer_list<std::pair<int, int>> letters,
               std::optional<int> tail = std::nullopt) {
    PauliTerm t;
    t.coeff = coeff;
    for (auto [site, l] : letters) t.letters[site] = static_cast<PauliLetter>(l);
    t.left_string = tail;
    return t;
}

}  // namespace

TEST_CASE("single-letter product algebra") {
    // X·Y = iZ on one site, checked through term products
    PauliSum x{{term(1.0, {{0, 1}})}}, y{{term(1.0, {{0, 2}})}};
    PauliSum xy = pauli_product(x, y);
    REQUIRE(xy.terms.size() == 1);
    CHECK(xy.terms[0].coeff == cx(0, 1));
    CHECK(xy.terms[0].letters.at(0) == 3);
    // X·X = identity
    PauliSum xx = pauli_product(x, x);
    REQUIRE(xx.terms.size() == 1);
    CHECK(xx.terms[0].letters.empty());
    CHECK(xx.terms[0].coeff == cx(1.0));
}

TEST_CASE("canonicalize merges strings and drops zeros") {
    PauliSum s{{term(0.5, {{0, 3}, {2, 1}}), term(0.5, {{0, 3}, {2, 1}}), term(1e-16, {{1, 2}})}};
    PauliSum c = canonicalize(s);
    REQUIRE(c.terms.size() == 1);
    CHECK(c.terms[0].coeff == cx(1.0));
}

TEST_CASE("tail canonicalization absorbs boundary Zs") {
    PauliTerm t = term(1.0, {{3, 3}, {4, 1}}, 3);
    t.canonicalize_tail();
    CHECK(t.left_string == 4);
    CHECK(t.letters.size() == 1);
    CHECK(t.letters.at(4) == 1);
}

TEST_CASE("tail products cancel pairwise") {
    // two tails: the shared Z string cancels below both boundaries
    PauliTerm a = term(1.0, {{2, 1}}, 2), b = term(1.0, {{5, 1}}, 5);
    PauliTerm ab = pauli_term_product(a, b);
    CHECK_FALSE(ab.left_string.has_value());
    // X at 2 times tail-Z at 2: X·Z = -iY
    CHECK(ab.letters.at(2) == 2);
    CHECK(ab.letters.at(3) == 3);
    CHECK(ab.letters.at(4) == 3);
    CHECK(ab.letters.at(5) == 1);
    CHECK(ab.coeff == cx(0, -1));

    // one tail against a finite term with letters below the boundary: the
    // explicit Z at 0 cancels the tail Z there, leaving a hole at site 0
    PauliTerm c = term(1.0, {{0, 3}}, std::nullopt), d = term(1.0, {{4, 1}}, 3);
    PauliTerm cd = pauli_term_product(c, d);
    REQUIRE(cd.left_string.has_value());
    CHECK(*cd.left_string == 0);
    CHECK(cd.letters.count(0) == 0);
    CHECK(cd.letters.at(1) == 3);
    CHECK(cd.letters.at(2) == 3);
    CHECK(cd.letters.at(4) == 1);
    CHECK(cd.coeff == cx(1.0));
}

TEST_CASE("tableau of FSWAP matches the gate conjugation rules") {
    CliffordTableau tab = tableau_from_gate(fswap());
    // X⊗1 -> Z⊗X, Y⊗1 -> Z⊗Y, Z⊗1 -> 1⊗Z
    CHECK(tab.left[0].a == 3);
    CHECK(tab.left[0].b == 1);
    CHECK(tab.left[0].phase == cx(1.0));
    CHECK(tab.left[1].a == 3);
    CHECK(tab.left[1].b == 2);
    CHECK(tab.left[2].a == 0);
    CHECK(tab.left[2].b == 3);
    // Z⊗Z -> +Z⊗Z
    CHECK(tab.z_string_stable);
    SignedPauliPair zz = tab.image(3, 3);
    CHECK(zz.a == 3);
    CHECK(zz.b == 3);
    CHECK(zz.phase == cx(1.0));
}

TEST_CASE("tableau of SWAP exchanges the legs") {
    CliffordTableau tab = tableau_from_gate(swap_gate(2));
    CHECK(tab.left[0].a == 0);
    CHECK(tab.left[0].b == 1);
    CHECK(tab.right[2].a == 3);
    CHECK(tab.right[2].b == 0);
    CHECK(tab.z_string_stable);
}

TEST_CASE("generic dual-unitary gates are not Clifford") {
    CHECK_THROWS_AS(tableau_from_gate(random_dual_unitary_qubit(4)), non_clifford_error);
    try {
        tableau_from_gate(random_dual_unitary_qubit(4));
    } catch (const non_clifford_error& e) {
        CHECK_FALSE(e.generator.empty());
    }
}

TEST_CASE("brickwork step moves sigma_z at light speed") {
    CliffordTableau tab = tableau_from_gate(fswap());
    PauliSum z0{{term(1.0, {{0, 3}})}};
    PauliSum moved = brickwork_step(tab, tab, z0, 1);
    CHECK(pauli_equal(moved, PauliSum{{term(1.0, {{2, 3}})}}));
    PauliSum z1{{term(1.0, {{1, 3}})}};
    CHECK(pauli_equal(brickwork_step(tab, tab, z1, 1), PauliSum{{term(1.0, {{-1, 3}})}}));
}

TEST_CASE("fermion pair density is a fixed point of the FSWAP brickwork") {
    CliffordTableau tab = tableau_from_gate(fswap());
    // σ- σz σ- at sites 0..2 expands to 4 strings over X/Y ⊗ Z ⊗ X/Y
    PauliSum F01 = fermion_pair(0, 1);
    CHECK(F01.terms.size() == 4);
    for (const auto& t : F01.terms) {
        CHECK_FALSE(t.left_string.has_value());
        CHECK(t.letters.size() == 3);
        CHECK(t.letters.at(1) == 3);
    }
    PauliSum moved = brickwork_step(tab, tab, F01, 1);
    CHECK(pauli_equal(moved, fermion_pair(2, 1)));
    // coefficient-exact over many steps
    PauliSum far = brickwork_step(tab, tab, F01, 50);
    CHECK(pauli_equal(far, fermion_pair(100, 1)));
    // wider gap: σ- σz³ σ- (width 5) behaves the same way
    CHECK(pauli_equal(brickwork_step(tab, tab, fermion_pair(0, 3), 1), fermion_pair(2, 3)));
}

TEST_CASE("jw_fermion construction") {
    PauliSum f0 = jw_fermion(0, FermionMode::finite_from_0);
    REQUIRE(f0.terms.size() == 2);
    // (X - iY)/2 at site 0
    CHECK(f0.terms[0].coeff == cx(0.5, 0.0));
    CHECK(f0.terms[0].letters.at(0) == 1);
    CHECK(f0.terms[1].coeff == cx(0.0, -0.5));
    CHECK(f0.terms[1].letters.at(0) == 2);

    PauliSum f2 = jw_fermion(2, FermionMode::finite_from_0);
    for (const auto& t : f2.terms) {
        CHECK(t.letters.at(0) == 3);
        CHECK(t.letters.at(1) == 3);
    }
    PauliSum f2s = jw_fermion(2, FermionMode::semi_infinite);
    for (const auto& t : f2s.terms) CHECK(t.left_string == 2);
    CHECK_THROWS_AS(jw_fermion(-1, FermionMode::finite_from_0), contract_error);
}

TEST_CASE("fermionic anticommutation is exact") {
    for (auto mode : {FermionMode::semi_infinite, FermionMode::finite_from_0}) {
        PauliSum f0 = jw_fermion(0, mode);
        PauliSum f1 = jw_fermion(1, mode);
        PauliSum f3 = jw_fermion(3, mode);
        CHECK(anticommutator(f0, f1).empty());
        CHECK(anticommutator(f0, f3).empty());
        CHECK(anticommutator(f1, f3).empty());
        // f² = 0
        CHECK(pauli_product(f0, f0).empty());
    }
}

TEST_CASE("fermion pairs obey bosonic statistics exactly") {
    CHECK(commutator(fermion_pair(0, 1), fermion_pair(4, 1)).empty());
    CHECK(commutator(fermion_pair(0, 1), fermion_pair(6, 3)).empty());
    CHECK(commutator(fermion_pair(0, 3), fermion_pair(2, 1)).empty());
    CHECK_THROWS_AS(fermion_pair(0, 2), contract_error);
}

TEST_CASE("semi-infinite fermions translate exactly under FSWAP brickwork") {
    CliffordTableau tab = tableau_from_gate(fswap());
    PauliSum cur = jw_fermion(0, FermionMode::semi_infinite);
    for (int t = 1; t <= 50; ++t) {
        cur = brickwork_step(tab, tab, cur, 1);
        REQUIRE(pauli_equal(cur, jw_fermion(2 * t, FermionMode::semi_infinite)));
    }
    PauliSum odd = jw_fermion(3, FermionMode::semi_infinite);
    PauliSum moved = brickwork_step(tab, tab, odd, 5);
    CHECK(pauli_equal(moved, jw_fermion(3 - 10, FermionMode::semi_infinite)));
}

TEST_CASE("finite-from-0 fermion leaks at its left end") {
    CliffordTableau tab = tableau_from_gate(fswap());
    PauliSum f2 = jw_fermion(2, FermionMode::finite_from_0);
    PauliSum moved = brickwork_step(tab, tab, f2, 1);
    CHECK_FALSE(pauli_equal(moved, jw_fermion(4, FermionMode::finite_from_0)));
    // the string now reaches site -1
    bool reaches_minus_one = false;
    for (const auto& t : moved.terms) reaches_minus_one |= t.letters.count(-1) > 0;
    CHECK(reaches_minus_one);
}

TEST_CASE("tails require a Z-string-stable tableau") {
    // phased_swap(pi/2) is Clifford but maps Z⊗Z with an unstable string
    // structure on single legs; build a tableau that is Clifford yet not
    // z-string-stable: SWAP·(S⊗S) where S = diag(1, i)
    Gate ps = phased_swap(kPi / 2);
    CliffordTableau tab = tableau_from_gate(ps);
    if (!tab.z_string_stable) {
        PauliSum f0 = jw_fermion(0, FermionMode::semi_infinite);
        CHECK_THROWS_AS(brickwork_step(tab, tab, f0, 1), contract_error);
    } else {
        // fall back: tampering with the stability flag must be caught
        tab.z_string_stable = false;
        PauliSum f0 = jw_fermion(0, FermionMode::semi_infinite);
        CHECK_THROWS_AS(brickwork_step(tab, tab, f0, 1), contract_error);
    }
}

TEST_CASE("dense and symbolic brickwork agree on a periodic chain away from the wrap") {
    CliffordTableau tab = tableau_from_gate(fswap());
    int L = 6, n = 12;
    FloquetOperator F = floquet(fswap(), fswap(), L);
    // finite-support sum on sites 2..7, one period keeps it within [0, 11]
    PauliSum P = pauli_add(PauliSum{{term(cx(0.25, 0.5), {{2, 1}, {3, 3}, {4, 1}})}},
                           PauliSum{{term(cx(1.0, 0.0), {{5, 3}, {7, 2}})}});
    PauliSum moved = brickwork_step(tab, tab, P, 1);

    LocalOperator dense = pauli_sum_to_chain(P, L);
    Matrix evolved = dense.entries;
    conjugate_floquet_step(evolved, fswap(), fswap(), L);
    LocalOperator symbolic = pauli_sum_to_chain(moved, L);
    CHECK((evolved - symbolic.entries).norm() < 1e-12);
}

TEST_CASE("conjugation preserves term count and coefficient magnitudes") {
    CliffordTableau tab = tableau_from_gate(fswap());
    PauliSum P = pauli_add(PauliSum{{term(cx(0.3, -0.1), {{0, 1}, {1, 2}, {5, 3}})}},
                           PauliSum{{term(cx(0.0, 2.0), {{2, 2}})}});
    PauliSum moved = brickwork_step(tab, tab, P, 7);
    REQUIRE(moved.terms.size() == P.terms.size());
    std::vector<double> mags_in, mags_out;
    for (const auto& t : P.terms) mags_in.push_back(std::abs(t.coeff));
    for (const auto& t : moved.terms) mags_out.push_back(std::abs(t.coeff));
    std::sort(mags_in.begin(), mags_in.end());
    std::sort(mags_out.begin(), mags_out.end());
    for (size_t i = 0; i < mags_in.size(); ++i) CHECK(mags_in[i] == doctest::Approx(mags_out[i]));
}

TEST_CASE("pauli sum text round trip is exact") {
    PauliSum s = pauli_add(jw_fermion(3, FermionMode::semi_infinite),
                           PauliSum{{term(cx(0.1, -0.7), {{-2, 1}, {4, 3}})}});
    PauliSum back = pauli_sum_from_text(pauli_sum_to_text(s));
    CHECK(pauli_equal(s, back));
    CHECK_THROWS_AS(pauli_sum_from_text("not a number"), parse_error);
}
