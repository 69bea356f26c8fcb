#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ducharge/charges.hpp"

using namespace ducharge;

namespace {

LocalOperator pauli(int letter) {
    return {2, 1, site_letters(2)[letter]};
}

LocalOperator pauli_string(std::initializer_list<int> letters) {
    const auto& single = site_letters(2);
    Matrix m = Matrix::Identity(1, 1);
    for (int l : letters) m = kron(m, single[l]).eval();
    return {2, static_cast<int>(letters.size()), std::move(m)};
}

LocalOperator sigma_minus() {
    const auto& l = site_letters(2);
    return {2, 1, 0.5 * (l[1] - cx(0, 1) * l[2])};
}

ChargeRecord even_sigma_z_charge(int L) {
    std::vector<ChargeTerm> terms;
    for (int x = 0; x < 2 * L; x += 2) terms.push_back({cx(1.0), x, pauli(3)});
    return make_charge(2 * L, std::move(terms));
}

SolitonRecord first_with_lambda(const std::vector<SolitonRecord>& recs, cx lambda) {
    for (const auto& r : recs)
        if (std::abs(r.lambda - lambda) < 1e-9) return r;
    REQUIRE(false);
    return recs.front();
}

}  // namespace

TEST_CASE("charge_from_soliton: FSWAP sigma_z right mover gives the even-site sum") {
    auto recs = find_solitons(fswap(), fswap(), 1, Direction::plus);
    REQUIRE(recs.size() == 1);
    ChargeRecord q = charge_from_soliton(recs[0], 4);
    CHECK(q.terms.size() == 4);
    for (const auto& t : q.terms) {
        CHECK(t.x % 2 == 0);
        CHECK(std::abs(t.coeff - cx(1.0)) < 1e-12);
    }
    FloquetOperator F = floquet(fswap(), fswap(), 4);
    CHECK(verify_conserved(F, q) < 1e-12);
    LocalOperator ref = materialize_charge(even_sigma_z_charge(4));
    CHECK((materialize_charge(q).entries.normalized() - ref.entries.normalized()).norm() < 1e-9);
}

TEST_CASE("charge_from_soliton: phase gate") {
    // theta = 1.0: lambda = e^{2i}, lambda^4 = e^{8i} != 1 -> rejected
    Gate ps1 = phased_swap(1.0);
    auto recs1 = find_solitons(ps1, ps1, 1, Direction::plus);
    SolitonRecord sm1 = first_with_lambda(recs1, std::polar(1.0, 2.0));
    CHECK_THROWS_AS(charge_from_soliton(sm1, 4), phase_incompatible);
    try {
        charge_from_soliton(sm1, 4);
    } catch (const phase_incompatible& e) {
        CHECK(std::abs(e.lambda - std::polar(1.0, 2.0)) < 1e-9);
        CHECK(e.L == 4);
    }

    // theta = pi/4: lambda = i, lambda^4 = 1 -> conserved with i^{x/2} weights
    Gate ps2 = phased_swap(kPi / 4);
    auto recs2 = find_solitons(ps2, ps2, 1, Direction::plus);
    SolitonRecord smi = first_with_lambda(recs2, cx(0.0, 1.0));
    ChargeRecord q = charge_from_soliton(smi, 4);
    FloquetOperator F = floquet(ps2, ps2, 4);
    CHECK(verify_conserved(F, q) < 1e-10);
    for (const auto& t : q.terms)
        CHECK(std::abs(t.coeff - std::pow(cx(0.0, 1.0), t.x / 2)) < 1e-12);
}

TEST_CASE("verify_conserved") {
    FloquetOperator F = floquet(fswap(), fswap(), 4);
    CHECK(verify_conserved(F, even_sigma_z_charge(4)) < 1e-12);

    // fermion-pair density summed over all sites is conserved under FSWAP
    LocalOperator dens{2, 3,
                       kron(sigma_minus().entries, kron(pauli(3).entries, sigma_minus().entries))};
    std::vector<ChargeTerm> terms;
    for (int x = 0; x < 8; ++x) terms.push_back({cx(1.0), x, dens});
    CHECK(verify_conserved(F, make_charge(8, std::move(terms))) < 1e-12);

    // generic gate: the even sigma_z sum is far from conserved
    Gate g = random_dual_unitary_qubit(3);
    FloquetOperator Fg = floquet(g, g, 4);
    CHECK(verify_conserved(Fg, even_sigma_z_charge(4)) > 0.1);
}

TEST_CASE("make_charge validates terms") {
    CHECK_THROWS_AS(make_charge(8, {}), contract_error);
    CHECK_THROWS_AS(make_charge(8, {{cx(1.0), 0, pauli_string({0, 1})}}), contract_error);
    CHECK_THROWS_AS(make_charge(8, {{cx(1.0), 9, pauli(3)}}), contract_error);
}

TEST_CASE("brute force conserved space: FSWAP dimensions") {
    OracleResult r1 = brute_force_conserved_space(fswap(), fswap(), 4, 1);
    CHECK(r1.diagnostics.dimension == 2);
    CHECK(r1.diagnostics.conclusive);
    CHECK(r1.diagnostics.gap_ratio > 1e3);

    OracleResult r3 = brute_force_conserved_space(fswap(), fswap(), 4, 3);
    CHECK(r3.diagnostics.dimension == 12);
    CHECK(r3.basis.size() == 12);
    FloquetOperator F = floquet(fswap(), fswap(), 4);
    for (const auto& q : r3.basis) CHECK(verify_conserved(F, q) < 1e-9);
}

TEST_CASE("brute force conserved space: SWAP circuit") {
    // The swap circuit is chiral: a width-3 term at even x translates rigidly
    // only when its middle (odd) site is identity, since that site moves the
    // other way. Strict width-3 solitons are a ⊗ 1 ⊗ c with a, c traceless:
    // 9 per direction, plus 3 width-1 per direction.
    OracleResult r = brute_force_conserved_space(swap_gate(2), swap_gate(2), 4, 3);
    CHECK(r.diagnostics.dimension == 24);
    auto s3 = find_solitons(swap_gate(2), swap_gate(2), 3, Direction::plus);
    CHECK(s3.size() == 9);
    for (const auto& rec : s3) {
        Vector c = string_coefficients(rec.op);
        for (std::int64_t k = 0; k < c.size(); ++k)
            if (string_letter(k, 1, 2, 3) != 0) CHECK(std::abs(c(k)) < 1e-9);
    }
}

TEST_CASE("brute force conserved space: generic gates have none") {
    for (std::uint64_t seed : {101ull, 202ull}) {
        Gate g = random_dual_unitary_qubit(seed);
        OracleResult r = brute_force_conserved_space(g, g, 4, 3);
        CHECK(r.diagnostics.dimension == 0);
        CHECK(r.diagnostics.conclusive);
    }
}

TEST_CASE("oracle rejects bad arguments") {
    CHECK_THROWS_AS(brute_force_conserved_space(fswap(), fswap(), 4, 4), contract_error);
    CHECK_THROWS_AS(brute_force_conserved_space(fswap(), fswap(), 7, 1), resource_error);
}

TEST_CASE("theorem-1 equivalence: oracle span equals soliton-charge span") {
    struct Fixture {
        Gate g;
        const char* name;
    };
    std::vector<Fixture> fixtures = {{fswap(), "fswap"},
                                     {swap_gate(2), "swap"},
                                     {phased_swap(kPi / 4), "phased_swap(pi/4)"}};
    for (const auto& fx : fixtures) {
        CAPTURE(fx.name);
        OracleResult oracle = brute_force_conserved_space(fx.g, fx.g, 4, 3);
        std::vector<ChargeRecord> charges;
        for (int w = 1; w <= 3; w += 2) {
            for (Direction dir : {Direction::plus, Direction::minus}) {
                for (const auto& rec : find_solitons(fx.g, fx.g, w, dir))
                    if (std::abs(std::pow(rec.lambda, 4) - cx(1.0)) < 1e-8)
                        charges.push_back(charge_from_soliton(rec, 4));
            }
        }
        SpanComparison cmp = compare_charge_spans(oracle.basis, charges);
        CHECK(cmp.dim_a == cmp.dim_b);
        CHECK(cmp.max_principal_angle < 1e-7);
    }
}

TEST_CASE("decomposition: sigma_z sum is its own soliton charge") {
    ChargeRecord q = even_sigma_z_charge(4);
    ChargeDecomposition dec = decompose_into_soliton_charges(fswap(), fswap(), q, 3);
    CHECK(dec.reconstruction_residual < 1e-12);
    int nonzero = 0;
    for (const auto& c : dec.coeffs) {
        if (std::abs(c.value) > 1e-10) {
            ++nonzero;
            CHECK(c.dir == Direction::plus);
            CHECK(c.w == 1);
            CHECK(std::abs(c.value - cx(1.0)) < 1e-10);
        }
    }
    CHECK(nonzero == 1);
}

TEST_CASE("decomposition: mixed width-1 and width-3 conserved input") {
    // Q = Σ_even σz + 0.5 Σ_allx σx σz σx
    std::vector<ChargeTerm> terms;
    for (int x = 0; x < 8; x += 2) terms.push_back({cx(1.0), x, pauli(3)});
    for (int x = 0; x < 8; ++x) terms.push_back({cx(0.5), x, pauli_string({1, 3, 1})});
    ChargeRecord q = make_charge(8, std::move(terms));
    FloquetOperator F = floquet(fswap(), fswap(), 4);
    REQUIRE(verify_conserved(F, q) < 1e-10);

    ChargeDecomposition dec = decompose_into_soliton_charges(fswap(), fswap(), q, 3);
    CHECK(dec.reconstruction_residual < 1e-8);
    // width-3 weight must appear in both directions (even and odd halves)
    double w3_plus = 0.0, w3_minus = 0.0, w1_plus = 0.0;
    for (const auto& c : dec.coeffs) {
        if (c.w == 3 && c.dir == Direction::plus) w3_plus += std::abs(c.value);
        if (c.w == 3 && c.dir == Direction::minus) w3_minus += std::abs(c.value);
        if (c.w == 1 && c.dir == Direction::plus) w1_plus += std::abs(c.value);
    }
    CHECK(w3_plus > 0.1);
    CHECK(w3_minus > 0.1);
    CHECK(w1_plus == doctest::Approx(1.0));
}

TEST_CASE("decomposition: every oracle basis vector reconstructs") {
    OracleResult oracle = brute_force_conserved_space(fswap(), fswap(), 4, 3);
    for (const auto& q : oracle.basis) {
        ChargeDecomposition dec = decompose_into_soliton_charges(fswap(), fswap(), q, 3);
        CHECK(dec.reconstruction_residual < 1e-8);
    }
}

TEST_CASE("decomposition rejects non-conserved and even-width inputs") {
    ChargeRecord q = even_sigma_z_charge(4);
    Gate g = random_dual_unitary_qubit(17);
    CHECK_THROWS_AS(decompose_into_soliton_charges(g, g, q, 3), contract_error);
}

TEST_CASE("odd-even user charges are never conserved") {
    // width-2 terms at odd sites only: such sums always grow in width
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        Gate g = random_dual_unitary_qubit(seed);
        FloquetOperator F = floquet(g, g, 4);
        LocalOperator op = boundary_traceless_project(random_local_operator(2, 2, seed));
        std::vector<ChargeTerm> terms;
        for (int x = 1; x < 8; x += 2) terms.push_back({cx(1.0), x, op});
        CHECK(verify_conserved(F, make_charge(8, std::move(terms))) > 0.1);
    }
}

TEST_CASE("composite solitons") {
    Gate U = fswap();
    auto sz = find_solitons(U, U, 1, Direction::plus).front();

    // product of sigma_z at sites 0 and 4 translates with lambda = 1
    CompositeSoliton c = composite_soliton(U, U, {{sz, 0}, {sz, 4}}, 8);
    CHECK(c.record.width == 5);
    CHECK(std::abs(c.record.lambda - cx(1.0)) < 1e-12);
    CHECK(c.translation_residual < 1e-10);
    ChargeRecord q = charge_from_composite(c, 4);
    FloquetOperator F = floquet(U, U, 4);
    CHECK(verify_conserved(F, q) < 1e-10);

    // same-site / overlapping products are rejected
    CHECK_THROWS_AS(composite_soliton(U, U, {{sz, 0}, {sz, 0}}, 8), contract_error);
    // parity mismatch rejected
    CHECK_THROWS_AS(composite_soliton(U, U, {{sz, 0}, {sz, 3}}, 8), contract_error);
}

TEST_CASE("conjugate pairing rescues phase-incompatible solitons") {
    Gate ps = phased_swap(1.0);
    auto recs = find_solitons(ps, ps, 1, Direction::plus);
    SolitonRecord sm = first_with_lambda(recs, std::polar(1.0, 2.0));
    CHECK_THROWS_AS(charge_from_soliton(sm, 4), phase_incompatible);

    CompositeSoliton pair = conjugate_pair(ps, ps, sm, 0, 2, 8);
    CHECK(std::abs(pair.record.lambda - cx(1.0)) < 1e-12);
    ChargeRecord q = charge_from_composite(pair, 4);
    FloquetOperator F = floquet(ps, ps, 4);
    CHECK(verify_conserved(F, q) < 1e-10);
}

TEST_CASE("brute-force space carries no even-width or even-even content") {
    // No conserved weight may sit on even-width cells (nor even-even ones in
    // particular): expand each oracle vector in chain strings and measure.
    OracleResult oracle = brute_force_conserved_space(fswap(), fswap(), 4, 3);
    REQUIRE(oracle.diagnostics.dimension == 12);
    for (const auto& q : oracle.basis) {
        double even_w = 0.0, ee = 0.0, total = 0.0;
        for (const auto& t : q.terms) {
            double nrm2 = std::norm(t.coeff) * hs_norm(t.op) * hs_norm(t.op);
            total += nrm2;
            if (t.op.w % 2 == 0) even_w += nrm2;
            if (t.op.w % 2 == 0 && t.x % 2 == 0) ee += nrm2;
        }
        CHECK(std::sqrt(even_w / total) < 1e-9);
        CHECK(std::sqrt(ee / total) < 1e-9);
    }
}

TEST_CASE("charge json round trip") {
    ChargeRecord q = even_sigma_z_charge(4);
    ChargeRecord back = charge_from_json(charge_to_json(q));
    CHECK(back.chain_len == 8);
    REQUIRE(back.terms.size() == q.terms.size());
    LocalOperator a = materialize_charge(q), b = materialize_charge(back);
    CHECK((a.entries - b.entries).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(charge_from_json("{"), parse_error);
}

TEST_CASE("qutrit swap circuit oracle: one charge per traceless letter and parity") {
    Gate s3 = swap_gate(3);
    OracleResult r = brute_force_conserved_space(s3, s3, 2, 1);
    CHECK(r.diagnostics.dimension == 16);
    CHECK(r.diagnostics.conclusive);
    // soliton charges span the same space
    std::vector<ChargeRecord> charges;
    for (Direction dir : {Direction::plus, Direction::minus})
        for (const auto& rec : find_solitons(s3, s3, 1, dir))
            if (std::abs(std::pow(rec.lambda, 2) - cx(1.0)) < 1e-8)
                charges.push_back(charge_from_soliton(rec, 2));
    SpanComparison cmp = compare_charge_spans(r.basis, charges);
    CHECK(cmp.dim_a == cmp.dim_b);
    CHECK(cmp.max_principal_angle < 1e-7);
    FloquetOperator F = floquet(s3, s3, 2);
    for (const auto& q : charges) CHECK(verify_conserved(F, q) < 1e-10);
}

TEST_CASE("inhomogeneous layers: charge built from the two-layer phase conserves") {
    // theta1 + theta2 = pi/2 makes lambda = i, an L-th root of unity at L = 4
    double t1 = 0.9, t2 = kPi / 2 - 0.9;
    Gate U = phased_swap(t1), V = phased_swap(t2);
    auto recs = find_solitons(U, V, 1, Direction::plus);
    bool found = false;
    for (const auto& r : recs) {
        if (std::abs(r.lambda - cx(0, 1)) > 1e-9) continue;
        found = true;
        ChargeRecord q = charge_from_soliton(r, 4);
        FloquetOperator F = floquet(U, V, 4);
        CHECK(verify_conserved(F, q) < 1e-10);
    }
    CHECK(found);
}

TEST_CASE("decomposition report json carries coefficient tables and residuals") {
    ChargeRecord q = even_sigma_z_charge(4);
    ChargeDecomposition dec = decompose_into_soliton_charges(fswap(), fswap(), q, 3);
    std::string j = decomposition_to_json(dec);
    CHECK(j.find("\"coefficients\"") != std::string::npos);
    CHECK(j.find("\"reconstruction_residual\"") != std::string::npos);
    CHECK(j.find("\"phase_compatible\"") != std::string::npos);
    CHECK(j.find("\"lambda\"") != std::string::npos);
}
