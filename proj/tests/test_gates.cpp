#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "ducharge/gates.hpp"
#include "ducharge/local_operator.hpp"

using namespace ducharge;

TEST_CASE("dual of SWAP and FSWAP are themselves") {
    CHECK((dual(swap_gate(2)).entries - swap_gate(2).entries).norm() < 1e-15);
    CHECK((dual(fswap()).entries - fswap().entries).norm() < 1e-15);
}

TEST_CASE("dual is an involution and preserves the Frobenius norm") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Gate g = random_dual_unitary_qubit(seed);
        CHECK((dual(dual(g)).entries - g.entries).norm() < 1e-14);
        CHECK(dual(g).entries.norm() == doctest::Approx(g.entries.norm()));
    }
    // also for a gate that is not dual-unitary
    Gate c = cz();
    CHECK((dual(dual(c)).entries - c.entries).norm() < 1e-15);
}

TEST_CASE("dual-unitarity classification") {
    CHECK(is_dual_unitary(fswap()));
    CHECK(is_dual_unitary(swap_gate(2)));
    CHECK(is_unitary(cz()));
    CHECK_FALSE(is_dual_unitary(cz()));
    // dual of CZ has an all-zero row
    Gate dcz = dual(cz());
    double min_row = 1e300;
    for (int r = 0; r < 4; ++r) min_row = std::min(min_row, dcz.entries.row(r).norm());
    CHECK(min_row < 1e-15);
    Gate id{2, Matrix::Identity(4, 4)};
    CHECK(is_unitary(id));
    CHECK_FALSE(is_dual_unitary(id));
}

TEST_CASE("fswap acts as a fermionic swap") {
    Vector v01 = Vector::Zero(4), v10 = Vector::Zero(4), v11 = Vector::Zero(4);
    v01(1) = 1.0;
    v10(2) = 1.0;
    v11(3) = 1.0;
    CHECK((fswap().entries * v01 - v10).norm() < 1e-15);
    CHECK((fswap().entries * v11 + v11).norm() < 1e-15);
}

TEST_CASE("phased_swap") {
    CHECK((phased_swap(0.0).entries - swap_gate(2).entries).norm() < 1e-15);
    for (double theta : {0.3, 1.0, kPi / 4}) {
        Gate ps = phased_swap(theta);
        CHECK(is_dual_unitary(ps));
        // conjugating σ- ⊗ 1 gives e^{iθ} (1 ⊗ σ-)
        const auto& letters = site_letters(2);
        Matrix sm = 0.5 * (letters[1] - cx(0, 1) * letters[2]);
        Matrix lhs = ps.entries * kron(sm, letters[0]) * ps.entries.adjoint();
        Matrix rhs = std::polar(1.0, theta) * kron(letters[0], sm);
        CHECK((lhs - rhs).norm() < 1e-14);
    }
}

TEST_CASE("random parametrized gates are dual-unitary and deterministic") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Gate g = random_dual_unitary_qubit(seed);
        CHECK(is_dual_unitary(g, 1e-10));
    }
    Gate a = random_dual_unitary_qubit(42, 0.7), b = random_dual_unitary_qubit(42, 0.7);
    CHECK((a.entries - b.entries).norm() == doctest::Approx(0.0));
}

namespace {

// Local-unitary equivalence class of a two-qubit gate via the spectrum of
// M = (Q† U Q)ᵀ (Q† U Q) in the magic basis, normalized to SU(4). Two gates
// are locally equivalent iff the spectra match up to a common phase.
Vector magic_spectrum(const Gate& g) {
    Matrix Q(4, 4);
    const cx i(0, 1);
    Q << 1, 0, 0, i,
         0, i, 1, 0,
         0, i, -1, 0,
         1, 0, 0, -i;
    Q /= std::sqrt(2.0);
    Matrix u = g.entries;
    u /= std::pow(u.determinant(), 0.25);
    Matrix m = (Q.adjoint() * u * Q).transpose() * (Q.adjoint() * u * Q);
    Eigen::ComplexEigenSolver<Matrix> es(m);
    Vector ev = es.eigenvalues();
    std::vector<double> angles;
    for (int k = 0; k < 4; ++k) angles.push_back(std::arg(ev(k)));
    std::sort(angles.begin(), angles.end());
    Vector out(4);
    for (int k = 0; k < 4; ++k) out(k) = std::polar(1.0, angles[k]);
    return out;
}

bool same_local_class(const Gate& a, const Gate& b) {
    Vector sa = magic_spectrum(a), sb = magic_spectrum(b);
    // allow the SU(4) normalization's residual 4th-root-of-unity phase on U,
    // which shifts the spectrum of m by a common phase; compare multisets
    for (int shift = 0; shift < 8; ++shift) {
        cx ph = std::polar(1.0, kPi * shift / 4.0);
        std::vector<cx> pool;
        for (int k = 0; k < 4; ++k) pool.push_back(sb(k) * ph);
        double err = 0.0;
        for (int k = 0; k < 4; ++k) {  // greedy multiset matching
            size_t best = 0;
            double best_d = 1e300;
            for (size_t l = 0; l < pool.size(); ++l) {
                double dd = std::abs(sa(k) - pool[l]);
                if (dd < best_d) {
                    best_d = dd;
                    best = l;
                }
            }
            err = std::max(err, best_d);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
        }
        if (err < 1e-9) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("core interaction classes: J=0 matches FSWAP, J=pi/4 matches SWAP") {
    // identity single-qubit factors: fix them by seeding and stripping? use
    // the J-only core through the public interface with equal-seed locals
    // cancelled via class invariants instead.
    Gate j0 = random_dual_unitary_qubit(5, 0.0);
    Gate jq = random_dual_unitary_qubit(5, kPi / 4);
    CHECK(same_local_class(j0, fswap()));
    CHECK(same_local_class(jq, swap_gate(2)));
    CHECK_FALSE(same_local_class(fswap(), swap_gate(2)));
}

TEST_CASE("gate json round trip is exact") {
    Gate g = random_dual_unitary_qubit(77);
    Gate back = gate_from_json(gate_to_json(g));
    CHECK(back.d == 2);
    CHECK((back.entries - g.entries).norm() == 0.0);

    auto path = std::filesystem::temp_directory_path() / "ducharge_gate_test.json";
    save_gate(g, path.string());
    Gate loaded = load_gate(path.string());
    CHECK((loaded.entries - g.entries).norm() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("malformed gate files raise parse errors") {
    CHECK_THROWS_AS(gate_from_json("{"), parse_error);
    CHECK_THROWS_AS(gate_from_json("{\"d\": 2}"), parse_error);
    CHECK_THROWS_AS(gate_from_json("{\"d\": 2, \"matrix\": [[1, 2]]}"), parse_error);
}

TEST_CASE("qutrit swap gate is dual-unitary and self-dual") {
    Gate s3 = swap_gate(3);
    CHECK(is_dual_unitary(s3, 1e-12));
    CHECK((dual(s3).entries - s3.entries).norm() < 1e-15);
    // involution and norm preservation hold for arbitrary qutrit gates
    Gate g{3, Matrix::Random(9, 9)};
    CHECK((dual(dual(g)).entries - g.entries).norm() < 1e-14);
    CHECK(dual(g).entries.norm() == doctest::Approx(g.entries.norm()));
}
