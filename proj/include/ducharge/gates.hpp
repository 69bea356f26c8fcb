#pragma once

#include <cstdint>
#include <string>

#include "ducharge/common.hpp"

namespace ducharge {

// Two-qudit gate, d² x d² in the basis |i> ⊗ |j> with i slowest.
struct Gate {
    int d = 2;
    Matrix entries;

    static Gate from_matrix(int d, Matrix m);
};

// Space-time reshuffle: dual(U)_{(ij),(kl)} = U_{(lj),(ki)}. Involutive and
// Frobenius-norm preserving (it permutes entries).
Gate dual(const Gate& g);

double unitarity_residual(const Gate& g);  // max-norm of g g† - 1
double duality_residual(const Gate& g);    // max-norm of dual(g) dual(g)† - 1
bool is_unitary(const Gate& g, double tol = 1e-10);
bool is_dual_unitary(const Gate& g, double tol = 1e-10);

Gate swap_gate(int d = 2);
Gate fswap();
Gate cz();
// SWAP · (u ⊗ u) with u = diag(1, e^{iθ}); dual-unitary for every θ and the
// standard fixture for solitons with non-unit phase.
Gate phased_swap(double theta);

// (u1 ⊗ u2) · exp[i(π/4 XX + π/4 YY + J ZZ)] · (u3 ⊗ u4) with Haar-random
// single-qubit factors. Deterministic in the seed; dual-unitary for every J.
Gate random_dual_unitary_qubit(std::uint64_t seed, double J);
// Same, with J also drawn from the seeded generator.
Gate random_dual_unitary_qubit(std::uint64_t seed);

// Gate file format: {"d": int, "matrix": [[[re, im], ...], ...]} row-major.
// Round-trips doubles exactly.
std::string gate_to_json(const Gate& g);
Gate gate_from_json(const std::string& text);
void save_gate(const Gate& g, const std::string& path);
Gate load_gate(const std::string& path);

Matrix matrix_from_json_text(const std::string& text, const std::string& key);

}  // namespace ducharge
