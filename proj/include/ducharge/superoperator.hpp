#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ducharge/gates.hpp"
#include "ducharge/local_operator.hpp"

namespace ducharge {

enum class Direction { plus, minus };

inline const char* direction_name(Direction d) { return d == Direction::plus ? "plus" : "minus"; }

// Light-cone window map as a dense matrix on vectorized width-w operators.
// Construction verifies unitality, trace preservation and spectral radius
// <= 1 + 1e-10, and caches the eigendecomposition.
struct Superoperator {
    int d = 2;
    int w = 1;
    Direction direction = Direction::plus;
    std::vector<Gate> built_from;
    Matrix entries;

    Vector eigenvalues;
    Matrix eigenvectors;

    LocalOperator apply(const LocalOperator& op) const;
    LocalOperator apply_power(const LocalOperator& op, int t) const;
    double spectral_radius() const;
};

// Single-layer edge maps: m_plus(U)(a) = tr_0[U (a ⊗ 1) U†] / d,
// m_minus(U)(a) = tr_1[U (1 ⊗ a) U†] / d.
Superoperator m_plus(const Gate& U);
Superoperator m_minus(const Gate& U);

// Two-layer window map on odd width w: (w+1)/2 copies of U, edge trace,
// then (w+1)/2 copies of V, edge trace, total prefactor 1/d². For w = 1 this
// equals the composition of the two single-layer maps (V after U).
Superoperator m_w(const Gate& U, const Gate& V, int w, Direction dir);

struct EigenPair {
    cx lambda;
    LocalOperator op;
};

// All eigenpairs with ||λ| - 1| < tol, residual-verified and orthonormalized
// within each eigenvalue cluster. Ordered by angle(λ), then by leading
// string coefficient.
std::vector<EigenPair> unimodular_eigenspace(const Superoperator& S, double tol = 1e-8);

struct SolitonRecord {
    LocalOperator op;  // in the boundary-traceless subspace, hs_norm = sqrt(d^w)
    Direction direction = Direction::plus;
    int width = 1;
    cx lambda{1.0, 0.0};

    SolitonRecord adjoint() const;  // soliton with phase conj(λ)
};

// Unimodular eigenvectors of m_w(U, V, w, dir) intersected with the
// boundary-traceless subspace; padded narrower solitons and the identity
// drop out. Gates must be dual-unitary.
std::vector<SolitonRecord> find_solitons(const Gate& U, const Gate& V, int w, Direction dir,
                                         double tol = 1e-8);

struct SubspaceDiagnostics {
    // norm_ratios[r][t-1] = |S^t(op_r)| / |op_r|
    std::vector<std::vector<double>> norm_ratios;
    double max_ratio_deviation = 0.0;        // max |ratio - 1|
    double max_pair_deviation = 0.0;         // max |<S^t a, S^t b> - <a, b>| / d^w
    double max_complement_growth = 0.0;      // max over random complement ops of ratio increase per step
    bool complement_nonincreasing = true;
};

// Checks that the soliton span is a unitary subspace of S (norms and pairwise
// inner products preserved under S^t) and that operators hs-orthogonal to the
// full unimodular eigenspace have non-increasing norms.
SubspaceDiagnostics unitary_subspace_diagnostics(const Superoperator& S,
                                                 const std::vector<SolitonRecord>& records,
                                                 int t_max, std::uint64_t seed = 7);

// CSV rows: re(lambda), im(lambda), abs(lambda), width, direction.
std::string spectrum_csv(const Superoperator& S);
std::string solitons_to_json(const std::vector<SolitonRecord>& records);

}  // namespace ducharge
