#pragma once

#include <set>
#include <vector>

#include "ducharge/common.hpp"

namespace ducharge {

// Dense operator on w contiguous qudit sites. Basis ordering is
// |i_1> ⊗ ... ⊗ |i_w> with i_1 (site 0) slowest, so kron(A, B) puts A on the
// lower-numbered site. w = 0 is permitted as the result of a full partial
// trace (a 1x1 scalar).
struct LocalOperator {
    int d = 2;
    int w = 1;
    Matrix entries;

    std::int64_t dim() const { return ipow(d, w); }

    static LocalOperator identity(int d, int w);
    static LocalOperator zero(int d, int w);

    LocalOperator adjoint() const { return {d, w, entries.adjoint()}; }
    bool is_finite() const;
};

void check_same_shape(const LocalOperator& a, const LocalOperator& b);

LocalOperator kron(const LocalOperator& a, const LocalOperator& b);
Matrix kron(const Matrix& a, const Matrix& b);

// tr(a† b). hs_norm(a) = sqrt(hs_inner(a, a)).
cx hs_inner(const LocalOperator& a, const LocalOperator& b);
double hs_norm(const LocalOperator& a);

// Orthogonal single-site string letters, index 0 = identity, each with
// tr(B† B) = d. For d = 2 the Pauli set {1, X, Y, Z}; for d >= 3 the
// clock/shift set X^a Z^b ordered by a*d + b (orthogonal, non-Hermitian).
const std::vector<Matrix>& site_letters(int d);

// Full string basis on w sites: d^{2w} operators, element 0 the identity,
// hs_inner(B_i, B_j) = d^w δ_ij. String k has letter digits in base d² with
// site 0 slowest.
std::vector<LocalOperator> operator_basis(int d, int w);

// Letter digit of string index k at a given site.
int string_letter(std::int64_t k, int site, int d, int w);

// Expansion coefficients in the string basis: op = Σ_k c_k B_k with
// c_k = tr(B_k† op) / d^w. Length d^{2w}, string index as above.
Vector string_coefficients(const LocalOperator& op);
LocalOperator operator_from_strings(int d, int w, const Vector& coeffs);

// Trace out the given sites (indices in [0, w)); result keeps the remaining
// sites in order. Tracing everything gives a width-0 scalar.
LocalOperator partial_trace(const LocalOperator& op, const std::set<int>& sites);

// Component of op whose string expansion is non-identity at site 0 and at
// site w-1 (the boundary-traceless subspace). Idempotent and hs-self-adjoint.
LocalOperator boundary_traceless_project(const LocalOperator& op);
bool is_boundary_traceless(const LocalOperator& op, double tol = 1e-12);

// Operator placed on a periodic chain of chain_len sites starting at site x;
// wraps around when x + w - 1 >= chain_len.
struct EmbeddedOperator {
    LocalOperator inner;
    int x = 0;
    int chain_len = 4;
};

EmbeddedOperator embed(const LocalOperator& op, int x, int chain_len);
LocalOperator materialize(const EmbeddedOperator& emb);

// Column-stacking vectorization; hs_inner equals the standard complex dot
// product of vectorized forms.
Vector vectorize(const LocalOperator& op);
LocalOperator devectorize(int d, int w, const Vector& v);

LocalOperator random_local_operator(int d, int w, std::uint64_t seed);

}  // namespace ducharge
