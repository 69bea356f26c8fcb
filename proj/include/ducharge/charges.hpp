#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ducharge/chain.hpp"
#include "ducharge/superoperator.hpp"

namespace ducharge {

struct ChargeTerm {
    cx coeff{1.0, 0.0};
    int x = 0;
    LocalOperator op;  // boundary-traceless, width = term width
};

struct ChargeProvenance {
    enum class Kind { from_soliton, composite, brute_force, user };
    Kind kind = Kind::user;
    std::optional<Direction> direction;
    std::optional<int> width;
    std::optional<cx> lambda;
};

// Sum of embedded finite-range terms on a periodic chain of chain_len sites.
struct ChargeRecord {
    int chain_len = 4;
    std::vector<ChargeTerm> terms;
    ChargeProvenance provenance;
};

// Validates term shapes, boundary-tracelessness, and site ranges.
ChargeRecord make_charge(int chain_len, std::vector<ChargeTerm> terms,
                         ChargeProvenance provenance = {});

LocalOperator materialize_charge(const ChargeRecord& Q);

// Q+ = Σ_{x even} λ^{x/2} a_x (direction plus) or
// Q- = Σ_{x odd} λ^{-(x-1)/2} b_x (direction minus). Throws
// phase_incompatible unless λ^L = 1 within 1e-8.
ChargeRecord charge_from_soliton(const SolitonRecord& s, int L);

// |𝕌 Q 𝕌† - Q| / |Q| in Hilbert-Schmidt norm.
double verify_conserved(const FloquetOperator& F, const ChargeRecord& Q);

struct OracleDiagnostics {
    std::vector<double> singular_values;  // refined where available, ascending
    double kept_max = 0.0;
    double discarded_min = 0.0;
    double gap_ratio = 0.0;  // discarded_min / kept_max (inf-like when trivial)
    bool conclusive = true;
    int dimension = 0;
};

struct OracleResult {
    std::vector<ChargeRecord> basis;  // orthonormal in normalized string coordinates
    OracleDiagnostics diagnostics;
};

// Independent fixed-point solver: spans all Σ_{w <= w_max} Σ_x q(x, w) with
// boundary-traceless q, and solves 𝕌 Q 𝕌† = Q as a nullspace problem at
// singular-value threshold 1e-8 with a mandatory spectral-gap check
// (kept-vs-discarded ratio >= 1e3, otherwise flagged inconclusive).
OracleResult brute_force_conserved_space(const Gate& U, const Gate& V, int L, int w_max);

struct ChargeDecomposition {
    struct Coefficient {
        Direction dir;
        int w = 1;
        int k = 0;  // index within the soliton set for (dir, w)
        cx value{0.0, 0.0};
        cx lambda{1.0, 0.0};
        bool phase_compatible = true;
    };
    std::vector<Coefficient> coeffs;
    double conserved_residual = 0.0;
    double reconstruction_residual = 0.0;
};

// Projects the x = 0 cell content onto the right-moving soliton sets and the
// x = 1 content onto the left-moving ones, rebuilds Q from the associated
// charges, and reports the reconstruction residual. Throws theorem_violation
// when a verified-conserved input fails to reconstruct (possible only for
// gates that are not dual-unitary).
ChargeDecomposition decompose_into_soliton_charges(const Gate& U, const Gate& V,
                                                   const ChargeRecord& Q, int w_max,
                                                   double residual_tol = 1e-8);

struct CompositePart {
    SolitonRecord record;
    int site = 0;
};

struct CompositeSoliton {
    SolitonRecord record;  // embedded product as a width-W record, λ = Π λ_i
    int site = 0;          // start of the covering interval on the chain
    double translation_residual = 0.0;
};

// Product of same-direction solitons on distinct, parity-matching,
// non-overlapping sites. One Floquet step translates the product by ±2 with
// phase Π λ_i; that is verified on the chain before returning.
CompositeSoliton composite_soliton(const Gate& U, const Gate& V,
                                   const std::vector<CompositePart>& parts, int chain_len);

// Convenience pairing of a soliton with its adjoint; the combined phase is
// |λ|² = 1, so a charge exists even when λ itself is not a root of unity.
CompositeSoliton conjugate_pair(const Gate& U, const Gate& V, const SolitonRecord& a,
                                int x, int x2, int chain_len);

ChargeRecord charge_from_composite(const CompositeSoliton& c, int L);

// Span comparison between two charge lists via principal angles in
// normalized string coordinates. Returns (dim_a, dim_b, max_angle).
struct SpanComparison {
    int dim_a = 0;
    int dim_b = 0;
    double max_principal_angle = 0.0;
};
SpanComparison compare_charge_spans(const std::vector<ChargeRecord>& a,
                                    const std::vector<ChargeRecord>& b);

std::string charge_to_json(const ChargeRecord& Q);
ChargeRecord charge_from_json(const std::string& text);
std::string decomposition_to_json(const ChargeDecomposition& dec);

}  // namespace ducharge
