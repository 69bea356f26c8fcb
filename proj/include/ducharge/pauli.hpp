#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ducharge/gates.hpp"
#include "ducharge/local_operator.hpp"

namespace ducharge {

// 1 = X, 2 = Y, 3 = Z; identity letters are never stored.
using PauliLetter = std::uint8_t;

// Pauli string on the infinite integer lattice with an optional semi-infinite
// Jordan-Wigner tail: left_string = s means an implicit Z on every site < s.
// Canonical form keeps no explicit letter below the tail and no explicit Z
// exactly at the tail boundary (it is absorbed into the tail).
struct PauliTerm {
    cx coeff{1.0, 0.0};
    std::map<int, PauliLetter> letters;
    std::optional<int> left_string;

    void canonicalize_tail();
    bool same_string(const PauliTerm& other) const;
};

struct PauliSum {
    std::vector<PauliTerm> terms;

    bool empty() const { return terms.empty(); }
};

// Merge equal strings, drop |coeff| < 1e-14, sort by (min site, letters).
PauliSum canonicalize(PauliSum s);

PauliTerm pauli_term_product(const PauliTerm& a, const PauliTerm& b);
PauliSum pauli_product(const PauliSum& a, const PauliSum& b);
PauliSum pauli_add(const PauliSum& a, const PauliSum& b);
PauliSum pauli_scale(const PauliSum& a, cx factor);
PauliSum commutator(const PauliSum& a, const PauliSum& b);
PauliSum anticommutator(const PauliSum& a, const PauliSum& b);
bool pauli_equal(const PauliSum& a, const PauliSum& b);

struct SignedPauliPair {
    cx phase{1.0, 0.0};
    PauliLetter a = 0;  // pair-left letter, 0 = identity
    PauliLetter b = 0;
};

// Exact conjugation action of a two-qubit Clifford gate on Pauli strings:
// images of the single-letter generators on each leg, each verified against
// dense conjugation and snapped to exact unit phases.
struct CliffordTableau {
    std::array<SignedPauliPair, 3> left;   // images of X⊗1, Y⊗1, Z⊗1
    std::array<SignedPauliPair, 3> right;  // images of 1⊗X, 1⊗Y, 1⊗Z
    bool z_string_stable = false;          // Z⊗Z -> +Z⊗Z

    SignedPauliPair image(PauliLetter la, PauliLetter lb) const;
};

// Throws non_clifford_error naming the first generator whose image is not a
// single signed Pauli string.
CliffordTableau tableau_from_gate(const Gate& g);

// t periods of the infinite brickwork circuit: the tU layer couples pairs
// (2k, 2k+1), the tV layer (2k+1, 2k+2). Terms with a semi-infinite tail
// require z_string_stable on both tableaus.
PauliSum brickwork_step(const CliffordTableau& tU, const CliffordTableau& tV,
                        const PauliSum& P, int t);

enum class FermionMode { semi_infinite, finite_from_0 };

// Jordan-Wigner fermion annihilation string ending in σ- = (X - iY)/2 at
// site j; the tail is either a semi-infinite Z string or explicit Z letters
// on sites 0..j-1.
PauliSum jw_fermion(int j, FermionMode mode);

// f_j f_{j+l+1}: finite support [j, j+l+1] with the σ- Z^l σ- structure.
PauliSum fermion_pair(int j, int l);

// Text format: one term per line,
//   coeff_re coeff_im site:letter site:letter ... [tail:s]
// Round-trips exactly.
std::string pauli_sum_to_text(const PauliSum& s);
PauliSum pauli_sum_from_text(const std::string& text);

// Dense form of a finite PauliSum on a periodic chain (no tails, all explicit
// sites within [0, 2L)).
LocalOperator pauli_sum_to_chain(const PauliSum& s, int L);

}  // namespace ducharge
