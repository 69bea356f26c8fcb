#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ducharge/gates.hpp"
#include "ducharge/local_operator.hpp"

namespace ducharge {

inline constexpr std::int64_t kDefaultMaxChainDim = 4096;

// Honors DUCHARGE_MAX_DIM when set.
std::int64_t max_chain_dim();

// Π_l |i_1 ... i_l> = |i_2 ... i_l i_1>.
Matrix translation_op(int l, int d);

// One-period brickwork evolution on 2L sites: the U layer couples pairs
// (2k, 2k+1), the shifted V layer couples (2k+1, 2k+2 mod 2L). The dense
// matrix is built on first use (it equals Π V^{⊗L} Π^{-1} U^{⊗L}).
struct FloquetOperator {
    Gate U, V;
    int L = 2;

    const Matrix& matrix() const;

    FloquetOperator(Gate U_, Gate V_, int L_);

  private:
    mutable std::shared_ptr<Matrix> cached_;
};

FloquetOperator floquet(const Gate& U, const Gate& V, int L);

// In-place M <- G M with the two-site gate g on chain sites (p, p+1 mod n).
void apply_pair_rows(Matrix& M, const Matrix& g, int n, int d, int p);

// In-place one-period conjugation M <- 𝕌 M 𝕌† without forming 𝕌.
void conjugate_floquet_step(Matrix& M, const Gate& U, const Gate& V, int L);

// 𝕌^t · materialize(op) · (𝕌†)^t.
LocalOperator heisenberg(const FloquetOperator& F, const EmbeddedOperator& op, int t);

// One Floquet step of an embedded operator computed inside its light-cone
// window [x-2, x+w+1] (everything outside stays identity). Exact; falls back
// to the full chain when the window does not fit.
struct WindowEvolved {
    int window_start = 0;  // chain site of window index 0
    LocalOperator op;      // width = window length
};
WindowEvolved evolve_window_one_step(const Gate& U, const Gate& V, int L, const EmbeddedOperator& emb);

enum class ParityClass { Bee, Beo, Boe, Boo, mixed_other };
const char* parity_class_name(ParityClass c);
ParityClass classify_parity(int x, int w);

enum class SiteFlag { identity_only, mixed, strictly_non_identity };

struct SupportProfile {
    bool empty = false;          // identity operator
    int x = 0;                   // start of minimal cyclic support interval
    int w = 0;
    std::vector<SiteFlag> flags; // one per chain site
    ParityClass parity_class = ParityClass::mixed_other;
    std::string note;
};

// Support of a width-2L chain operator: per-site trace flags at relative
// tolerance 1e-10, minimal cyclic covering interval, and the parity class
// (x mod 2, w mod 2) when w <= L and the boundary sites are strict.
SupportProfile support_profile(const LocalOperator& chain_op, int L);

struct Interval {
    int x = 0;  // start site mod 2L
    int w = 0;
    auto operator<=>(const Interval&) const = default;
};

// Intervals that one Floquet period can populate starting from a strict
// width-w operator at site x, derived by propagating the traceless-edge
// rules through the two gate layers.
std::vector<Interval> allowed_intervals_one_step(int x, int w, int chain_len);

struct IntervalComponent {
    Interval interval;
    ParityClass cls = ParityClass::mixed_other;
    double norm = 0.0;  // relative to the input norm
};

struct TransitionReport {
    ParityClass input_class = ParityClass::mixed_other;
    int x = 0;
    int w = 0;
    std::vector<IntervalComponent> components;
    std::vector<Interval> allowed;
    double forbidden_norm = 0.0;
};

// Decomposes 𝕌 op 𝕌† by exact string support into interval components and
// measures the weight outside the allowed transition set. Requires the input
// to sit in exactly one parity class and w <= L - 4.
TransitionReport digraph_transition_check(const FloquetOperator& F, const EmbeddedOperator& op);

std::string transition_report_json(const TransitionReport& rep);

}  // namespace ducharge
