#include "ducharge/chain.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ducharge {

std::int64_t resource_cap() {
    if (const char* env = std::getenv("DUCHARGE_MAX_DIM")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::int64_t>(v);
    }
    return kDefaultMaxChainDim;
}

std::int64_t max_chain_dim() {
    return resource_cap();
}

Matrix translation_op(int l, int d) {
    if (l < 2) throw contract_error("translation_op: need l >= 2");
    std::int64_t n = ipow(d, l);
    Matrix P = Matrix::Zero(n, n);
    for (std::int64_t in = 0; in < n; ++in) {
        // |i_1 i_2 ... i_l> -> |i_2 ... i_l i_1>
        std::int64_t i1 = in / ipow(d, l - 1);
        std::int64_t rest = in % ipow(d, l - 1);
        std::int64_t out = rest * d + i1;
        P(out, in) = 1.0;
    }
    return P;
}

void apply_pair_rows(Matrix& M, const Matrix& g, int n, int d, int p) {
    int q = (p + 1) % n;
    std::int64_t dim = ipow(d, n);
    std::int64_t sp = ipow(d, n - 1 - p);
    std::int64_t sq = ipow(d, n - 1 - q);
    std::int64_t s1 = std::max(sp, sq), s2 = std::min(sp, sq);
    std::int64_t hi = dim / (s1 * d), mid = s1 / (s2 * d), lo = s2;
    int dd = d * d;

    if (d == 2) {
        const cx g00 = g(0, 0), g01 = g(0, 1), g02 = g(0, 2), g03 = g(0, 3);
        const cx g10 = g(1, 0), g11 = g(1, 1), g12 = g(1, 2), g13 = g(1, 3);
        const cx g20 = g(2, 0), g21 = g(2, 1), g22 = g(2, 2), g23 = g(2, 3);
        const cx g30 = g(3, 0), g31 = g(3, 1), g32 = g(3, 2), g33 = g(3, 3);
        for (Eigen::Index col = 0; col < M.cols(); ++col) {
            cx* colp = M.col(col).data();
            for (std::int64_t h = 0; h < hi; ++h) {
                for (std::int64_t m = 0; m < mid; ++m) {
                    std::int64_t base0 = h * (s1 * 2) + m * (s2 * 2);
                    for (std::int64_t l = 0; l < lo; ++l) {
                        cx* b = colp + base0 + l;
                        cx a0 = b[0], a1 = b[sq], a2 = b[sp], a3 = b[sp + sq];
                        b[0] = g00 * a0 + g01 * a1 + g02 * a2 + g03 * a3;
                        b[sq] = g10 * a0 + g11 * a1 + g12 * a2 + g13 * a3;
                        b[sp] = g20 * a0 + g21 * a1 + g22 * a2 + g23 * a3;
                        b[sp + sq] = g30 * a0 + g31 * a1 + g32 * a2 + g33 * a3;
                    }
                }
            }
        }
        return;
    }

    std::vector<cx> in(dd), out(dd);
    for (Eigen::Index col = 0; col < M.cols(); ++col) {
        cx* colp = M.col(col).data();
        for (std::int64_t h = 0; h < hi; ++h) {
            for (std::int64_t m = 0; m < mid; ++m) {
                std::int64_t base0 = h * (s1 * d) + m * (s2 * d);
                for (std::int64_t l = 0; l < lo; ++l) {
                    std::int64_t base = base0 + l;
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) in[i * d + j] = colp[base + i * sp + j * sq];
                    for (int r = 0; r < dd; ++r) {
                        cx acc = 0.0;
                        const cx* grow = g.data() + r;  // column-major: g(r, c) = data[r + c*dd]
                        for (int c = 0; c < dd; ++c) acc += grow[c * dd] * in[c];
                        out[r] = acc;
                    }
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) colp[base + i * sp + j * sq] = out[i * d + j];
                }
            }
        }
    }
}

namespace {

// In-place M <- M G† for the gate layer member on sites (p, p+1 mod n).
// Columns of M combine with kernel conj(g).
void apply_pair_cols_adj(Matrix& M, const Matrix& g, int n, int d, int p) {
    int q = (p + 1) % n;
    std::int64_t sp = ipow(d, n - 1 - p);
    std::int64_t sq = ipow(d, n - 1 - q);
    std::int64_t dim = ipow(d, n);
    std::int64_t s1 = std::max(sp, sq), s2 = std::min(sp, sq);
    std::int64_t hi = dim / (s1 * d), mid = s1 / (s2 * d), lo = s2;
    int dd = d * d;
    Eigen::Index rows = M.rows();

    if (d == 2) {
        const cx g00 = std::conj(g(0, 0)), g01 = std::conj(g(0, 1)), g02 = std::conj(g(0, 2)),
                 g03 = std::conj(g(0, 3));
        const cx g10 = std::conj(g(1, 0)), g11 = std::conj(g(1, 1)), g12 = std::conj(g(1, 2)),
                 g13 = std::conj(g(1, 3));
        const cx g20 = std::conj(g(2, 0)), g21 = std::conj(g(2, 1)), g22 = std::conj(g(2, 2)),
                 g23 = std::conj(g(2, 3));
        const cx g30 = std::conj(g(3, 0)), g31 = std::conj(g(3, 1)), g32 = std::conj(g(3, 2)),
                 g33 = std::conj(g(3, 3));
        for (std::int64_t h = 0; h < hi; ++h) {
            for (std::int64_t m = 0; m < mid; ++m) {
                std::int64_t base0 = h * (s1 * 2) + m * (s2 * 2);
                for (std::int64_t l = 0; l < lo; ++l) {
                    std::int64_t base = base0 + l;
                    cx* c0 = M.col(base).data();
                    cx* c1 = M.col(base + sq).data();
                    cx* c2 = M.col(base + sp).data();
                    cx* c3 = M.col(base + sp + sq).data();
                    for (Eigen::Index r = 0; r < rows; ++r) {
                        cx a0 = c0[r], a1 = c1[r], a2 = c2[r], a3 = c3[r];
                        c0[r] = g00 * a0 + g01 * a1 + g02 * a2 + g03 * a3;
                        c1[r] = g10 * a0 + g11 * a1 + g12 * a2 + g13 * a3;
                        c2[r] = g20 * a0 + g21 * a1 + g22 * a2 + g23 * a3;
                        c3[r] = g30 * a0 + g31 * a1 + g32 * a2 + g33 * a3;
                    }
                }
            }
        }
        return;
    }

    Matrix block(rows, dd);
    for (std::int64_t h = 0; h < hi; ++h) {
        for (std::int64_t m = 0; m < mid; ++m) {
            std::int64_t base0 = h * (s1 * d) + m * (s2 * d);
            for (std::int64_t l = 0; l < lo; ++l) {
                std::int64_t base = base0 + l;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) block.col(i * d + j) = M.col(base + i * sp + j * sq);
                for (int r = 0; r < dd; ++r) {
                    Eigen::Index target = base + (r / d) * sp + (r % d) * sq;
                    M.col(target) = std::conj(g(r, 0)) * block.col(0);
                    for (int c = 1; c < dd; ++c) M.col(target) += std::conj(g(r, c)) * block.col(c);
                }
            }
        }
    }
}

}  // namespace

void conjugate_floquet_step(Matrix& M, const Gate& U, const Gate& V, int L) {
    int d = U.d, n = 2 * L;
    for (int k = 0; k < L; ++k) apply_pair_rows(M, U.entries, n, d, 2 * k);
    for (int k = 0; k < L; ++k) apply_pair_rows(M, V.entries, n, d, 2 * k + 1);
    for (int k = 0; k < L; ++k) apply_pair_cols_adj(M, U.entries, n, d, 2 * k);
    for (int k = 0; k < L; ++k) apply_pair_cols_adj(M, V.entries, n, d, 2 * k + 1);
}

FloquetOperator::FloquetOperator(Gate U_, Gate V_, int L_) : U(std::move(U_)), V(std::move(V_)), L(L_) {}

const Matrix& FloquetOperator::matrix() const {
    if (!cached_) {
        std::int64_t dim = ipow(U.d, 2 * L);
        auto m = std::make_shared<Matrix>(Matrix::Identity(dim, dim));
        for (int k = 0; k < L; ++k) apply_pair_rows(*m, U.entries, 2 * L, U.d, 2 * k);
        for (int k = 0; k < L; ++k) apply_pair_rows(*m, V.entries, 2 * L, U.d, 2 * k + 1);
        cached_ = std::move(m);
    }
    return *cached_;
}

FloquetOperator floquet(const Gate& U, const Gate& V, int L) {
    if (U.d != V.d) throw contract_error("floquet: gates have different qudit dimension");
    if (L < 2) throw contract_error("floquet: need L >= 2");
    if (!is_unitary(U) || !is_unitary(V)) throw contract_error("floquet: gates must be unitary");
    if (ipow(U.d, 2 * L) > max_chain_dim())
        throw resource_error("floquet: chain dimension d^{2L} exceeds the resource cap");
    return FloquetOperator(U, V, L);
}

LocalOperator heisenberg(const FloquetOperator& F, const EmbeddedOperator& op, int t) {
    if (t < 0) throw contract_error("heisenberg: t must be >= 0");
    if (op.chain_len != 2 * F.L) throw contract_error("heisenberg: chain length mismatch");
    LocalOperator M = materialize(op);
    for (int i = 0; i < t; ++i) conjugate_floquet_step(M.entries, F.U, F.V, F.L);
    return M;
}

WindowEvolved evolve_window_one_step(const Gate& U, const Gate& V, int L, const EmbeddedOperator& emb) {
    int d = U.d, n = 2 * L, w = emb.inner.w;
    int wl = w + 4;
    if (wl >= n) {
        // window does not fit; evolve on the full chain
        LocalOperator M = materialize(emb);
        conjugate_floquet_step(M.entries, U, V, L);
        return {0, std::move(M)};
    }
    int ws = ((emb.x - 2) % n + n) % n;

    LocalOperator win = kron(LocalOperator::identity(d, 2),
                             kron(emb.inner, LocalOperator::identity(d, 2)));

    // Gates with both legs inside the window; straddling gates touch only
    // identity sites during their layer and are no-ops.
    auto layer_pairs = [&](int align) {
        std::vector<int> local;
        for (int k = 0; k < L; ++k) {
            int p = (2 * k + align) % n;
            int lp = ((p - ws) % n + n) % n;
            if (lp < wl - 1) local.push_back(lp);
        }
        std::sort(local.begin(), local.end());
        return local;
    };
    std::vector<int> upairs = layer_pairs(0), vpairs = layer_pairs(1);

    for (int p : upairs) apply_pair_rows(win.entries, U.entries, wl, d, p);
    for (int p : vpairs) apply_pair_rows(win.entries, V.entries, wl, d, p);
    for (int p : upairs) apply_pair_cols_adj(win.entries, U.entries, wl, d, p);
    for (int p : vpairs) apply_pair_cols_adj(win.entries, V.entries, wl, d, p);
    return {ws, std::move(win)};
}

const char* parity_class_name(ParityClass c) {
    switch (c) {
        case ParityClass::Bee: return "ee";
        case ParityClass::Beo: return "eo";
        case ParityClass::Boe: return "oe";
        case ParityClass::Boo: return "oo";
        default: return "mixed/other";
    }
}

ParityClass classify_parity(int x, int w) {
    bool xe = (x % 2 == 0), we = (w % 2 == 0);
    if (xe && we) return ParityClass::Bee;
    if (xe && !we) return ParityClass::Beo;
    if (!xe && we) return ParityClass::Boe;
    return ParityClass::Boo;
}

SupportProfile support_profile(const LocalOperator& chain_op, int L) {
    int n = 2 * L, d = chain_op.d;
    if (chain_op.w != n) throw contract_error("support_profile: operator width must equal 2L");
    SupportProfile prof;
    prof.flags.assign(n, SiteFlag::mixed);

    double scale = hs_norm(chain_op);
    const double tol = 1e-10;
    if (scale < 1e-300) {
        prof.empty = true;
        prof.note = "zero operator";
        return prof;
    }

    // lift: insert an identity factor back at site s of a width-(n-1) operator
    auto lift_identity_at = [&](const LocalOperator& traced, int s) {
        std::int64_t nd = ipow(d, n), sub = ipow(d, n - 1);
        std::int64_t hi_div = ipow(d, n - 1 - s);  // stride of site s in the chain index
        LocalOperator out{d, n, Matrix::Zero(nd, nd)};
        for (std::int64_t r = 0; r < sub; ++r) {
            std::int64_t r_hi = r / hi_div, r_lo = r % hi_div;
            for (std::int64_t c = 0; c < sub; ++c) {
                cx val = traced.entries(r, c);
                if (val == cx(0.0)) continue;
                std::int64_t c_hi = c / hi_div, c_lo = c % hi_div;
                for (int k = 0; k < d; ++k) {
                    std::int64_t rr = (r_hi * d + k) * hi_div + r_lo;
                    std::int64_t cc = (c_hi * d + k) * hi_div + c_lo;
                    out.entries(rr, cc) = val;
                }
            }
        }
        return out;
    };

    for (int s = 0; s < n; ++s) {
        LocalOperator traced = partial_trace(chain_op, {s});
        double strict_resid = hs_norm(traced) / (scale * std::sqrt(static_cast<double>(d)));
        // identity-only at s <=> op = 1_s ⊗ tr_s(op)/d
        LocalOperator lifted = lift_identity_at(traced, s);
        lifted.entries /= static_cast<double>(d);
        double id_resid = (chain_op.entries - lifted.entries).norm() / scale;
        if (id_resid < tol)
            prof.flags[s] = SiteFlag::identity_only;
        else if (strict_resid < tol)
            prof.flags[s] = SiteFlag::strictly_non_identity;
        else
            prof.flags[s] = SiteFlag::mixed;
    }

    std::vector<int> support;
    for (int s = 0; s < n; ++s)
        if (prof.flags[s] != SiteFlag::identity_only) support.push_back(s);
    if (support.empty()) {
        prof.empty = true;
        prof.note = "identity operator";
        return prof;
    }
    if (static_cast<int>(support.size()) == n) {
        prof.x = 0;
        prof.w = n;
        prof.note = "support covers the whole chain";
        return prof;
    }

    // minimal cyclic interval = complement of the longest identity-only run
    int best_len = -1, best_start = 0;
    bool tie = false;
    for (int s = 0; s < n; ++s) {
        if (prof.flags[s] != SiteFlag::identity_only) continue;
        if (prof.flags[(s - 1 + n) % n] != SiteFlag::identity_only) {
            int len = 0;
            while (len < n && prof.flags[(s + len) % n] == SiteFlag::identity_only) ++len;
            if (len > best_len) {
                best_len = len;
                best_start = s;
                tie = false;
            } else if (len == best_len) {
                tie = true;
            }
        }
    }
    if (tie) {
        prof.note = "ambiguous minimal interval (tied identity gaps)";
        return prof;
    }
    prof.x = (best_start + best_len) % n;
    prof.w = n - best_len;

    if (prof.w <= L && prof.flags[prof.x] == SiteFlag::strictly_non_identity
        && prof.flags[(prof.x + prof.w - 1) % n] == SiteFlag::strictly_non_identity) {
        prof.parity_class = classify_parity(prof.x, prof.w);
    } else if (prof.w > L) {
        prof.note = "width exceeds L; parity class not assigned";
    } else {
        prof.note = "boundary sites not strictly traceless; parity class not assigned";
    }
    return prof;
}

namespace {

struct Span {
    int a, b;  // unwrapped inclusive interval, a <= b
    auto operator<=>(const Span&) const = default;
};

// Propagate a strict-edged interval through one aligned gate layer using the
// traceless-edge rules: a gate meeting a strict edge from outside always
// extends the support to its free leg; a gate fully inside lets the edge sit
// or step inward by one, never vanish.
std::set<Span> layer_step(const Span& s, int align) {
    auto pair_start = [&](int site) { return site - (((site - align) % 2 + 2) % 2); };
    int pL = pair_start(s.a), pR = pair_start(s.b);
    std::set<Span> out;
    if (pL == pR) {
        if (s.b == s.a + 1) {  // one gate covers both strict edges
            out.insert({s.a, s.b});
            out.insert({s.a, s.a});
            out.insert({s.b, s.b});
        } else {  // single site
            if (pL == s.a - 1) {
                out.insert({s.a - 1, s.a - 1});
                out.insert({s.a - 1, s.a});
            } else {
                out.insert({s.a, s.a + 1});
                out.insert({s.a + 1, s.a + 1});
            }
        }
        return out;
    }
    std::vector<int> lset = (pL == s.a - 1) ? std::vector<int>{s.a - 1} : std::vector<int>{s.a, s.a + 1};
    std::vector<int> rset = (pR == s.b) ? std::vector<int>{s.b + 1} : std::vector<int>{s.b - 1, s.b};
    for (int l : lset)
        for (int r : rset)
            if (l <= r) out.insert({l, r});
    return out;
}

}  // namespace

std::vector<Interval> allowed_intervals_one_step(int x, int w, int chain_len) {
    if (w < 1) throw contract_error("allowed_intervals_one_step: w must be >= 1");
    std::set<Span> after_u = layer_step({x, x + w - 1}, 0);
    std::set<Span> after_v;
    for (const Span& s : after_u)
        for (const Span& t : layer_step(s, 1)) after_v.insert(t);

    std::set<Interval> result;
    for (const Span& s : after_v)
        result.insert({((s.a % chain_len) + chain_len) % chain_len, s.b - s.a + 1});
    return {result.begin(), result.end()};
}

TransitionReport digraph_transition_check(const FloquetOperator& F, const EmbeddedOperator& op) {
    int L = F.L, n = 2 * L, d = F.U.d, w = op.inner.w;
    if (op.chain_len != n) throw contract_error("digraph_transition_check: chain length mismatch");
    if (w > L - 4) throw contract_error("digraph_transition_check: needs w <= L - 4");
    if (!is_boundary_traceless(op.inner, 1e-10))
        throw contract_error("digraph_transition_check: operator must be strictly traceless at both boundary sites");

    TransitionReport rep;
    rep.x = op.x;
    rep.w = w;
    rep.input_class = classify_parity(op.x, w);
    rep.allowed = allowed_intervals_one_step(op.x, w, n);

    WindowEvolved ev = evolve_window_one_step(F.U, F.V, L, op);
    int wl = ev.op.w;
    Vector coeffs = string_coefficients(ev.op);

    std::map<Interval, double> weight;
    double total = 0.0;
    for (std::int64_t k = 0; k < coeffs.size(); ++k) {
        double p = std::norm(coeffs(k));
        if (p == 0.0) continue;
        int first = -1, last = -1;
        for (int s = 0; s < wl; ++s) {
            if (string_letter(k, s, d, wl) != 0) {
                if (first < 0) first = s;
                last = s;
            }
        }
        if (first < 0) continue;  // identity string carries no traceless weight
        Interval iv{(ev.window_start + first) % n, last - first + 1};
        weight[iv] += p;
        total += p;
    }

    std::set<Interval> allowed_set(rep.allowed.begin(), rep.allowed.end());
    double forbidden2 = 0.0;
    for (const auto& [iv, p] : weight) {
        IntervalComponent comp;
        comp.interval = iv;
        comp.cls = (iv.w <= L) ? classify_parity(iv.x, iv.w) : ParityClass::mixed_other;
        comp.norm = std::sqrt(p / total);
        rep.components.push_back(comp);
        if (!allowed_set.count(iv)) forbidden2 += p;
    }
    rep.forbidden_norm = std::sqrt(forbidden2 / total);
    return rep;
}

std::string transition_report_json(const TransitionReport& rep) {
    nlohmann::json j;
    j["input"] = {{"class", parity_class_name(rep.input_class)}, {"x", rep.x}, {"w", rep.w}};
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : rep.components)
        comps.push_back({{"interval", {c.interval.x, c.interval.w}},
                         {"width", c.interval.w},
                         {"class", parity_class_name(c.cls)},
                         {"norm", c.norm}});
    j["components"] = std::move(comps);
    nlohmann::json allowed = nlohmann::json::array();
    for (const auto& iv : rep.allowed) allowed.push_back({iv.x, iv.w});
    j["allowed"] = std::move(allowed);
    j["forbidden_norm"] = rep.forbidden_norm;
    return j.dump(2);
}

}  // namespace ducharge
