#include "ducharge/charges.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

namespace ducharge {

namespace {

std::int64_t chain_string_id(const std::vector<int>& letters_by_site, int d) {
    std::int64_t q = static_cast<std::int64_t>(d) * d, id = 0;
    for (int l : letters_by_site) id = id * q + l;
    return id;
}

// Chain-string expansion of an embedded term: local string coefficients of
// op mapped onto chain string ids (identity letters outside the support).
void accumulate_term_strings(const ChargeTerm& term, int chain_len, int d, cx weight,
                             std::unordered_map<std::int64_t, cx>& out) {
    Vector c = string_coefficients(term.op);
    int w = term.op.w;
    std::vector<int> letters(chain_len, 0);
    for (std::int64_t k = 0; k < c.size(); ++k) {
        cx v = weight * term.coeff * c(k);
        if (v == cx(0.0)) continue;
        std::fill(letters.begin(), letters.end(), 0);
        for (int s = 0; s < w; ++s)
            letters[(term.x + s) % chain_len] = string_letter(k, s, d, w);
        out[chain_string_id(letters, d)] += v;
    }
}

std::unordered_map<std::int64_t, cx> charge_string_coeffs(const ChargeRecord& Q) {
    std::unordered_map<std::int64_t, cx> out;
    int d = Q.terms.empty() ? 2 : Q.terms.front().op.d;
    for (const auto& t : Q.terms) accumulate_term_strings(t, Q.chain_len, d, cx(1.0), out);
    return out;
}

}  // namespace

ChargeRecord make_charge(int chain_len, std::vector<ChargeTerm> terms, ChargeProvenance provenance) {
    if (chain_len < 4 || chain_len % 2 != 0)
        throw contract_error("make_charge: chain_len must be an even integer >= 4");
    if (terms.empty()) throw contract_error("make_charge: no terms");
    int d = terms.front().op.d;
    for (const auto& t : terms) {
        if (t.op.d != d) throw contract_error("make_charge: mixed qudit dimensions");
        if (t.op.w < 1 || t.op.w > chain_len) throw contract_error("make_charge: bad term width");
        if (t.x < 0 || t.x >= chain_len) throw contract_error("make_charge: term site out of range");
        if (!t.op.is_finite()) throw contract_error("make_charge: non-finite term entries");
        if (!is_boundary_traceless(t.op, 1e-10))
            throw contract_error("make_charge: term operators must be strictly traceless at both boundary sites");
    }
    return {chain_len, std::move(terms), provenance};
}

LocalOperator materialize_charge(const ChargeRecord& Q) {
    if (Q.terms.empty()) throw contract_error("materialize_charge: empty charge");
    int d = Q.terms.front().op.d;
    LocalOperator acc = LocalOperator::zero(d, Q.chain_len);
    for (const auto& t : Q.terms) {
        LocalOperator m = materialize(embed(t.op, t.x, Q.chain_len));
        acc.entries += t.coeff * m.entries;
    }
    return acc;
}

ChargeRecord charge_from_soliton(const SolitonRecord& s, int L) {
    cx lamL = std::pow(s.lambda, L);
    if (std::abs(lamL - cx(1.0)) >= 1e-8) throw phase_incompatible(s.lambda, L);
    int n = 2 * L;
    std::vector<ChargeTerm> terms;
    if (s.direction == Direction::plus) {
        for (int x = 0; x < n; x += 2) terms.push_back({std::pow(s.lambda, x / 2), x, s.op});
    } else {
        for (int x = 1; x < n; x += 2) terms.push_back({std::pow(std::conj(s.lambda), (x - 1) / 2), x, s.op});
    }
    ChargeProvenance prov{ChargeProvenance::Kind::from_soliton, s.direction, s.width, s.lambda};
    return make_charge(n, std::move(terms), prov);
}

double verify_conserved(const FloquetOperator& F, const ChargeRecord& Q) {
    if (Q.chain_len != 2 * F.L) throw contract_error("verify_conserved: chain length mismatch");
    LocalOperator M = materialize_charge(Q);
    double norm = hs_norm(M);
    if (norm < 1e-300) throw contract_error("verify_conserved: zero charge");
    Matrix evolved = M.entries;
    conjugate_floquet_step(evolved, F.U, F.V, F.L);
    return (evolved - M.entries).norm() / norm;
}

namespace {

struct CellString {
    int x, w;
    std::vector<int> letters;  // length w, boundary letters nonzero
    std::int64_t chain_id;
};

std::vector<CellString> enumerate_cell_strings(int d, int n, int w_max) {
    std::int64_t q = static_cast<std::int64_t>(d) * d;
    std::vector<CellString> cells;
    for (int w = 1; w <= w_max; ++w) {
        std::vector<int> letters(w, 0);
        std::int64_t total = ipow(q, w);
        for (std::int64_t k = 0; k < total; ++k) {
            for (int s = 0; s < w; ++s) letters[s] = string_letter(k, s, d, w);
            if (letters[0] == 0 || letters[w - 1] == 0) continue;
            for (int x = 0; x < n; ++x) {
                std::vector<int> chain_letters(n, 0);
                for (int s = 0; s < w; ++s) chain_letters[(x + s) % n] = letters[s];
                cells.push_back({x, w, letters, chain_string_id(chain_letters, d)});
            }
        }
    }
    return cells;
}

LocalOperator string_operator(int d, int w, const std::vector<int>& letters) {
    const auto& single = site_letters(d);
    Matrix m = single[letters[0]];
    for (int s = 1; s < w; ++s) m = kron(m, single[letters[s]]);
    return {d, w, std::move(m)};
}

// Sparse chain-string expansion of 𝕌 s 𝕌† for one embedded cell string,
// computed inside the light-cone window.
std::vector<std::pair<std::int64_t, cx>> evolve_cell_string(const Gate& U, const Gate& V, int L,
                                                            const CellString& cs) {
    int d = U.d, n = 2 * L;
    EmbeddedOperator emb = embed(string_operator(d, cs.w, cs.letters), cs.x, n);
    WindowEvolved ev = evolve_window_one_step(U, V, L, emb);
    int wl = ev.op.w;
    Vector c = string_coefficients(ev.op);
    std::vector<std::pair<std::int64_t, cx>> out;
    std::vector<int> chain_letters(n, 0);
    for (std::int64_t k = 0; k < c.size(); ++k) {
        if (std::abs(c(k)) < 1e-14) continue;
        std::fill(chain_letters.begin(), chain_letters.end(), 0);
        for (int s = 0; s < wl; ++s)
            chain_letters[(ev.window_start + s) % n] = string_letter(k, s, d, wl);
        out.emplace_back(chain_string_id(chain_letters, d), c(k));
    }
    return out;
}

}  // namespace

OracleResult brute_force_conserved_space(const Gate& U, const Gate& V, int L, int w_max) {
    if (U.d != V.d) throw contract_error("brute_force_conserved_space: gate dimension mismatch");
    if (!is_unitary(U) || !is_unitary(V)) throw contract_error("brute_force_conserved_space: gates must be unitary");
    int d = U.d, n = 2 * L;
    if (w_max < 1 || w_max > L - 1)
        throw contract_error("brute_force_conserved_space: need 1 <= w_max <= L-1");
    if (ipow(d, n) > max_chain_dim())
        throw resource_error("brute_force_conserved_space: chain dimension exceeds the resource cap");

    std::vector<CellString> cells = enumerate_cell_strings(d, n, w_max);
    int m = static_cast<int>(cells.size());
    std::unordered_map<std::int64_t, int> vindex;
    vindex.reserve(cells.size() * 2);
    for (int j = 0; j < m; ++j) vindex.emplace(cells[j].chain_id, j);

    // Pass A: evolve every cell string, keep the sparse expansions, and
    // compress conjugation onto the cell span (matrix A).
    std::vector<std::vector<std::pair<std::int64_t, cx>>> evolved(m);
    Matrix A = Matrix::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        evolved[j] = evolve_cell_string(U, V, L, cells[j]);
        for (const auto& [id, c] : evolved[j]) {
            auto it = vindex.find(id);
            if (it != vindex.end()) A(it->second, j) = c;
        }
    }

    // Stage 1: spectrum of (C - I) on the cell span via the isometry identity
    // |Dq|² = |(A-I)q|² + (|q|² - |Aq|²). Resolution here is ~sqrt(eps), so it
    // only pre-splits; near-null candidates are refined in stage 2.
    Matrix AmI = A - Matrix::Identity(m, m);
    Matrix M1 = AmI.adjoint() * AmI + (Matrix::Identity(m, m) - A.adjoint() * A);
    M1 = 0.5 * (M1 + M1.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M1);
    if (es.info() != Eigen::Success) throw numeric_error("oracle: stage-1 eigensolver failed");

    const double pre_threshold = 1e-5;
    const double null_threshold = 1e-8;
    std::vector<double> stage1_sigma(m);
    std::vector<int> candidates;
    for (int i = 0; i < m; ++i) {
        stage1_sigma[i] = std::sqrt(std::max(es.eigenvalues()(i), 0.0));
        if (stage1_sigma[i] < pre_threshold) candidates.push_back(i);
    }

    // Stage 2: direct residual vectors for the candidate cluster. Gram of the
    // residual matrix resolves σ relative to the cluster's own scale, which
    // keeps the 1e-8 threshold meaningful.
    int mc = static_cast<int>(candidates.size());
    std::vector<double> refined(mc, 0.0);
    Matrix null_combos;
    int dim = 0;
    if (mc > 0) {
        std::vector<std::unordered_map<std::int64_t, cx>> resid(mc);
        for (int ci = 0; ci < mc; ++ci) {
            const Vector q = es.eigenvectors().col(candidates[ci]);
            auto& r = resid[ci];
            for (int j = 0; j < m; ++j) {
                cx qj = q(j);
                if (std::abs(qj) < 1e-16) continue;
                for (const auto& [id, c] : evolved[j]) r[id] += qj * c;
            }
            for (int j = 0; j < m; ++j) {
                cx qj = q(j);
                if (std::abs(qj) < 1e-16) continue;
                r[cells[j].chain_id] -= qj;
            }
        }
        std::unordered_map<std::int64_t, int> slot;
        for (const auto& r : resid)
            for (const auto& [id, v] : r)
                if (!slot.count(id)) slot.emplace(id, static_cast<int>(slot.size()));
        Matrix R = Matrix::Zero(std::max<int>(1, static_cast<int>(slot.size())), mc);
        for (int ci = 0; ci < mc; ++ci)
            for (const auto& [id, v] : resid[ci]) R(slot[id], ci) = v;

        Matrix H = R.adjoint() * R;
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es2(H);
        if (es2.info() != Eigen::Success) throw numeric_error("oracle: stage-2 eigensolver failed");
        std::vector<int> kept;
        for (int i = 0; i < mc; ++i) {
            refined[i] = std::sqrt(std::max(es2.eigenvalues()(i), 0.0));
            if (refined[i] < null_threshold) kept.push_back(i);
        }
        dim = static_cast<int>(kept.size());
        null_combos = Matrix(mc, dim);
        for (int i = 0; i < dim; ++i) null_combos.col(i) = es2.eigenvectors().col(kept[i]);
    }

    OracleDiagnostics diag;
    for (int i = 0; i < m; ++i) {
        bool is_candidate = std::binary_search(candidates.begin(), candidates.end(), i);
        if (!is_candidate) diag.singular_values.push_back(stage1_sigma[i]);
    }
    for (int i = 0; i < mc; ++i) diag.singular_values.push_back(refined[i]);
    std::sort(diag.singular_values.begin(), diag.singular_values.end());
    diag.dimension = dim;
    diag.kept_max = 0.0;
    diag.discarded_min = std::numeric_limits<double>::infinity();
    for (double s : diag.singular_values) {
        if (s < 1e-8)
            diag.kept_max = std::max(diag.kept_max, s);
        else
            diag.discarded_min = std::min(diag.discarded_min, s);
    }
    if (diag.kept_max == 0.0)
        diag.gap_ratio = std::numeric_limits<double>::infinity();
    else
        diag.gap_ratio = diag.discarded_min / diag.kept_max;
    diag.conclusive = !(diag.gap_ratio < 1e3);
    if (static_cast<int>(diag.singular_values.size()) != m)
        throw numeric_error("oracle: singular value bookkeeping mismatch");

    OracleResult result;
    result.diagnostics = diag;
    if (!diag.conclusive)
        throw numeric_error("oracle: nullspace gap inconclusive (ratio "
                            + std::to_string(diag.gap_ratio) + ")");

    // Assemble charge records: group each null combination by cell.
    std::int64_t q2 = static_cast<std::int64_t>(d) * d;
    for (int col = 0; col < dim; ++col) {
        Vector full = Vector::Zero(m);
        for (int ci = 0; ci < mc; ++ci) {
            const Vector qv = es.eigenvectors().col(candidates[ci]);
            full += null_combos(ci, col) * qv;
        }
        std::map<std::pair<int, int>, Vector> by_cell;  // (x, w) -> local string coeffs
        for (int j = 0; j < m; ++j) {
            if (std::abs(full(j)) < 1e-13) continue;
            auto key = std::make_pair(cells[j].x, cells[j].w);
            auto it = by_cell.find(key);
            if (it == by_cell.end())
                it = by_cell.emplace(key, Vector::Zero(ipow(q2, cells[j].w))).first;
            std::int64_t local_id = 0;
            for (int s = 0; s < cells[j].w; ++s) local_id = local_id * q2 + cells[j].letters[s];
            it->second(local_id) += full(j);
        }
        std::vector<ChargeTerm> terms;
        for (auto& [key, coeffs] : by_cell)
            terms.push_back({cx(1.0), key.first, operator_from_strings(d, key.second, coeffs)});
        result.basis.push_back(make_charge(n, std::move(terms),
                                           {ChargeProvenance::Kind::brute_force, {}, {}, {}}));
    }
    return result;
}

ChargeDecomposition decompose_into_soliton_charges(const Gate& U, const Gate& V,
                                                   const ChargeRecord& Q, int w_max,
                                                   double residual_tol) {
    int d = U.d, n = Q.chain_len, L = n / 2;
    FloquetOperator F = floquet(U, V, L);

    ChargeDecomposition dec;
    dec.conserved_residual = verify_conserved(F, Q);
    if (dec.conserved_residual >= 1e-9)
        throw contract_error("decompose: input is not conserved (residual "
                             + std::to_string(dec.conserved_residual) + ")");
    for (const auto& t : Q.terms) {
        if (t.op.w % 2 == 0)
            throw contract_error("decompose: conserved densities cannot carry even-width terms");
        if (t.op.w > w_max) throw contract_error("decompose: term width exceeds w_max");
    }

    // Cell content at the reference sites x = 0 (right-movers) and x = 1.
    std::map<int, LocalOperator> q0, q1;
    for (const auto& t : Q.terms) {
        if (t.x != 0 && t.x != 1) continue;
        auto& slot = (t.x == 0) ? q0 : q1;
        auto it = slot.find(t.op.w);
        if (it == slot.end()) it = slot.emplace(t.op.w, LocalOperator::zero(d, t.op.w)).first;
        it->second.entries += t.coeff * t.op.entries;
    }

    LocalOperator rec = LocalOperator::zero(d, n);
    for (int w = 1; w <= w_max; w += 2) {
        double dw_scale = static_cast<double>(ipow(d, w));
        for (Direction dir : {Direction::plus, Direction::minus}) {
            auto& content = (dir == Direction::plus) ? q0 : q1;
            auto it = content.find(w);
            std::vector<SolitonRecord> records = find_solitons(U, V, w, dir);
            for (size_t k = 0; k < records.size(); ++k) {
                cx coeff = 0.0;
                if (it != content.end()) coeff = hs_inner(records[k].op, it->second) / dw_scale;
                cx lamL = std::pow(records[k].lambda, L);
                bool ok = std::abs(lamL - cx(1.0)) < 1e-8;
                dec.coeffs.push_back({dir, w, static_cast<int>(k), coeff, records[k].lambda, ok});
                if (std::abs(coeff) < 1e-13) continue;
                if (!ok)
                    throw theorem_violation(std::abs(coeff));  // conserved Q cannot load these
                ChargeRecord qc = charge_from_soliton(records[k], L);
                rec.entries += coeff * materialize_charge(qc).entries;
            }
        }
    }

    LocalOperator target = materialize_charge(Q);
    dec.reconstruction_residual = (target.entries - rec.entries).norm() / target.entries.norm();
    if (dec.reconstruction_residual >= residual_tol)
        throw theorem_violation(dec.reconstruction_residual);
    return dec;
}

CompositeSoliton composite_soliton(const Gate& U, const Gate& V,
                                   const std::vector<CompositePart>& parts, int chain_len) {
    if (parts.empty()) throw contract_error("composite_soliton: no parts");
    int n = chain_len, d = parts.front().record.op.d;
    Direction dir = parts.front().record.direction;
    int want_parity = (dir == Direction::plus) ? 0 : 1;
    std::vector<bool> covered(n, false);
    for (const auto& p : parts) {
        if (p.record.direction != dir)
            throw contract_error("composite_soliton: parts must share a direction");
        if (p.record.op.d != d) throw contract_error("composite_soliton: mixed qudit dimensions");
        if (((p.site % 2) + 2) % 2 != want_parity)
            throw contract_error("composite_soliton: site parity must match the direction");
        for (int s = 0; s < p.record.width; ++s) {
            int site = ((p.site + s) % n + n) % n;
            if (covered[site]) throw contract_error("composite_soliton: overlapping supports");
            covered[site] = true;
        }
    }

    // Minimal covering interval; ties broken by the smallest start site.
    int best_len = -1, best_start = -1;
    for (int s = 0; s < n; ++s) {
        if (covered[s] || !covered[(s + 1) % n]) continue;  // gap ending at s
        int len = 0;
        while (len < n && !covered[((s - len) % n + n) % n]) ++len;
        if (len > best_len) {
            best_len = len;
            best_start = (s + 1) % n;
        } else if (len == best_len && (s + 1) % n < best_start) {
            best_start = (s + 1) % n;
        }
    }
    if (best_len <= 0) throw contract_error("composite_soliton: product covers the whole chain");
    int x0 = best_start, W = n - best_len;

    LocalOperator prod = LocalOperator::identity(d, W);
    cx lambda_total = 1.0;
    for (const auto& p : parts) {
        int off = ((p.site - x0) % n + n) % n;
        LocalOperator lifted = kron(LocalOperator::identity(d, off),
                                    kron(p.record.op, LocalOperator::identity(d, W - off - p.record.width)));
        prod.entries = prod.entries * lifted.entries;
        lambda_total *= p.record.lambda;
    }

    SolitonRecord rec{prod, dir, W, lambda_total};
    CompositeSoliton out{rec, x0, 0.0};

    // One Floquet step must translate the product by ±2 with phase λ_total.
    FloquetOperator F = floquet(U, V, n / 2);
    LocalOperator evolved = heisenberg(F, embed(prod, x0, n), 1);
    int shift = (dir == Direction::plus) ? 2 : -2;
    LocalOperator expected = materialize(embed(prod, ((x0 + shift) % n + n) % n, n));
    out.translation_residual =
        (evolved.entries - lambda_total * expected.entries).norm() / expected.entries.norm();
    if (out.translation_residual > 1e-9)
        throw numeric_error("composite_soliton: product does not translate solitonically (residual "
                            + std::to_string(out.translation_residual) + ")");
    return out;
}

CompositeSoliton conjugate_pair(const Gate& U, const Gate& V, const SolitonRecord& a,
                                int x, int x2, int chain_len) {
    return composite_soliton(U, V, {{a, x}, {a.adjoint(), x2}}, chain_len);
}

ChargeRecord charge_from_composite(const CompositeSoliton& c, int L) {
    ChargeRecord q = charge_from_soliton(c.record, L);
    q.provenance.kind = ChargeProvenance::Kind::composite;
    return q;
}

SpanComparison compare_charge_spans(const std::vector<ChargeRecord>& a,
                                    const std::vector<ChargeRecord>& b) {
    SpanComparison cmp;
    cmp.dim_a = static_cast<int>(a.size());
    cmp.dim_b = static_cast<int>(b.size());
    if (a.empty() || b.empty()) {
        cmp.max_principal_angle = (a.empty() && b.empty()) ? 0.0 : kPi / 2;
        return cmp;
    }
    std::unordered_map<std::int64_t, int> slot;
    std::vector<std::unordered_map<std::int64_t, cx>> va, vb;
    for (const auto& q : a) va.push_back(charge_string_coeffs(q));
    for (const auto& q : b) vb.push_back(charge_string_coeffs(q));
    for (const auto& v : va)
        for (const auto& [id, c] : v)
            if (!slot.count(id)) slot.emplace(id, static_cast<int>(slot.size()));
    for (const auto& v : vb)
        for (const auto& [id, c] : v)
            if (!slot.count(id)) slot.emplace(id, static_cast<int>(slot.size()));

    auto to_matrix = [&](const std::vector<std::unordered_map<std::int64_t, cx>>& vs) {
        Matrix M = Matrix::Zero(static_cast<Eigen::Index>(slot.size()), static_cast<Eigen::Index>(vs.size()));
        for (size_t c = 0; c < vs.size(); ++c)
            for (const auto& [id, v] : vs[c]) M(slot[id], static_cast<Eigen::Index>(c)) = v;
        Eigen::HouseholderQR<Matrix> qr(M);
        return Matrix(qr.householderQ() * Matrix::Identity(M.rows(), M.cols()));
    };
    Matrix Qa = to_matrix(va), Qb = to_matrix(vb);
    // small angles via the projection residual (acos of a near-1 singular
    // value cannot resolve below ~1e-7)
    Matrix ra = Qb - Qa * (Qa.adjoint() * Qb);
    Matrix rb = Qa - Qb * (Qb.adjoint() * Qa);
    Eigen::JacobiSVD<Matrix> sva(ra), svb(rb);
    double s = std::max(sva.singularValues().maxCoeff(), svb.singularValues().maxCoeff());
    cmp.max_principal_angle = std::asin(std::clamp(s, 0.0, 1.0));
    if (cmp.dim_a != cmp.dim_b) cmp.max_principal_angle = kPi / 2;
    return cmp;
}

namespace {

nlohmann::json op_matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

const char* provenance_name(ChargeProvenance::Kind k) {
    switch (k) {
        case ChargeProvenance::Kind::from_soliton: return "from_soliton";
        case ChargeProvenance::Kind::composite: return "composite";
        case ChargeProvenance::Kind::brute_force: return "brute_force";
        default: return "user";
    }
}

}  // namespace

std::string charge_to_json(const ChargeRecord& Q) {
    nlohmann::json j;
    j["chain_len"] = Q.chain_len;
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : Q.terms)
        terms.push_back({{"coeff", {t.coeff.real(), t.coeff.imag()}},
                         {"x", t.x},
                         {"w", t.op.w},
                         {"d", t.op.d},
                         {"op", op_matrix_json(t.op.entries)}});
    j["terms"] = std::move(terms);
    nlohmann::json prov;
    prov["kind"] = provenance_name(Q.provenance.kind);
    if (Q.provenance.direction) prov["direction"] = direction_name(*Q.provenance.direction);
    if (Q.provenance.width) prov["w"] = *Q.provenance.width;
    if (Q.provenance.lambda) prov["lambda"] = {Q.provenance.lambda->real(), Q.provenance.lambda->imag()};
    j["provenance"] = std::move(prov);
    return j.dump(2);
}

ChargeRecord charge_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("charge file: ") + e.what());
    }
    try {
        int chain_len = j.at("chain_len").get<int>();
        std::vector<ChargeTerm> terms;
        for (const auto& t : j.at("terms")) {
            int w = t.at("w").get<int>(), d = t.at("d").get<int>();
            std::int64_t dim = ipow(d, w);
            Matrix m(dim, dim);
            const auto& rows = t.at("op");
            if (static_cast<Eigen::Index>(rows.size()) != dim) throw parse_error("charge file: op shape");
            for (Eigen::Index r = 0; r < dim; ++r)
                for (Eigen::Index c = 0; c < dim; ++c)
                    m(r, c) = cx(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
            terms.push_back({cx(t.at("coeff")[0].get<double>(), t.at("coeff")[1].get<double>()),
                             t.at("x").get<int>(), LocalOperator{d, w, std::move(m)}});
        }
        return make_charge(chain_len, std::move(terms), {ChargeProvenance::Kind::user, {}, {}, {}});
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("charge file: ") + e.what());
    }
}

std::string decomposition_to_json(const ChargeDecomposition& dec) {
    nlohmann::json j;
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : dec.coeffs)
        coeffs.push_back({{"direction", direction_name(c.dir)},
                          {"w", c.w},
                          {"k", c.k},
                          {"value", {c.value.real(), c.value.imag()}},
                          {"lambda", {c.lambda.real(), c.lambda.imag()}},
                          {"phase_compatible", c.phase_compatible}});
    j["coefficients"] = std::move(coeffs);
    j["conserved_residual"] = dec.conserved_residual;
    j["reconstruction_residual"] = dec.reconstruction_residual;
    return j.dump(2);
}

}  // namespace ducharge
