#include "ducharge/pauli.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace ducharge {

namespace {

// (phase, letter) of the single-site product p·q. Letter 0 is identity.
std::pair<cx, PauliLetter> letter_product(PauliLetter p, PauliLetter q) {
    if (p == 0) return {cx(1.0), q};
    if (q == 0) return {cx(1.0), p};
    if (p == q) return {cx(1.0), 0};
    // X·Y = iZ and cyclic; reversed order flips the sign.
    static const PauliLetter third[4][4] = {{0, 0, 0, 0}, {0, 0, 3, 2}, {0, 3, 0, 1}, {0, 2, 1, 0}};
    bool forward = (q == p % 3 + 1);
    return {forward ? cx(0.0, 1.0) : cx(0.0, -1.0), third[p][q]};
}

PauliLetter effective_letter(const PauliTerm& t, int site) {
    auto it = t.letters.find(site);
    if (it != t.letters.end()) return it->second;
    if (t.left_string && site < *t.left_string) return 3;
    return 0;
}

}  // namespace

void PauliTerm::canonicalize_tail() {
    if (!left_string) return;
    while (true) {
        auto it = letters.find(*left_string);
        if (it != letters.end() && it->second == 3) {
            letters.erase(it);
            ++*left_string;
        } else {
            break;
        }
    }
}

bool PauliTerm::same_string(const PauliTerm& other) const {
    return left_string == other.left_string && letters == other.letters;
}

PauliSum canonicalize(PauliSum s) {
    for (auto& t : s.terms) t.canonicalize_tail();
    std::sort(s.terms.begin(), s.terms.end(), [](const PauliTerm& a, const PauliTerm& b) {
        int ma = a.left_string ? *a.left_string - 1
                               : (a.letters.empty() ? INT32_MAX : a.letters.begin()->first);
        int mb = b.left_string ? *b.left_string - 1
                               : (b.letters.empty() ? INT32_MAX : b.letters.begin()->first);
        if (ma != mb) return ma < mb;
        if (a.left_string != b.left_string) return a.left_string < b.left_string;
        return a.letters < b.letters;
    });
    PauliSum out;
    for (auto& t : s.terms) {
        if (!out.terms.empty() && out.terms.back().same_string(t))
            out.terms.back().coeff += t.coeff;
        else
            out.terms.push_back(std::move(t));
    }
    std::erase_if(out.terms, [](const PauliTerm& t) { return std::abs(t.coeff) < 1e-14; });
    return out;
}

PauliTerm pauli_term_product(const PauliTerm& a, const PauliTerm& b) {
    PauliTerm out;
    out.coeff = a.coeff * b.coeff;

    bool ta = a.left_string.has_value(), tb = b.left_string.has_value();
    // Sites where the product can be non-trivial beyond a plain shared tail.
    std::set<int> sites;
    for (const auto& [s, l] : a.letters) sites.insert(s);
    for (const auto& [s, l] : b.letters) sites.insert(s);
    if (ta && tb) {
        int lo = std::min(*a.left_string, *b.left_string);
        int hi = std::max(*a.left_string, *b.left_string);
        for (int s = lo; s < hi; ++s) sites.insert(s);
        out.left_string.reset();  // Z·Z cancels below both tails
    } else if (ta || tb) {
        int tail = ta ? *a.left_string : *b.left_string;
        int floor_site = tail;
        for (int s : sites)
            if (s < floor_site) floor_site = s;
        // below the lower term's letters both sides give Z·1 or 1·Z
        out.left_string = floor_site;
        for (int s = floor_site; s < tail; ++s) sites.insert(s);
    }

    for (int s : sites) {
        if (out.left_string && s < *out.left_string) continue;
        auto [phase, l] = letter_product(effective_letter(a, s), effective_letter(b, s));
        out.coeff *= phase;
        if (l != 0) out.letters[s] = l;
    }
    out.canonicalize_tail();
    return out;
}

PauliSum pauli_product(const PauliSum& a, const PauliSum& b) {
    PauliSum out;
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms) out.terms.push_back(pauli_term_product(ta, tb));
    return canonicalize(std::move(out));
}

PauliSum pauli_add(const PauliSum& a, const PauliSum& b) {
    PauliSum out = a;
    out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
    return canonicalize(std::move(out));
}

PauliSum pauli_scale(const PauliSum& a, cx factor) {
    PauliSum out = a;
    for (auto& t : out.terms) t.coeff *= factor;
    return canonicalize(std::move(out));
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
    return pauli_add(pauli_product(a, b), pauli_scale(pauli_product(b, a), cx(-1.0)));
}

PauliSum anticommutator(const PauliSum& a, const PauliSum& b) {
    return pauli_add(pauli_product(a, b), pauli_product(b, a));
}

bool pauli_equal(const PauliSum& a, const PauliSum& b) {
    PauliSum ca = canonicalize(a), cb = canonicalize(b);
    if (ca.terms.size() != cb.terms.size()) return false;
    for (size_t i = 0; i < ca.terms.size(); ++i) {
        if (!ca.terms[i].same_string(cb.terms[i])) return false;
        if (ca.terms[i].coeff != cb.terms[i].coeff) return false;
    }
    return true;
}

namespace {

SignedPauliPair pair_product(const SignedPauliPair& p, const SignedPauliPair& q) {
    auto [fa, la] = letter_product(p.a, q.a);
    auto [fb, lb] = letter_product(p.b, q.b);
    return {p.phase * q.phase * fa * fb, la, lb};
}

cx snap_unit_phase(cx v) {
    static const cx units[4] = {cx(1, 0), cx(-1, 0), cx(0, 1), cx(0, -1)};
    for (cx u : units)
        if (std::abs(v - u) < 1e-10) return u;
    throw numeric_error("tableau: image phase is not a unit");
}

bool pairs_commute(const SignedPauliPair& p, const SignedPauliPair& q) {
    auto anti = [](PauliLetter x, PauliLetter y) { return x != 0 && y != 0 && x != y; };
    return (static_cast<int>(anti(p.a, q.a)) + static_cast<int>(anti(p.b, q.b))) % 2 == 0;
}

}  // namespace

SignedPauliPair CliffordTableau::image(PauliLetter la, PauliLetter lb) const {
    if (la == 0 && lb == 0) return {cx(1.0), 0, 0};
    if (lb == 0) return left[la - 1];
    if (la == 0) return right[lb - 1];
    return pair_product(left[la - 1], right[lb - 1]);
}

CliffordTableau tableau_from_gate(const Gate& g) {
    if (g.d != 2) throw contract_error("tableau_from_gate: qubits only");
    if (!is_unitary(g)) throw contract_error("tableau_from_gate: gate must be unitary");
    static const char* names[6] = {"X0", "Y0", "Z0", "X1", "Y1", "Z1"};
    const auto& letters = site_letters(2);

    CliffordTableau tab;
    for (int gen = 0; gen < 6; ++gen) {
        int letter = gen % 3 + 1;
        bool left_side = gen < 3;
        Matrix p = left_side ? kron(letters[letter], letters[0]) : kron(letters[0], letters[letter]);
        LocalOperator conj{2, 2, g.entries * p * g.entries.adjoint()};
        Vector c = string_coefficients(conj);
        int hit = -1;
        for (int k = 0; k < 16; ++k) {
            if (std::abs(c(k)) > 1e-10) {
                if (hit >= 0) throw non_clifford_error(names[gen]);
                hit = k;
            }
        }
        if (hit < 0) throw non_clifford_error(names[gen]);
        // residual check against the dense conjugation
        Matrix img = kron(letters[hit / 4], letters[hit % 4]);
        if ((conj.entries - c(hit) * img).norm() > 1e-10) throw non_clifford_error(names[gen]);
        SignedPauliPair sp{snap_unit_phase(c(hit)), static_cast<PauliLetter>(hit / 4),
                           static_cast<PauliLetter>(hit % 4)};
        (left_side ? tab.left : tab.right)[letter - 1] = sp;
    }

    // conjugation preserves commutation relations
    auto expect = [&](const SignedPauliPair& p, const SignedPauliPair& q, bool commute, const char* what) {
        if (pairs_commute(p, q) != commute)
            throw numeric_error(std::string("tableau: commutation relation broken for ") + what);
    };
    expect(tab.left[0], tab.left[2], false, "X0/Z0");
    expect(tab.right[0], tab.right[2], false, "X1/Z1");
    expect(tab.left[0], tab.right[0], true, "X0/X1");
    expect(tab.left[0], tab.right[2], true, "X0/Z1");
    expect(tab.left[2], tab.right[0], true, "Z0/X1");
    expect(tab.left[2], tab.right[2], true, "Z0/Z1");

    SignedPauliPair zz = tab.image(3, 3);
    tab.z_string_stable = (zz.a == 3 && zz.b == 3 && zz.phase == cx(1.0));
    return tab;
}

namespace {

PauliTerm layer_step_term(const CliffordTableau& tab, const PauliTerm& term, int align) {
    auto pair_start = [&](int site) { return site - (((site - align) % 2 + 2) % 2); };

    if (term.left_string && !tab.z_string_stable)
        throw contract_error("brickwork_step: semi-infinite tails need a Z-string-stable tableau");

    std::set<int> gates;
    for (const auto& [s, l] : term.letters) gates.insert(pair_start(s));
    bool straddle = false;
    if (term.left_string) {
        int t = *term.left_string;
        if (pair_start(t - 1) == t - 1) {  // gate (t-1, t) crosses the tail boundary
            gates.insert(t - 1);
            straddle = true;
        }
        // gates fully below the tail boundary map Z⊗Z to itself
        std::erase_if(gates, [&](int p) { return p + 1 < t; });
    }

    PauliTerm out = term;
    for (int p : gates) {
        PauliLetter la = effective_letter(term, p), lb = effective_letter(term, p + 1);
        SignedPauliPair img = tab.image(la, lb);
        out.coeff *= img.phase;
        if (img.a != 0) out.letters[p] = img.a; else out.letters.erase(p);
        if (img.b != 0) out.letters[p + 1] = img.b; else out.letters.erase(p + 1);
    }
    if (straddle) out.left_string = *term.left_string - 1;
    out.canonicalize_tail();
    return out;
}

}  // namespace

PauliSum brickwork_step(const CliffordTableau& tU, const CliffordTableau& tV,
                        const PauliSum& P, int t) {
    if (t < 0) throw contract_error("brickwork_step: t must be >= 0");
    PauliSum cur = canonicalize(P);
    for (int step = 0; step < t; ++step) {
        PauliSum next;
        for (const auto& term : cur.terms) next.terms.push_back(layer_step_term(tU, term, 0));
        cur = canonicalize(std::move(next));
        next.terms.clear();
        for (const auto& term : cur.terms) next.terms.push_back(layer_step_term(tV, term, 1));
        cur = canonicalize(std::move(next));
    }
    return cur;
}

PauliSum jw_fermion(int j, FermionMode mode) {
    if (mode == FermionMode::finite_from_0 && j < 0)
        throw contract_error("jw_fermion: finite mode needs j >= 0");
    PauliTerm tx, ty;
    tx.coeff = cx(0.5, 0.0);
    ty.coeff = cx(0.0, -0.5);
    tx.letters[j] = 1;
    ty.letters[j] = 2;
    if (mode == FermionMode::semi_infinite) {
        tx.left_string = j;
        ty.left_string = j;
    } else {
        for (int s = 0; s < j; ++s) {
            tx.letters[s] = 3;
            ty.letters[s] = 3;
        }
    }
    return canonicalize({{tx, ty}});
}

PauliSum fermion_pair(int j, int l) {
    if (l % 2 == 0) throw contract_error("fermion_pair: l must be odd");
    return pauli_product(jw_fermion(j, FermionMode::semi_infinite),
                         jw_fermion(j + l + 1, FermionMode::semi_infinite));
}

std::string pauli_sum_to_text(const PauliSum& s) {
    std::ostringstream out;
    char buf[64];
    static const char letter_names[4] = {'I', 'X', 'Y', 'Z'};
    for (const auto& t : s.terms) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", t.coeff.real(), t.coeff.imag());
        out << buf;
        for (const auto& [site, l] : t.letters) out << " " << site << ":" << letter_names[l];
        if (t.left_string) out << " tail:" << *t.left_string;
        out << "\n";
    }
    return out.str();
}

PauliSum pauli_sum_from_text(const std::string& text) {
    PauliSum out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        PauliTerm term;
        double re, im;
        if (!(ls >> re >> im)) throw parse_error("pauli text: bad coefficient line: " + line);
        term.coeff = cx(re, im);
        std::string tok;
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos) throw parse_error("pauli text: bad token " + tok);
            std::string head = tok.substr(0, colon), tail = tok.substr(colon + 1);
            if (head == "tail") {
                term.left_string = std::stoi(tail);
            } else {
                int site = std::stoi(head);
                PauliLetter l = tail == "X" ? 1 : tail == "Y" ? 2 : tail == "Z" ? 3 : 0;
                if (l == 0) throw parse_error("pauli text: bad letter " + tok);
                term.letters[site] = l;
            }
        }
        out.terms.push_back(std::move(term));
    }
    return canonicalize(std::move(out));
}

LocalOperator pauli_sum_to_chain(const PauliSum& s, int L) {
    int n = 2 * L;
    std::int64_t dim = ipow(2, n);
    LocalOperator acc = LocalOperator::zero(2, n);
    // each string is a signed permutation: X flips a bit, Y flips with ±i,
    // Z applies (-1)^bit
    for (const auto& t : s.terms) {
        if (t.left_string) throw contract_error("pauli_sum_to_chain: term has a semi-infinite tail");
        for (const auto& [site, l] : t.letters)
            if (site < 0 || site >= n)
                throw contract_error("pauli_sum_to_chain: site outside the chain");
        for (std::int64_t col = 0; col < dim; ++col) {
            std::int64_t row = col;
            cx phase = t.coeff;
            for (const auto& [site, l] : t.letters) {
                std::int64_t bit = (col >> (n - 1 - site)) & 1;
                if (l == 1) {  // X
                    row ^= std::int64_t{1} << (n - 1 - site);
                } else if (l == 2) {  // Y: |0> -> i|1>, |1> -> -i|0>
                    row ^= std::int64_t{1} << (n - 1 - site);
                    phase *= (bit == 0) ? cx(0, 1) : cx(0, -1);
                } else {  // Z
                    if (bit) phase = -phase;
                }
            }
            acc.entries(row, col) += phase;
        }
    }
    return acc;
}

}  // namespace ducharge
