#include "ducharge/local_operator.hpp"

#include <map>
#include <mutex>
#include <random>

namespace ducharge {

LocalOperator LocalOperator::identity(int d, int w) {
    std::int64_t n = ipow(d, w);
    return {d, w, Matrix::Identity(n, n)};
}

LocalOperator LocalOperator::zero(int d, int w) {
    std::int64_t n = ipow(d, w);
    return {d, w, Matrix::Zero(n, n)};
}

bool LocalOperator::is_finite() const {
    return entries.allFinite();
}

void check_same_shape(const LocalOperator& a, const LocalOperator& b) {
    if (a.d != b.d || a.w != b.w)
        throw contract_error("operator shape mismatch: (d=" + std::to_string(a.d) + ",w=" + std::to_string(a.w)
                             + ") vs (d=" + std::to_string(b.d) + ",w=" + std::to_string(b.w) + ")");
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

LocalOperator kron(const LocalOperator& a, const LocalOperator& b) {
    if (a.d != b.d) throw contract_error("kron: qudit dimension mismatch");
    return {a.d, a.w + b.w, kron(a.entries, b.entries)};
}

cx hs_inner(const LocalOperator& a, const LocalOperator& b) {
    check_same_shape(a, b);
    return (a.entries.adjoint() * b.entries).trace();
}

double hs_norm(const LocalOperator& a) {
    return a.entries.norm();
}

const std::vector<Matrix>& site_letters(int d) {
    static std::map<int, std::vector<Matrix>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    if (d < 2) throw contract_error("site_letters: d must be >= 2");

    std::vector<Matrix> letters;
    if (d == 2) {
        Matrix id = Matrix::Identity(2, 2);
        Matrix sx(2, 2), sy(2, 2), sz(2, 2);
        sx << 0, 1, 1, 0;
        sy << 0, cx(0, -1), cx(0, 1), 0;
        sz << 1, 0, 0, -1;
        letters = {id, sx, sy, sz};
    } else {
        // clock Z|j> = ω^j |j>, shift X|j> = |j+1 mod d>; letter a*d+b is X^a Z^b
        Matrix X = Matrix::Zero(d, d), Z = Matrix::Zero(d, d);
        for (int j = 0; j < d; ++j) {
            X((j + 1) % d, j) = 1.0;
            Z(j, j) = std::polar(1.0, 2.0 * kPi * j / d);
        }
        Matrix Xa = Matrix::Identity(d, d);
        for (int a = 0; a < d; ++a) {
            Matrix XaZb = Xa;
            for (int b = 0; b < d; ++b) {
                letters.push_back(XaZb);
                XaZb = XaZb * Z;
            }
            Xa = X * Xa;
        }
    }
    return cache.emplace(d, std::move(letters)).first->second;
}

int string_letter(std::int64_t k, int site, int d, int w) {
    std::int64_t q = static_cast<std::int64_t>(d) * d;
    std::int64_t div = ipow(q, w - 1 - site);
    return static_cast<int>((k / div) % q);
}

std::vector<LocalOperator> operator_basis(int d, int w) {
    if (d < 2 || w < 1) throw contract_error("operator_basis: need d >= 2, w >= 1");
    std::int64_t count = ipow(static_cast<std::int64_t>(d) * d, w);
    if (count > (1 << 22)) throw resource_error("operator_basis: d^{2w} too large");
    const auto& letters = site_letters(d);
    std::vector<LocalOperator> basis;
    basis.reserve(count);
    for (std::int64_t k = 0; k < count; ++k) {
        Matrix m = letters[string_letter(k, 0, d, w)];
        for (int s = 1; s < w; ++s) m = kron(m, letters[string_letter(k, s, d, w)]);
        basis.push_back({d, w, std::move(m)});
    }
    return basis;
}

namespace {

// Per-site transform from entry pairs (r, c) to letter coefficients:
// T(k, r*d + c) = conj(B_k(r, c)) / d, so that applying T along every site
// axis of the entry tensor yields the string coefficients.
const Matrix& letter_transform(int d) {
    static std::map<int, Matrix> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    const auto& letters = site_letters(d);
    int q = d * d;
    Matrix T(q, q);
    for (int k = 0; k < q; ++k)
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                T(k, r * d + c) = std::conj(letters[k](r, c)) / static_cast<double>(d);
    return cache.emplace(d, std::move(T)).first->second;
}

const Matrix& letter_transform_inv(int d) {
    static std::map<int, Matrix> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    Matrix Tinv = letter_transform(d).inverse();
    return cache.emplace(d, std::move(Tinv)).first->second;
}

// Entry tensor in site-major (r_s, c_s) pair digits, site 0 slowest.
Vector entries_to_pair_major(const LocalOperator& op) {
    int d = op.d, w = op.w;
    std::int64_t n = op.dim(), q = static_cast<std::int64_t>(d) * d;
    Vector v(ipow(q, w));
    std::vector<std::int64_t> rd(w), cd(w);
    for (std::int64_t r = 0; r < n; ++r) {
        std::int64_t rr = r;
        for (int s = w - 1; s >= 0; --s) { rd[s] = rr % d; rr /= d; }
        for (std::int64_t c = 0; c < n; ++c) {
            std::int64_t cc = c;
            for (int s = w - 1; s >= 0; --s) { cd[s] = cc % d; cc /= d; }
            std::int64_t idx = 0;
            for (int s = 0; s < w; ++s) idx = idx * q + (rd[s] * d + cd[s]);
            v(idx) = op.entries(r, c);
        }
    }
    return v;
}

LocalOperator pair_major_to_entries(int d, int w, const Vector& v) {
    std::int64_t n = ipow(d, w), q = static_cast<std::int64_t>(d) * d;
    LocalOperator op{d, w, Matrix::Zero(n, n)};
    std::vector<std::int64_t> pd(w);
    for (std::int64_t idx = 0; idx < v.size(); ++idx) {
        std::int64_t ii = idx;
        for (int s = w - 1; s >= 0; --s) { pd[s] = ii % q; ii /= q; }
        std::int64_t r = 0, c = 0;
        for (int s = 0; s < w; ++s) {
            r = r * d + pd[s] / d;
            c = c * d + pd[s] % d;
        }
        op.entries(r, c) = v(idx);
    }
    return op;
}

// Apply a q x q matrix along one mode of a q-ary tensor of w modes.
void apply_mode(Vector& v, const Matrix& T, int site, int w, std::int64_t q) {
    std::int64_t stride = ipow(q, w - 1 - site);
    std::int64_t outer = ipow(q, site);
    std::int64_t block = stride * q;
    Vector x(q), y(q);
    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t i = 0; i < stride; ++i) {
            std::int64_t base = o * block + i;
            for (std::int64_t k = 0; k < q; ++k) x(k) = v(base + k * stride);
            y.noalias() = T * x;
            for (std::int64_t k = 0; k < q; ++k) v(base + k * stride) = y(k);
        }
    }
}

}  // namespace

Vector string_coefficients(const LocalOperator& op) {
    if (op.w == 0) {
        Vector v(1);
        v(0) = op.entries(0, 0);
        return v;
    }
    Vector v = entries_to_pair_major(op);
    const Matrix& T = letter_transform(op.d);
    std::int64_t q = static_cast<std::int64_t>(op.d) * op.d;
    for (int s = 0; s < op.w; ++s) apply_mode(v, T, s, op.w, q);
    return v;
}

LocalOperator operator_from_strings(int d, int w, const Vector& coeffs) {
    std::int64_t q = static_cast<std::int64_t>(d) * d;
    if (coeffs.size() != ipow(q, w)) throw contract_error("operator_from_strings: bad coefficient length");
    Vector v = coeffs;
    const Matrix& Ti = letter_transform_inv(d);
    for (int s = 0; s < w; ++s) apply_mode(v, Ti, s, w, q);
    return pair_major_to_entries(d, w, v);
}

LocalOperator partial_trace(const LocalOperator& op, const std::set<int>& sites) {
    for (int s : sites)
        if (s < 0 || s >= op.w) throw contract_error("partial_trace: site out of range");
    int d = op.d, w = op.w;
    int wk = w - static_cast<int>(sites.size());
    std::vector<int> kept;
    for (int s = 0; s < w; ++s)
        if (!sites.count(s)) kept.push_back(s);

    std::int64_t nk = ipow(d, wk), nt = ipow(d, static_cast<int>(sites.size()));
    LocalOperator out{d, wk, Matrix::Zero(nk, nk)};
    std::vector<std::int64_t> site_stride(w);
    for (int s = 0; s < w; ++s) site_stride[s] = ipow(d, w - 1 - s);
    std::vector<int> traced(sites.begin(), sites.end());

    std::vector<std::int64_t> kd(std::max(wk, 1)), td(std::max<int>(traced.size(), 1));
    for (std::int64_t rk = 0; rk < nk; ++rk) {
        std::int64_t rr = rk;
        for (int s = wk - 1; s >= 0; --s) { kd[s] = rr % d; rr /= d; }
        for (std::int64_t ck = 0; ck < nk; ++ck) {
            std::int64_t cc = ck;
            std::vector<std::int64_t> kc(std::max(wk, 1));
            for (int s = wk - 1; s >= 0; --s) { kc[s] = cc % d; cc /= d; }
            cx acc = 0.0;
            for (std::int64_t t = 0; t < nt; ++t) {
                std::int64_t tt = t;
                for (int s = static_cast<int>(traced.size()) - 1; s >= 0; --s) { td[s] = tt % d; tt /= d; }
                std::int64_t r = 0, c = 0;
                for (int s = 0; s < wk; ++s) {
                    r += kd[s] * site_stride[kept[s]];
                    c += kc[s] * site_stride[kept[s]];
                }
                for (size_t s = 0; s < traced.size(); ++s) {
                    r += td[s] * site_stride[traced[s]];
                    c += td[s] * site_stride[traced[s]];
                }
                acc += op.entries(r, c);
            }
            out.entries(rk, ck) = acc;
        }
    }
    return out;
}

LocalOperator boundary_traceless_project(const LocalOperator& op) {
    if (op.w < 1) throw contract_error("boundary_traceless_project: w must be >= 1");
    Vector c = string_coefficients(op);
    for (std::int64_t k = 0; k < c.size(); ++k) {
        if (string_letter(k, 0, op.d, op.w) == 0 || string_letter(k, op.w - 1, op.d, op.w) == 0)
            c(k) = 0.0;
    }
    return operator_from_strings(op.d, op.w, c);
}

bool is_boundary_traceless(const LocalOperator& op, double tol) {
    LocalOperator p = boundary_traceless_project(op);
    double scale = std::max(1.0, hs_norm(op));
    return (p.entries - op.entries).norm() < tol * scale;
}

EmbeddedOperator embed(const LocalOperator& op, int x, int chain_len) {
    if (chain_len < 4 || chain_len % 2 != 0)
        throw contract_error("embed: chain_len must be an even integer >= 4");
    if (op.w > chain_len) throw contract_error("embed: operator wider than chain");
    if (x < 0 || x >= chain_len) throw contract_error("embed: start site out of range");
    return {op, x, chain_len};
}

LocalOperator materialize(const EmbeddedOperator& emb) {
    int d = emb.inner.d, w = emb.inner.w, n = emb.chain_len;
    std::int64_t nd = ipow(d, n), wd = ipow(d, w), rest = ipow(d, n - w);
    LocalOperator out{d, n, Matrix::Zero(nd, nd)};

    std::vector<std::int64_t> chain_stride(n);
    for (int s = 0; s < n; ++s) chain_stride[s] = ipow(d, n - 1 - s);
    std::vector<std::int64_t> op_sites(w), id_sites(n - w);
    std::vector<bool> covered(n, false);
    for (int s = 0; s < w; ++s) {
        op_sites[s] = (emb.x + s) % n;
        covered[op_sites[s]] = true;
    }
    {
        int j = 0;
        for (int s = 0; s < n; ++s)
            if (!covered[s]) id_sites[j++] = s;
    }

    std::vector<std::int64_t> rd(std::max(w, 1)), cd(std::max(w, 1)), kd(std::max(n - w, 1));
    for (std::int64_t r = 0; r < wd; ++r) {
        std::int64_t rr = r;
        for (int s = w - 1; s >= 0; --s) { rd[s] = rr % d; rr /= d; }
        for (std::int64_t c = 0; c < wd; ++c) {
            cx val = emb.inner.entries(r, c);
            if (val == cx(0.0)) continue;
            std::int64_t cc = c;
            for (int s = w - 1; s >= 0; --s) { cd[s] = cc % d; cc /= d; }
            std::int64_t rbase = 0, cbase = 0;
            for (int s = 0; s < w; ++s) {
                rbase += rd[s] * chain_stride[op_sites[s]];
                cbase += cd[s] * chain_stride[op_sites[s]];
            }
            for (std::int64_t k = 0; k < rest; ++k) {
                std::int64_t kk = k, off = 0;
                for (int s = n - w - 1; s >= 0; --s) { kd[s] = kk % d; kk /= d; }
                for (int s = 0; s < n - w; ++s) off += kd[s] * chain_stride[id_sites[s]];
                out.entries(rbase + off, cbase + off) = val;
            }
        }
    }
    return out;
}

Vector vectorize(const LocalOperator& op) {
    return Eigen::Map<const Vector>(op.entries.data(), op.entries.size());
}

LocalOperator devectorize(int d, int w, const Vector& v) {
    std::int64_t n = ipow(d, w);
    if (v.size() != n * n) throw contract_error("devectorize: bad vector length");
    LocalOperator op{d, w, Matrix(n, n)};
    Eigen::Map<Vector>(op.entries.data(), v.size()) = v;
    return op;
}

LocalOperator random_local_operator(int d, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::int64_t n = ipow(d, w);
    LocalOperator op{d, w, Matrix(n, n)};
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) op.entries(i, j) = cx(gauss(rng), gauss(rng));
    return op;
}

}  // namespace ducharge
