#include "ducharge/superoperator.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include <json.hpp>

namespace ducharge {

namespace {

void verify_channel_invariants(Superoperator& S) {
    std::int64_t n = ipow(S.d, S.w);
    Vector vid = vectorize(LocalOperator::identity(S.d, S.w));
    double scale = vid.norm();
    double unital = (S.entries * vid - vid).norm() / scale;
    if (unital > 1e-12)
        throw numeric_error("superoperator is not unital (residual " + std::to_string(unital) + ")");
    double tp = (S.entries.adjoint() * vid - vid).norm() / scale;
    if (tp > 1e-12)
        throw numeric_error("superoperator is not trace-preserving (residual " + std::to_string(tp) + ")");

    Eigen::ComplexEigenSolver<Matrix> es(S.entries);
    if (es.info() != Eigen::Success)
        throw numeric_error("eigensolver failed on a " + std::to_string(n * n) + "-dim superoperator");
    S.eigenvalues = es.eigenvalues();
    S.eigenvectors = es.eigenvectors();
    double radius = S.eigenvalues.cwiseAbs().maxCoeff();
    if (radius > 1.0 + 1e-10)
        throw numeric_error("superoperator spectral radius " + std::to_string(radius) + " exceeds 1");
}

// Columns of the superoperator matrix: image of each vectorized basis unit.
template <typename MapFn>
Matrix superoperator_matrix(int d, int w, MapFn&& map) {
    std::int64_t n = ipow(d, w);
    Matrix out(n * n, n * n);
    for (std::int64_t k = 0; k < n * n; ++k) {
        Vector e = Vector::Zero(n * n);
        e(k) = 1.0;
        out.col(k) = vectorize(map(devectorize(d, w, e)));
    }
    return out;
}

Matrix layer_matrix(const Gate& g, int copies) {
    Matrix m = g.entries;
    for (int i = 1; i < copies; ++i) m = kron(m, g.entries);
    return m;
}

}  // namespace

LocalOperator Superoperator::apply(const LocalOperator& op) const {
    if (op.d != d || op.w != w) throw contract_error("superoperator: operand shape mismatch");
    return devectorize(d, w, entries * vectorize(op));
}

LocalOperator Superoperator::apply_power(const LocalOperator& op, int t) const {
    Vector v = vectorize(op);
    for (int i = 0; i < t; ++i) v = entries * v;
    return devectorize(d, w, v);
}

double Superoperator::spectral_radius() const {
    return eigenvalues.cwiseAbs().maxCoeff();
}

Superoperator m_plus(const Gate& U) {
    if (!is_unitary(U)) throw contract_error("m_plus: gate is not unitary");
    int d = U.d;
    auto map = [&](const LocalOperator& a) {
        LocalOperator padded = kron(a, LocalOperator::identity(d, 1));
        padded.entries = U.entries * padded.entries * U.entries.adjoint();
        LocalOperator traced = partial_trace(padded, {0});
        traced.entries /= static_cast<double>(d);
        return traced;
    };
    Superoperator S{d, 1, Direction::plus, {U}, superoperator_matrix(d, 1, map), {}, {}};
    verify_channel_invariants(S);
    return S;
}

Superoperator m_minus(const Gate& U) {
    if (!is_unitary(U)) throw contract_error("m_minus: gate is not unitary");
    int d = U.d;
    auto map = [&](const LocalOperator& a) {
        LocalOperator padded = kron(LocalOperator::identity(d, 1), a);
        padded.entries = U.entries * padded.entries * U.entries.adjoint();
        LocalOperator traced = partial_trace(padded, {1});
        traced.entries /= static_cast<double>(d);
        return traced;
    };
    Superoperator S{d, 1, Direction::minus, {U}, superoperator_matrix(d, 1, map), {}, {}};
    verify_channel_invariants(S);
    return S;
}

Superoperator m_w(const Gate& U, const Gate& V, int w, Direction dir) {
    if (U.d != V.d) throw contract_error("m_w: gates have different qudit dimension");
    if (w < 1 || w % 2 == 0) throw contract_error("m_w: w must be an odd integer >= 1");
    if (!is_unitary(U) || !is_unitary(V)) throw contract_error("m_w: gates must be unitary");
    int d = U.d;
    if (ipow(static_cast<std::int64_t>(d) * d, w) > resource_cap())
        throw resource_error("m_w: superoperator dimension d^{2w} exceeds the resource cap");

    int copies = (w + 1) / 2;
    Matrix layerU = layer_matrix(U, copies);
    Matrix layerV = layer_matrix(V, copies);
    LocalOperator id1 = LocalOperator::identity(d, 1);

    // One layer of the window map: pad with identity on the trailing edge,
    // conjugate by the aligned gate layer, trace the leading edge, 1/d.
    auto half_step = [&](const LocalOperator& a, const Matrix& layer) {
        LocalOperator padded = (dir == Direction::plus) ? kron(a, id1) : kron(id1, a);
        padded.entries = layer * padded.entries * layer.adjoint();
        int traced_site = (dir == Direction::plus) ? 0 : w;
        LocalOperator traced = partial_trace(padded, {traced_site});
        traced.entries /= static_cast<double>(d);
        return traced;
    };
    auto map = [&](const LocalOperator& a) { return half_step(half_step(a, layerU), layerV); };

    Superoperator S{d, w, dir, {U, V}, superoperator_matrix(d, w, map), {}, {}};
    verify_channel_invariants(S);
    return S;
}

namespace {

struct RawPair {
    cx lambda;
    Vector vec;  // unit 2-norm
};

// Fix a deterministic representative: scale so the largest-magnitude string
// coefficient is real positive, order by leading coefficient index.
void canonicalize_phase(Vector& v) {
    Eigen::Index lead = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > best + 1e-12) {
            best = std::abs(v(i));
            lead = i;
        }
    }
    if (best > 0) v *= std::conj(v(lead)) / std::abs(v(lead));
}

Eigen::Index leading_index(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-9) return i;
    return v.size();
}

std::vector<std::vector<RawPair>> unimodular_clusters(const Superoperator& S, double tol) {
    if (tol <= 0 || tol >= 1e-4) throw contract_error("unimodular_eigenspace: tol must lie in (0, 1e-4)");
    std::vector<RawPair> pairs;
    for (Eigen::Index i = 0; i < S.eigenvalues.size(); ++i) {
        cx lam = S.eigenvalues(i);
        if (std::abs(std::abs(lam) - 1.0) < tol) {
            Vector v = S.eigenvectors.col(i);
            v /= v.norm();
            double resid = (S.entries * v - lam * v).norm();
            if (resid > 1e-9)
                throw numeric_error("unimodular eigenpair failed residual re-verification ("
                                    + std::to_string(resid) + ")");
            pairs.push_back({lam, std::move(v)});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const RawPair& a, const RawPair& b) {
        double ta = std::arg(a.lambda), tb = std::arg(b.lambda);
        if (ta < 0) ta += 2 * kPi;
        if (tb < 0) tb += 2 * kPi;
        return ta < tb;
    });

    std::vector<std::vector<RawPair>> clusters;
    const double cluster_tol = 1e-9;
    for (auto& p : pairs) {
        if (!clusters.empty() && std::abs(clusters.back().front().lambda - p.lambda) < cluster_tol)
            clusters.back().push_back(std::move(p));
        else
            clusters.push_back({std::move(p)});
    }
    return clusters;
}

// Orthonormal basis (thin Q) of the span of the given unit vectors.
Matrix orthonormal_span(const std::vector<Vector>& vecs) {
    Matrix B(vecs.front().size(), static_cast<Eigen::Index>(vecs.size()));
    for (size_t i = 0; i < vecs.size(); ++i) B.col(static_cast<Eigen::Index>(i)) = vecs[i];
    Eigen::HouseholderQR<Matrix> qr(B);
    Matrix Q = qr.householderQ() * Matrix::Identity(B.rows(), B.cols());
    return Q;
}

}  // namespace

std::vector<EigenPair> unimodular_eigenspace(const Superoperator& S, double tol) {
    std::vector<EigenPair> out;
    for (auto& cluster : unimodular_clusters(S, tol)) {
        cx lam = cluster.front().lambda;
        std::vector<Vector> vecs;
        vecs.reserve(cluster.size());
        for (auto& p : cluster) vecs.push_back(std::move(p.vec));
        Matrix Q = orthonormal_span(vecs);
        std::vector<Vector> basis;
        for (Eigen::Index c = 0; c < Q.cols(); ++c) {
            Vector v = Q.col(c);
            canonicalize_phase(v);
            basis.push_back(std::move(v));
        }
        std::sort(basis.begin(), basis.end(),
                  [](const Vector& a, const Vector& b) { return leading_index(a) < leading_index(b); });
        for (auto& v : basis) out.push_back({lam, devectorize(S.d, S.w, v)});
    }
    return out;
}

SolitonRecord SolitonRecord::adjoint() const {
    return {op.adjoint(), direction, width, std::conj(lambda)};
}

std::vector<SolitonRecord> find_solitons(const Gate& U, const Gate& V, int w, Direction dir, double tol) {
    if (!is_dual_unitary(U) || !is_dual_unitary(V))
        throw contract_error("find_solitons: gates must be dual-unitary");
    Superoperator S = m_w(U, V, w, dir);
    int d = S.d;
    double target_norm = std::sqrt(static_cast<double>(ipow(d, w)));

    std::vector<SolitonRecord> records;
    for (auto& cluster : unimodular_clusters(S, tol)) {
        cx lam = cluster.front().lambda;
        std::vector<Vector> coeffs;  // cluster basis in string-coefficient coordinates
        for (auto& p : cluster) {
            Vector c = string_coefficients(devectorize(d, w, p.vec));
            coeffs.push_back(std::move(c));
        }
        Matrix B(coeffs.front().size(), static_cast<Eigen::Index>(coeffs.size()));
        for (size_t i = 0; i < coeffs.size(); ++i) B.col(static_cast<Eigen::Index>(i)) = coeffs[i];

        // Rows violating boundary-tracelessness; the cluster's intersection
        // with the strict-width subspace is the nullspace of that block.
        std::vector<Eigen::Index> bad_rows;
        for (Eigen::Index k = 0; k < B.rows(); ++k)
            if (string_letter(k, 0, d, w) == 0 || string_letter(k, w - 1, d, w) == 0)
                bad_rows.push_back(k);
        Matrix Bad(static_cast<Eigen::Index>(bad_rows.size()), B.cols());
        for (size_t r = 0; r < bad_rows.size(); ++r) Bad.row(static_cast<Eigen::Index>(r)) = B.row(bad_rows[r]);

        Matrix Vnull;
        if (bad_rows.empty()) {
            Vnull = Matrix::Identity(B.cols(), B.cols());
        } else {
            Eigen::JacobiSVD<Matrix> svd(Bad, Eigen::ComputeFullV);
            const double sv_tol = 1e-8;
            int rank = 0;
            for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
                if (svd.singularValues()(i) > sv_tol) ++rank;
            Eigen::Index nullity = B.cols() - rank;
            Vnull = svd.matrixV().rightCols(nullity);
        }
        if (Vnull.cols() == 0) continue;

        Matrix strict = B * Vnull;  // string coefficients of the intersection basis
        for (Eigen::Index c = 0; c < strict.cols(); ++c) {
            Vector sc = strict.col(c);
            for (Eigen::Index k : bad_rows) sc(k) = 0.0;  // snap residue off the complement
            LocalOperator op = operator_from_strings(d, w, sc);
            double nrm = hs_norm(op);
            if (nrm < 1e-10) continue;
            op.entries *= target_norm / nrm;
            Vector v = vectorize(op);
            double resid = (S.entries * v - lam * v).norm() / v.norm();
            if (resid > 1e-9)
                throw numeric_error("soliton candidate failed residual verification ("
                                    + std::to_string(resid) + ")");
            Vector cvec = string_coefficients(op);
            canonicalize_phase(cvec);
            records.push_back({operator_from_strings(d, w, cvec), dir, w, lam});
        }
    }

    // Hermiticity pairing: a† must be a soliton with phase conj(λ).
    for (const auto& r : records) {
        Vector v = vectorize(r.op.adjoint());
        double resid = (S.entries * v - std::conj(r.lambda) * v).norm() / v.norm();
        if (resid > 1e-8)
            throw numeric_error("adjoint pairing check failed for extracted soliton");
    }
    return records;
}

SubspaceDiagnostics unitary_subspace_diagnostics(const Superoperator& S,
                                                 const std::vector<SolitonRecord>& records,
                                                 int t_max, std::uint64_t seed) {
    SubspaceDiagnostics diag;
    double dw = static_cast<double>(ipow(S.d, S.w));

    std::vector<Vector> vecs;
    for (const auto& r : records) vecs.push_back(vectorize(r.op));

    for (size_t i = 0; i < vecs.size(); ++i) {
        Vector v = vecs[i];
        double n0 = v.norm();
        std::vector<double> ratios;
        for (int t = 1; t <= t_max; ++t) {
            v = S.entries * v;
            double ratio = v.norm() / n0;
            ratios.push_back(ratio);
            diag.max_ratio_deviation = std::max(diag.max_ratio_deviation, std::abs(ratio - 1.0));
        }
        diag.norm_ratios.push_back(std::move(ratios));
    }

    for (size_t i = 0; i < vecs.size(); ++i) {
        for (size_t j = i + 1; j < vecs.size(); ++j) {
            cx base = vecs[i].dot(vecs[j]);
            Vector a = vecs[i], b = vecs[j];
            for (int t = 1; t <= t_max; ++t) {
                a = S.entries * a;
                b = S.entries * b;
                diag.max_pair_deviation =
                    std::max(diag.max_pair_deviation, std::abs(a.dot(b) - base) / dw);
            }
        }
    }

    // Complement = everything hs-orthogonal to the whole unimodular eigenspace
    // (solitons plus identity-padded eigenvectors). Such operators must not
    // grow in norm under any power of the map.
    std::vector<EigenPair> unimods = unimodular_eigenspace(S, 1e-8);
    std::vector<Vector> span;
    for (auto& p : unimods) {
        Vector v = vectorize(p.op);
        span.push_back(v / v.norm());
    }
    Matrix Q;
    if (!span.empty()) Q = orthonormal_span(span);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector v(S.entries.rows());
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cx(gauss(rng), gauss(rng));
        if (Q.size() > 0) v -= Q * (Q.adjoint() * v);
        if (v.norm() < 1e-12) continue;
        v /= v.norm();
        double prev = 1.0;
        for (int t = 1; t <= t_max; ++t) {
            v = S.entries * v;
            double cur = v.norm();
            double growth = cur - prev;
            diag.max_complement_growth = std::max(diag.max_complement_growth, growth);
            if (growth > 1e-12) diag.complement_nonincreasing = false;
            prev = cur;
        }
    }
    return diag;
}

std::string spectrum_csv(const Superoperator& S) {
    std::ostringstream out;
    out << "re_lambda,im_lambda,abs_lambda,width,direction\n";
    char buf[128];
    for (Eigen::Index i = 0; i < S.eigenvalues.size(); ++i) {
        cx lam = S.eigenvalues(i);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%s\n", lam.real(), lam.imag(),
                      std::abs(lam), S.w, direction_name(S.direction));
        out << buf;
    }
    return out.str();
}

std::string solitons_to_json(const std::vector<SolitonRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < r.op.entries.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index j = 0; j < r.op.entries.cols(); ++j)
                row.push_back({r.op.entries(i, j).real(), r.op.entries(i, j).imag()});
            rows.push_back(std::move(row));
        }
        arr.push_back({{"direction", direction_name(r.direction)},
                       {"width", r.width},
                       {"lambda", {r.lambda.real(), r.lambda.imag()}},
                       {"hs_norm", hs_norm(r.op)},
                       {"op", {{"d", r.op.d}, {"matrix", rows}}}});
    }
    return arr.dump(2);
}

}  // namespace ducharge
