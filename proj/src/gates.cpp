#include "ducharge/gates.hpp"

#include <fstream>
#include <random>

#include <json.hpp>

#include "ducharge/local_operator.hpp"

namespace ducharge {

using nlohmann::json;

Gate Gate::from_matrix(int d, Matrix m) {
    std::int64_t n = static_cast<std::int64_t>(d) * d;
    if (m.rows() != n || m.cols() != n) throw contract_error("Gate: matrix must be d² x d²");
    if (!m.allFinite()) throw contract_error("Gate: entries must be finite");
    return {d, std::move(m)};
}

Gate dual(const Gate& g) {
    int d = g.d;
    Matrix out(g.entries.rows(), g.entries.cols());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    out(i * d + j, k * d + l) = g.entries(l * d + j, k * d + i);
    return {d, std::move(out)};
}

double unitarity_residual(const Gate& g) {
    Matrix r = g.entries * g.entries.adjoint() - Matrix::Identity(g.entries.rows(), g.entries.cols());
    return r.cwiseAbs().maxCoeff();
}

double duality_residual(const Gate& g) {
    return unitarity_residual(dual(g));
}

bool is_unitary(const Gate& g, double tol) {
    if (tol <= 0) throw contract_error("is_unitary: tol must be positive");
    return unitarity_residual(g) < tol;
}

bool is_dual_unitary(const Gate& g, double tol) {
    return is_unitary(g, tol) && duality_residual(g) < tol;
}

Gate swap_gate(int d) {
    std::int64_t n = static_cast<std::int64_t>(d) * d;
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i * d + j, j * d + i) = 1.0;
    return {d, std::move(m)};
}

Gate fswap() {
    Matrix m(4, 4);
    m << 1, 0, 0, 0,
         0, 0, 1, 0,
         0, 1, 0, 0,
         0, 0, 0, -1;
    return {2, std::move(m)};
}

Gate cz() {
    Matrix m = Matrix::Identity(4, 4);
    m(3, 3) = -1.0;
    return {2, std::move(m)};
}

Gate phased_swap(double theta) {
    Matrix u(2, 2);
    u << 1.0, 0.0, 0.0, std::polar(1.0, theta);
    Matrix m = swap_gate(2).entries * kron(u, u);
    return {2, std::move(m)};
}

namespace {

Matrix haar_su2(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = cx(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 2; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
    return q;
}

Matrix heisenberg_core(double J) {
    Matrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, cx(0, -1), cx(0, 1), 0;
    sz << 1, 0, 0, -1;
    Matrix h = (kPi / 4.0) * kron(sx, sx) + (kPi / 4.0) * kron(sy, sy) + J * kron(sz, sz);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix phases = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) phases(i, i) = std::polar(1.0, es.eigenvalues()(i));
    return es.eigenvectors() * phases * es.eigenvectors().adjoint();
}

}  // namespace

Gate random_dual_unitary_qubit(std::uint64_t seed, double J) {
    std::mt19937_64 rng(seed);
    Matrix u1 = haar_su2(rng), u2 = haar_su2(rng), u3 = haar_su2(rng), u4 = haar_su2(rng);
    Matrix m = kron(u1, u2) * heisenberg_core(J) * kron(u3, u4);
    return {2, std::move(m)};
}

Gate random_dual_unitary_qubit(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(0.0, kPi / 2.0);
    double J = unif(rng);
    return random_dual_unitary_qubit(seed, J);
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw parse_error("matrix: expected non-empty array of rows");
    Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
    Eigen::Index nc = static_cast<Eigen::Index>(rows[0].size());
    Matrix m(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
        const json& row = rows[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != nc)
            throw parse_error("matrix: ragged rows");
        for (Eigen::Index j = 0; j < nc; ++j) {
            const json& e = row[j];
            if (!e.is_array() || e.size() != 2) throw parse_error("matrix: entries must be [re, im]");
            m(i, j) = cx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

}  // namespace

std::string gate_to_json(const Gate& g) {
    json j;
    j["d"] = g.d;
    j["matrix"] = matrix_to_json(g.entries);
    return j.dump(2);
}

Gate gate_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("gate file: ") + e.what());
    }
    if (!j.contains("d") || !j.contains("matrix")) throw parse_error("gate file: missing 'd' or 'matrix'");
    int d = j["d"].get<int>();
    if (d < 2) throw parse_error("gate file: d must be >= 2");
    Matrix m;
    try {
        m = matrix_from_json(j["matrix"]);
    } catch (const json::exception& e) {
        throw parse_error(std::string("gate file: ") + e.what());
    }
    if (m.rows() != d * d || m.cols() != d * d) throw parse_error("gate file: matrix is not d² x d²");
    return Gate::from_matrix(d, std::move(m));
}

void save_gate(const Gate& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open " + path + " for writing");
    out << gate_to_json(g) << "\n";
}

Gate load_gate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return gate_from_json(text);
}

Matrix matrix_from_json_text(const std::string& text, const std::string& key) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("json: ") + e.what());
    }
    if (!j.contains(key)) throw parse_error("json: missing key " + key);
    return matrix_from_json(j[key]);
}

}  // namespace ducharge
