#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ducharge {

using cx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr double kPi = 3.14159265358979323846;

// d^e for small integer bases; throws on overflow past 2^62.
inline std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > (std::int64_t{1} << 62) / base)
            throw std::overflow_error("ipow: dimension overflow");
        r *= base;
    }
    return r;
}

// Largest dense Hilbert-space dimension the library will materialize (chain
// d^{2L} and superoperator operand d^{2w} alike). DUCHARGE_MAX_DIM overrides.
std::int64_t resource_cap();

// Violated caller contract (bad arguments, shape mismatch, parity errors).
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Requested object exceeds the configured dimension caps.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical procedure failed or produced an inconclusive answer.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A finite-chain charge was requested for a soliton whose phase is not an
// L-th root of unity. Carries the offending phase so callers can route to
// the conjugate-pair construction instead.
struct phase_incompatible : std::runtime_error {
    cx lambda;
    int L;
    phase_incompatible(cx lambda_, int L_)
        : std::runtime_error("soliton phase is not an L-th root of unity (|lambda^L - 1| too large)"),
          lambda(lambda_), L(L_) {}
};

// Gate conjugation does not map Pauli strings to single Pauli strings.
struct non_clifford_error : std::runtime_error {
    std::string generator;
    explicit non_clifford_error(std::string gen)
        : std::runtime_error("gate is not Clifford: image of " + gen + " is not a single Pauli string"),
          generator(std::move(gen)) {}
};

// A conserved input failed to decompose into soliton charges. Unreachable
// for dual-unitary gates; reachable when dual-unitarity is violated.
struct theorem_violation : std::runtime_error {
    double residual;
    explicit theorem_violation(double r)
        : std::runtime_error("conserved density does not decompose into soliton charges (residual "
                             + std::to_string(r) + ")"),
          residual(r) {}
};

}  // namespace ducharge
