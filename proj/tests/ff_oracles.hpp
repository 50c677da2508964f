#pragma once
// Qubit-level oracles for the Majorana machinery.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"

#include "dilution/pauli.hpp"

namespace oracle {

inline dl::DenseOperator dense_of(const dl::ComplexPauliSum& s) { return dl::from_pauli_coefficients(s.to_hermitian(1e-10)); }

inline dl::DenseOperator x_channel_dense(const dl::DenseOperator& o) {
    const int n = o.num_qubits();
    dl::DenseOperator out(n);
    for (int j = 0; j < n; ++j) {
        const auto xj = oracle::kron_pauli(dl::PauliString::single(n, j, dl::PauliKind::X));
        const auto t = oracle::matmul(oracle::matmul(xj, o), xj);
        for (std::size_t i = 0; i < out.storage().size(); ++i) out.data()[i] += t.data()[i] - o.data()[i];
    }
    return out;
}

inline Eigen::MatrixXcd hermitian_quadratic(int n, std::mt19937_64& rng, bool translation_invariant) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(2 * n, 2 * n);
    if (translation_invariant) {
        std::vector<double> r(4 * n);
        for (auto& v : r) v = g(rng);
        for (int p = 0; p < 2 * n; ++p)
            for (int q = 0; q < 2 * n; ++q) a(p, q) = r[(p % 2) * 2 * n + (q % 2) * n + ((q / 2 - p / 2 + n) % n)];
    } else {
        for (int p = 0; p < 2 * n; ++p)
            for (int q = 0; q < 2 * n; ++q) a(p, q) = g(rng);
    }
    Eigen::MatrixXd anti = 0.5 * (a - a.transpose());
    return std::complex<double>(0, 1) * anti.cast<std::complex<double>>();
}

}  // namespace oracle
