#pragma once

// Shared helpers for the test suites: deterministic random hermitian
// matrices and vectors built on the library's own seeded streams.

#include <Eigen/Dense>

#include "shapecov/hermitian.hpp"
#include "shapecov/sampling.hpp"

namespace testutil {

inline shapecov::RandomStream stream(std::uint64_t seed) {
    return shapecov::RandomStream(shapecov::stream_key(seed, 0, 0, 0xABCDEF));
}

inline Eigen::MatrixXcd random_complex_matrix(int p, shapecov::RandomStream& rs) {
    Eigen::MatrixXcd m(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            m(i, j) = shapecov::Complex(rs.normal(), rs.normal());
        }
    }
    return m;
}

inline shapecov::HermitianMatrix random_hermitian(int p, shapecov::RandomStream& rs) {
    const Eigen::MatrixXcd m = random_complex_matrix(p, rs);
    return shapecov::HermitianMatrix(0.5 * (m + m.adjoint().eval()));
}

inline shapecov::HermitianMatrix random_pd(int p, shapecov::RandomStream& rs, double ridge = 0.5) {
    const Eigen::MatrixXcd m = random_complex_matrix(p, rs);
    return shapecov::HermitianMatrix(m * m.adjoint() / p +
                                     ridge * Eigen::MatrixXcd::Identity(p, p));
}

inline Eigen::VectorXcd random_unit_vector(int p, shapecov::RandomStream& rs) {
    Eigen::VectorXcd x(p);
    for (int i = 0; i < p; ++i) x[i] = rs.circular_complex_normal();
    return x / x.norm();
}

}  // namespace testutil
