#ifndef QMROM_TESTS_SUPPORT_HPP
#define QMROM_TESTS_SUPPORT_HPP

#include "qmrom/harness.hpp"

#include <random>

namespace qmrom::test {

inline BeamModelSpec beam_spec(int elements = 24) {
    BeamModelSpec s;
    s.n_elements = elements;
    return s;
}

inline Matrix random_matrix(std::mt19937& rng, Index r, Index c) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix A(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) A(i, j) = d(rng);
    return A;
}

inline Vector random_vector(std::mt19937& rng, Index n, double scale = 1.0) {
    return scale * random_matrix(rng, n, 1).col(0);
}

inline Matrix random_spd(std::mt19937& rng, Index n) {
    const Matrix A = random_matrix(rng, n, n);
    return A * A.transpose() + n * Matrix::Identity(n, n);
}

inline double rel_err(const Vector& a, const Vector& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// 2-DOF parameters with the transverse mode lowest (k1/m1 < k2/m2).
inline TwoDofParams random_two_dof(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    TwoDofParams p;
    p.m1 = u(rng);
    p.m2 = u(rng);
    p.k1 = u(rng);
    p.k2 = (p.k1 / p.m1) * p.m2 * (3.0 + u(rng));
    p.c1 = 0.1 * u(rng);
    p.c2 = 0.1 * u(rng);
    p.a = u(rng);
    p.b = u(rng);
    p.c = u(rng);
    return p;
}

}  // namespace qmrom::test

#endif
