#ifndef QMROM_ALGEBRA_HPP
#define QMROM_ALGEBRA_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qmrom {

/// Dense storage is Eigen's default column-major layout throughout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised for malformed input (shapes, parameters, config values).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (singular systems, divergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Third-order array of shape n x m x m.
///
/// The slice (:, i, j) is stored contiguously, so the whole tensor is an
/// n x (m*m) column-major matrix with column index i + j*m.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(Index n, Index m);

    Index rows() const { return n_; }
    Index modes() const { return m_; }

    double& operator()(Index I, Index i, Index j) { return data_(I, i + j * m_); }
    double operator()(Index I, Index i, Index j) const { return data_(I, i + j * m_); }

    auto slice(Index i, Index j) { return data_.col(i + j * m_); }
    auto slice(Index i, Index j) const { return data_.col(i + j * m_); }

    /// Flattened n x (m*m) view.
    const Matrix& flat() const { return data_; }
    Matrix& flat() { return data_; }

    bool is_zero() const { return data_.isZero(0.0); }

private:
    Index n_ = 0;
    Index m_ = 0;
    Matrix data_;
};

struct EigenPairs {
    Vector values;   // omega^2, ascending
    Matrix vectors;  // n x m, mass-normalized
};

/// m smallest eigenpairs of K phi = omega^2 M phi.
///
/// Vectors are mass-normalized and signed so that the entry of largest
/// magnitude is positive. Throws InputError for non-symmetric input and
/// NumericalError when M is not positive definite or the solver fails.
EigenPairs sym_generalized_eig(const Matrix& K, const Matrix& M, Index m,
                               double symmetry_tol = 1e-10);

/// Flip the sign of v so that its largest-magnitude entry is positive.
void fix_sign(Eigen::Ref<Vector> v);

struct BorderedSolution {
    Vector x;
    double lambda = 0.0;
};

/// Solve [[A, -b], [-b^T, 0]] [x; lambda] = [rhs; 0] by dense LU.
BorderedSolution solve_bordered(const Matrix& A, const Vector& b, const Vector& rhs,
                                double rcond_tol = 1e-14);

/// Split into symmetric (Theta) and antisymmetric (Lambda) parts over the
/// last two indices.
std::pair<Tensor3, Tensor3> symmetrize3(const Tensor3& omega);

/// sum_{i,j} T(:, i, j) a_i b_j
Vector contract_t3(const Tensor3& t, const Vector& a, const Vector& b);

/// n x m matrix with column i equal to sum_j T(:, i, j) a_j
Matrix contract_t3_once(const Tensor3& t, const Vector& a);

/// Orthonormal basis for the column space of V.
///
/// Columns are scaled to unit norm first so that the rank decision reflects
/// linear dependence rather than column magnitude; singular values below
/// rel_tol * sigma_max are discarded.
Matrix deflate_basis(const Matrix& V, double rel_tol = 1e-8);

/// Relative asymmetry ||A - A^T||_F / ||A||_F (0 for a zero matrix).
double asymmetry(const Matrix& A);

}  // namespace qmrom

#endif  // QMROM_ALGEBRA_HPP
