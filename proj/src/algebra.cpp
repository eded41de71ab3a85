#include "qmrom/algebra.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace qmrom {

Tensor3::Tensor3(Index n, Index m) : n_(n), m_(m), data_(Matrix::Zero(n, m * m)) {
    if (n <= 0 || m <= 0) {
        throw InputError("Tensor3 dimensions must be positive");
    }
}

double asymmetry(const Matrix& A) {
    const double norm = A.norm();
    if (norm == 0.0) return 0.0;
    return (A - A.transpose()).norm() / norm;
}

void fix_sign(Eigen::Ref<Vector> v) {
    Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    if (v(k) < 0.0) v = -v;
}

EigenPairs sym_generalized_eig(const Matrix& K, const Matrix& M, Index m, double symmetry_tol) {
    const Index n = K.rows();
    if (K.cols() != n || M.rows() != n || M.cols() != n) {
        throw InputError("sym_generalized_eig: K and M must be square and of equal size");
    }
    if (m < 1 || m > n) {
        std::ostringstream os;
        os << "sym_generalized_eig: requested " << m << " modes from a system of size " << n;
        throw InputError(os.str());
    }
    if (asymmetry(K) > symmetry_tol) throw InputError("sym_generalized_eig: K is not symmetric");
    if (asymmetry(M) > symmetry_tol) throw InputError("sym_generalized_eig: M is not symmetric");

    // Symmetrize exactly before handing over; Eigen only reads one triangle.
    const Matrix Ks = 0.5 * (K + K.transpose());
    const Matrix Ms = 0.5 * (M + M.transpose());

    Eigen::LLT<Matrix> llt(Ms);
    if (llt.info() != Eigen::Success) {
        throw InputError("sym_generalized_eig: mass matrix is not positive definite");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(Ks, Ms,
                                                            Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_generalized_eig: eigensolver did not converge");
    }

    EigenPairs out;
    out.values = solver.eigenvalues().head(m);
    out.vectors = solver.eigenvectors().leftCols(m);
    for (Index i = 0; i < m; ++i) {
        auto v = out.vectors.col(i);
        v /= std::sqrt(v.dot(Ms * v));
        fix_sign(v);
    }
    return out;
}

BorderedSolution solve_bordered(const Matrix& A, const Vector& b, const Vector& rhs,
                                double rcond_tol) {
    const Index n = A.rows();
    if (A.cols() != n || b.size() != n || rhs.size() != n) {
        throw InputError("solve_bordered: shape mismatch");
    }
    // Border scaled to the operator magnitude; the constraint row is unchanged
    // and the multiplier is rescaled afterwards.
    const double amax = A.cwiseAbs().maxCoeff();
    const double bmax = b.cwiseAbs().maxCoeff();
    if (!(bmax > 0.0)) throw InputError("solve_bordered: border vector is zero");
    const double scale = amax > 0.0 ? amax / bmax : 1.0 / bmax;

    Matrix B(n + 1, n + 1);
    B.topLeftCorner(n, n) = A;
    B.topRightCorner(n, 1) = -scale * b;
    B.bottomLeftCorner(1, n) = -scale * b.transpose();
    B(n, n) = 0.0;

    Vector r(n + 1);
    r.head(n) = rhs;
    r(n) = 0.0;

    Eigen::PartialPivLU<Matrix> lu(B);
    // rcond alone misses exact zero pivots, so the pivot spread is checked too.
    const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
    if (!(rcond > rcond_tol)) {
        std::ostringstream os;
        os << "solve_bordered: bordered matrix is singular (rcond = " << rcond
           << "); the shifted operator has a null space of dimension > 1";
        throw NumericalError(os.str());
    }
    const Vector sol = lu.solve(r);
    return {sol.head(n), scale * sol(n)};
}

std::pair<Tensor3, Tensor3> symmetrize3(const Tensor3& omega) {
    const Index n = omega.rows();
    const Index m = omega.modes();
    Tensor3 theta(n, m);
    Tensor3 lambda(n, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) {
            theta.slice(i, j) = 0.5 * (omega.slice(i, j) + omega.slice(j, i));
            lambda.slice(i, j) = omega.slice(i, j) - theta.slice(i, j);
        }
    }
    return {std::move(theta), std::move(lambda)};
}

Vector contract_t3(const Tensor3& t, const Vector& a, const Vector& b) {
    const Index m = t.modes();
    if (a.size() != m || b.size() != m) throw InputError("contract_t3: shape mismatch");
    Vector out = Vector::Zero(t.rows());
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) {
            const double w = a(i) * b(j);
            if (w != 0.0) out.noalias() += w * t.slice(i, j);
        }
    }
    return out;
}

Matrix contract_t3_once(const Tensor3& t, const Vector& a) {
    const Index m = t.modes();
    if (a.size() != m) throw InputError("contract_t3_once: shape mismatch");
    Matrix out = Matrix::Zero(t.rows(), m);
    for (Index j = 0; j < m; ++j) {
        if (a(j) == 0.0) continue;
        for (Index i = 0; i < m; ++i) out.col(i).noalias() += a(j) * t.slice(i, j);
    }
    return out;
}

Matrix deflate_basis(const Matrix& V, double rel_tol) {
    if (V.cols() < 1 || V.rows() < 1) throw InputError("deflate_basis: empty input");
    Matrix scaled(V.rows(), V.cols());
    Index kept = 0;
    for (Index c = 0; c < V.cols(); ++c) {
        const double norm = V.col(c).norm();
        if (norm > 0.0) scaled.col(kept++) = V.col(c) / norm;
    }
    if (kept == 0) throw InputError("deflate_basis: all columns are zero");
    scaled.conservativeResize(Eigen::NoChange, kept);

    Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
    const Vector& sigma = svd.singularValues();
    Index rank = 0;
    while (rank < sigma.size() && sigma(rank) >= rel_tol * sigma(0)) ++rank;
    Matrix U = svd.matrixU().leftCols(rank);
    for (Index c = 0; c < rank; ++c) fix_sign(U.col(c));
    return U;
}

}  // namespace qmrom
