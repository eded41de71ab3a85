#ifndef QMROM_MODAL_HPP
#define QMROM_MODAL_HPP

#include "qmrom/algebra.hpp"
#include "qmrom/integrate.hpp"
#include "qmrom/model.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace qmrom {

/// Mass-normalized vibration modes of the system linearized at u = 0.
struct ModalBasis {
    Matrix phi;                  // n x m
    Vector omega_sq;             // rad^2/s^2
    std::vector<Index> indices;  // 0-based position of each mode in the spectrum
    Vector spectrum;             // every eigenvalue of (K(0), M), ascending

    Index size() const { return phi.cols(); }
    Index dofs() const { return phi.rows(); }
    Vector omega() const { return omega_sq.cwiseSqrt(); }
};

/// Lowest m modes.
ModalBasis vibration_modes(const StructuralModel& model, Index m);
/// Selected modes by 0-based spectral index, kept in the given order.
ModalBasis vibration_modes(const StructuralModel& model, const std::vector<Index>& mode_indices);

/// Indices (0-based) of the lowest `count` modes with |phi^T l| above
/// rel_tol * max |phi^T l| among the first `search` modes.
std::vector<Index> load_participating_modes(const StructuralModel& model, const Vector& spatial,
                                            Index count, Index search = 20,
                                            double rel_tol = 1e-6);

enum class DerivativeKind { md, smd };

const char* to_string(DerivativeKind kind);

struct ModalDerivative {
    Vector vector;
    double eigenvalue_sensitivity = 0.0;
};

/// Derivative of mode i along mode j from the bordered system with the
/// mass-normalization constraint. Throws NumericalError when omega_i^2 is
/// repeated.
ModalDerivative modal_derivative(const StructuralModel& model, const ModalBasis& basis, Index i,
                                 Index j);

/// Same, with a precomputed dK/d eta_j.
ModalDerivative modal_derivative(const StructuralModel& model, const ModalBasis& basis, Index i,
                                 const Matrix& dk_j);

/// K(0) theta = -(dK/d eta_j) phi_i with K(0) factorized once.
class StaticDerivativeSolver {
public:
    StaticDerivativeSolver(const StructuralModel& model, const ModalBasis& basis,
                           bool finite_difference = false);

    Vector solve(Index i, Index j) const;
    const Matrix& stiffness_derivative(Index j) const { return dk_.at(j); }

private:
    Matrix phi_;
    Eigen::LLT<Matrix> factor_;
    std::vector<Matrix> dk_;
};

Vector static_modal_derivative(const StructuralModel& model, const ModalBasis& basis, Index i,
                               Index j);

struct ModalDerivativeSet {
    DerivativeKind kind = DerivativeKind::smd;
    Tensor3 tensor;                     // (:, i, j) = d phi_i / d eta_j
    Matrix eigenvalue_sensitivities;    // md kind only, (i, j)

    Index modes() const { return tensor.modes(); }
    /// Admissible (i, j) pairs: all m^2 for md, i <= j for smd.
    std::vector<std::pair<Index, Index>> pairs() const;
    /// max over pairs of ||T_ij - T_ji|| / max(||T_ij||, 1)
    double symmetry_residual() const;
};

struct DerivativeOptions {
    bool finite_difference = false;
    double repeated_tol = 1e-8;
};

/// Every (i, j) derivative of the basis. Both orderings are computed for
/// either kind so that symmetry can be checked.
ModalDerivativeSet modal_derivatives(const StructuralModel& model, const ModalBasis& basis,
                                     DerivativeKind kind, const DerivativeOptions& options = {});

/// Time history of modal amplitudes; eta(k, i) is mode i at times(k).
struct ModalAmplitudeHistory {
    Vector times;
    Matrix eta;

    Index modes() const { return eta.cols(); }
    Index samples() const { return eta.rows(); }
};

struct LinearRunOptions {
    /// Modal damping ratio for every mode. When empty, phi_i^T C phi_i from
    /// the model is used.
    std::optional<double> zeta = 0.004;
    double beta = 0.25;
    double gamma = 0.5;
};

/// Uncoupled modal equations eta_i'' + 2 zeta_i omega_i eta_i' + omega_i^2 eta_i
/// = phi_i^T g(t) from rest.
ModalAmplitudeHistory linear_modal_run(const StructuralModel& model, const ModalBasis& basis,
                                       const LoadCase& load, double t_max, int n_steps,
                                       const LinearRunOptions& options = {});

}  // namespace qmrom

#endif  // QMROM_MODAL_HPP
