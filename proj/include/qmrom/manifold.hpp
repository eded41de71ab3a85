#ifndef QMROM_MANIFOLD_HPP
#define QMROM_MANIFOLD_HPP

#include "qmrom/algebra.hpp"
#include "qmrom/modal.hpp"
#include "qmrom/model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qmrom {

enum class BasisSource { vm, md, smd, pod };

struct BasisColumn {
    BasisSource source;
    Index i = 0;
    Index j = 0;

    std::string label() const;
};

/// Reduction subspace u = V q.
struct LinearManifold {
    Matrix V;                              // n x M_b
    std::vector<BasisColumn> provenance;   // candidate columns before deflation
    Index candidates = 0;                  // unknown count before deflation

    Index size() const { return V.cols(); }

    /// V used as given, without deflation.
    static LinearManifold raw(Matrix V);
};

/// VMs only, deflated.
LinearManifold build_linear_manifold(const ModalBasis& basis, double rel_tol = 1e-8);

/// VMs followed by the selected derivatives, deflated. An empty selection
/// means every admissible pair of the set.
LinearManifold build_linear_manifold(const ModalBasis& basis, const ModalDerivativeSet& derivs,
                                     const std::vector<std::pair<Index, Index>>& selection = {},
                                     double rel_tol = 1e-8);

/// Gamma(q) = Phi q + (Theta . q) . q / 2
struct QuadraticManifold {
    Matrix phi;                   // n x m
    Tensor3 theta;                // symmetric part of omega
    std::optional<Tensor3> omega; // raw derivative tensor, kept for checks
    DerivativeKind kind = DerivativeKind::smd;

    Index size() const { return phi.cols(); }
    Index dofs() const { return phi.rows(); }

    static QuadraticManifold from_theta(Matrix phi, Tensor3 theta);
};

QuadraticManifold build_quadratic_manifold(const ModalBasis& basis,
                                           const ModalDerivativeSet& derivs);

Vector qm_map(const QuadraticManifold& qm, const Vector& q);

/// Same mapping evaluated with the raw (unsymmetrized) tensor.
Vector qm_map_raw(const QuadraticManifold& qm, const Vector& q);

/// P(q) = Phi + Theta . q
Matrix qm_tangent(const QuadraticManifold& qm, const Vector& q);

struct Kinematics {
    Vector u, v, a;
};

/// u = Gamma(q), u' = P q', u'' = P q'' + (Theta . q') . q'
Kinematics qm_kinematics(const QuadraticManifold& qm, const Vector& q, const Vector& qd,
                         const Vector& qdd);

// ---------------------------------------------------------------------------
// Derivative selection

enum class SelectionTechnique { mmi, mvw };

const char* to_string(SelectionTechnique technique);

struct WeightMatrix {
    Matrix W;
    SelectionTechnique technique = SelectionTechnique::mmi;
};

/// W_ij = integral of |eta_i eta_j| over the run (trapezoidal rule).
WeightMatrix mmi_weights(const ModalAmplitudeHistory& hist);

/// W_ij = |phi_j^T f(eta_i(t_i^max) phi_i)|, t_i^max = argmax_t |eta_i(t)|.
WeightMatrix mvw_weights(const ModalAmplitudeHistory& hist, const StructuralModel& model,
                         const ModalBasis& basis);

struct RankedPair {
    Index i = 0;
    Index j = 0;
    double weight = 0.0;  // normalized to the largest admissible weight
};

/// k largest admissible weights; MMI ranks the upper triangle (i <= j),
/// MVW the full matrix. Ties go to the lexicographically smaller pair.
std::vector<RankedPair> select_top_k(const WeightMatrix& W, Index k);

/// Every admissible pair, ranked.
std::vector<RankedPair> rank_all(const WeightMatrix& W);

// ---------------------------------------------------------------------------
// POD

struct PodOptions {
    /// Use the M inner product (V^T M V = I) instead of the Euclidean one.
    const Matrix* mass = nullptr;
    double rank_tol = 1e-12;
};

/// k leading left singular vectors of the snapshot matrix (n x s).
LinearManifold pod_basis(const Matrix& snapshots, Index k, const PodOptions& options = {});

/// Singular values of the snapshot matrix (Euclidean).
Vector pod_singular_values(const Matrix& snapshots);

}  // namespace qmrom

#endif  // QMROM_MANIFOLD_HPP
