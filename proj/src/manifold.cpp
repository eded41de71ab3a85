#include "qmrom/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmrom {

std::string BasisColumn::label() const {
    std::ostringstream os;
    switch (source) {
        case BasisSource::vm: os << "VM" << i + 1; break;
        case BasisSource::md: os << "MD(" << i + 1 << "," << j + 1 << ")"; break;
        case BasisSource::smd: os << "SMD(" << i + 1 << "," << j + 1 << ")"; break;
        case BasisSource::pod: os << "POD" << i + 1; break;
    }
    return os.str();
}

LinearManifold LinearManifold::raw(Matrix V) {
    LinearManifold lm;
    lm.candidates = V.cols();
    lm.V = std::move(V);
    return lm;
}

LinearManifold build_linear_manifold(const ModalBasis& basis, double rel_tol) {
    LinearManifold lm;
    for (Index i = 0; i < basis.size(); ++i) lm.provenance.push_back({BasisSource::vm, i, i});
    lm.candidates = basis.size();
    lm.V = deflate_basis(basis.phi, rel_tol);
    return lm;
}

LinearManifold build_linear_manifold(const ModalBasis& basis, const ModalDerivativeSet& derivs,
                                     const std::vector<std::pair<Index, Index>>& selection,
                                     double rel_tol) {
    const Index m = basis.size();
    if (derivs.modes() != m) throw InputError("derivative set does not match the modal basis");
    const auto pairs = selection.empty() ? derivs.pairs() : selection;
    for (const auto& [i, j] : pairs) {
        if (i < 0 || j < 0 || i >= m || j >= m) throw InputError("selected pair out of range");
        if (derivs.kind == DerivativeKind::smd && i > j) {
            throw InputError("SMD selection must use pairs with i <= j");
        }
    }

    LinearManifold lm;
    Matrix candidates(basis.dofs(), m + static_cast<Index>(pairs.size()));
    candidates.leftCols(m) = basis.phi;
    for (Index i = 0; i < m; ++i) lm.provenance.push_back({BasisSource::vm, i, i});
    const BasisSource src = derivs.kind == DerivativeKind::md ? BasisSource::md : BasisSource::smd;
    Index c = m;
    for (const auto& [i, j] : pairs) {
        candidates.col(c++) = derivs.tensor.slice(i, j);
        lm.provenance.push_back({src, i, j});
    }
    lm.candidates = candidates.cols();
    lm.V = deflate_basis(candidates, rel_tol);
    return lm;
}

QuadraticManifold QuadraticManifold::from_theta(Matrix phi, Tensor3 theta) {
    if (theta.rows() != phi.rows() || theta.modes() != phi.cols()) {
        throw InputError("quadratic manifold: tensor shape does not match the basis");
    }
    QuadraticManifold qm;
    qm.phi = std::move(phi);
    qm.theta = std::move(theta);
    return qm;
}

QuadraticManifold build_quadratic_manifold(const ModalBasis& basis,
                                           const ModalDerivativeSet& derivs) {
    if (derivs.modes() != basis.size() || derivs.tensor.rows() != basis.dofs()) {
        throw InputError("quadratic manifold: derivative set does not cover every (i, j) pair");
    }
    QuadraticManifold qm;
    qm.phi = basis.phi;
    qm.kind = derivs.kind;
    auto [theta, lambda] = symmetrize3(derivs.tensor);
    qm.theta = std::move(theta);
    qm.omega = derivs.tensor;
    return qm;
}

Vector qm_map(const QuadraticManifold& qm, const Vector& q) {
    return qm.phi * q + 0.5 * contract_t3(qm.theta, q, q);
}

Vector qm_map_raw(const QuadraticManifold& qm, const Vector& q) {
    if (!qm.omega) return qm_map(qm, q);
    return qm.phi * q + 0.5 * contract_t3(*qm.omega, q, q);
}

Matrix qm_tangent(const QuadraticManifold& qm, const Vector& q) {
    return qm.phi + contract_t3_once(qm.theta, q);
}

Kinematics qm_kinematics(const QuadraticManifold& qm, const Vector& q, const Vector& qd,
                         const Vector& qdd) {
    const Matrix P = qm_tangent(qm, q);
    return {qm_map(qm, q), P * qd, P * qdd + contract_t3(qm.theta, qd, qd)};
}

// ---------------------------------------------------------------------------

const char* to_string(SelectionTechnique technique) {
    return technique == SelectionTechnique::mmi ? "MMI" : "MVW";
}

WeightMatrix mmi_weights(const ModalAmplitudeHistory& hist) {
    const Index s = hist.samples();
    if (s < 2) throw InputError("mmi_weights: history needs at least two samples");
    const Index m = hist.modes();
    const double h = (hist.times(s - 1) - hist.times(0)) / static_cast<double>(s - 1);
    Matrix W = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = i; j < m; ++j) {
            const Vector prod = (hist.eta.col(i).array() * hist.eta.col(j).array()).abs().matrix();
            const double integral = h * (prod.sum() - 0.5 * (prod(0) + prod(s - 1)));
            W(i, j) = W(j, i) = integral;
        }
    }
    return {W, SelectionTechnique::mmi};
}

WeightMatrix mvw_weights(const ModalAmplitudeHistory& hist, const StructuralModel& model,
                         const ModalBasis& basis) {
    if (hist.samples() < 1) throw InputError("mvw_weights: empty history");
    const Index m = basis.size();
    if (hist.modes() != m) throw InputError("mvw_weights: history does not match the basis");
    Matrix W = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        Index kmax = 0;
        hist.eta.col(i).cwiseAbs().maxCoeff(&kmax);
        const double amp = hist.eta(kmax, i);
        const Vector f = model.internal_force(amp * basis.phi.col(i));
        W.row(i) = (basis.phi.transpose() * f).cwiseAbs().transpose();
    }
    return {W, SelectionTechnique::mvw};
}

std::vector<RankedPair> rank_all(const WeightMatrix& W) {
    const Index m = W.W.rows();
    std::vector<RankedPair> pairs;
    for (Index i = 0; i < m; ++i) {
        for (Index j = W.technique == SelectionTechnique::mmi ? i : 0; j < m; ++j) {
            pairs.push_back({i, j, W.W(i, j)});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const RankedPair& x, const RankedPair& y) { return x.weight > y.weight; });
    const double top = pairs.empty() ? 0.0 : pairs.front().weight;
    if (top > 0.0) {
        for (auto& p : pairs) p.weight /= top;
    }
    return pairs;
}

std::vector<RankedPair> select_top_k(const WeightMatrix& W, Index k) {
    auto pairs = rank_all(W);
    if (k < 0 || k > static_cast<Index>(pairs.size())) {
        std::ostringstream os;
        os << "select_top_k: k = " << k << " exceeds the " << pairs.size() << " admissible pairs";
        throw InputError(os.str());
    }
    pairs.resize(k);
    return pairs;
}

// ---------------------------------------------------------------------------

Vector pod_singular_values(const Matrix& snapshots) {
    Eigen::JacobiSVD<Matrix> svd(snapshots);
    return svd.singularValues();
}

LinearManifold pod_basis(const Matrix& snapshots, Index k, const PodOptions& options) {
    if (k < 1 || k > snapshots.cols()) throw InputError("pod_basis: need 1 <= k <= snapshot count");
    Matrix X = snapshots;
    std::optional<Eigen::LLT<Matrix>> llt;
    if (options.mass) {
        llt.emplace(*options.mass);
        if (llt->info() != Eigen::Success) throw NumericalError("pod_basis: mass not SPD");
        X = llt->matrixU() * snapshots;
    }
    Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU);
    const Vector& sigma = svd.singularValues();
    Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > options.rank_tol * sigma(0)) ++rank;
    if (k > rank) {
        std::ostringstream os;
        os << "pod_basis: requested " << k << " vectors but the snapshots have rank " << rank;
        throw InputError(os.str());
    }
    Matrix U = svd.matrixU().leftCols(k);
    if (llt) U = llt->matrixU().solve(U);
    LinearManifold lm;
    for (Index c = 0; c < k; ++c) {
        fix_sign(U.col(c));
        lm.provenance.push_back({BasisSource::pod, c, c});
    }
    lm.V = std::move(U);
    lm.candidates = k;
    return lm;
}

}  // namespace qmrom
