#include "qmrom/modal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmrom {

namespace {

ModalBasis make_basis(const EigenPairs& all, const std::vector<Index>& indices) {
    ModalBasis basis;
    const Index m = static_cast<Index>(indices.size());
    basis.phi.resize(all.vectors.rows(), m);
    basis.omega_sq.resize(m);
    for (Index c = 0; c < m; ++c) {
        const Index k = indices[c];
        basis.phi.col(c) = all.vectors.col(k);
        basis.omega_sq(c) = all.values(k);
    }
    basis.indices = indices;
    basis.spectrum = all.values;
    return basis;
}

void check_simple(const ModalBasis& basis, Index i, double tol) {
    const Index k = basis.indices.at(i);
    const double w2 = basis.spectrum(k);
    for (Index nb : {k - 1, k + 1}) {
        if (nb < 0 || nb >= basis.spectrum.size()) continue;
        if (std::abs(basis.spectrum(nb) - w2) < tol * std::abs(w2)) {
            std::ostringstream os;
            os << "modal derivative undefined: eigenvalue omega^2 = " << w2 << " of mode " << k + 1
               << " has multiplicity >= 2";
            throw NumericalError(os.str());
        }
    }
}

}  // namespace

ModalBasis vibration_modes(const StructuralModel& model, Index m) {
    if (m < 1 || m > model.dofs()) {
        std::ostringstream os;
        os << "requested " << m << " modes but the model has " << model.dofs() << " free DOFs";
        throw InputError(os.str());
    }
    std::vector<Index> idx(m);
    for (Index k = 0; k < m; ++k) idx[k] = k;
    return vibration_modes(model, idx);
}

ModalBasis vibration_modes(const StructuralModel& model, const std::vector<Index>& mode_indices) {
    const Index n = model.dofs();
    if (mode_indices.empty()) throw InputError("no modes requested");
    for (Index k : mode_indices) {
        if (k < 0 || k >= n) {
            std::ostringstream os;
            os << "mode index " << k + 1 << " exceeds the free DOF count " << n;
            throw InputError(os.str());
        }
    }
    const EigenPairs all = sym_generalized_eig(model.linear_stiffness(), model.mass(), n);
    return make_basis(all, mode_indices);
}

std::vector<Index> load_participating_modes(const StructuralModel& model, const Vector& spatial,
                                            Index count, Index search, double rel_tol) {
    search = std::min(search, model.dofs());
    const EigenPairs pairs = sym_generalized_eig(model.linear_stiffness(), model.mass(), search);
    const Vector participation = (pairs.vectors.transpose() * spatial).cwiseAbs();
    const double pmax = participation.maxCoeff();
    std::vector<Index> out;
    for (Index k = 0; k < search && static_cast<Index>(out.size()) < count; ++k) {
        if (participation(k) > rel_tol * pmax) out.push_back(k);
    }
    if (static_cast<Index>(out.size()) < count) {
        throw InputError("not enough load-participating modes in the searched range");
    }
    return out;
}

const char* to_string(DerivativeKind kind) { return kind == DerivativeKind::md ? "MD" : "SMD"; }

ModalDerivative modal_derivative(const StructuralModel& model, const ModalBasis& basis, Index i,
                                 Index j) {
    return modal_derivative(model, basis, i, model.stiffness_derivative(basis.phi.col(j)));
}

ModalDerivative modal_derivative(const StructuralModel& model, const ModalBasis& basis, Index i,
                                 const Matrix& dk_j) {
    if (i < 0 || i >= basis.size()) throw InputError("modal_derivative: mode index out of range");
    check_simple(basis, i, 1e-8);
    const Vector phi = basis.phi.col(i);
    const Matrix A = model.linear_stiffness() - basis.omega_sq(i) * model.mass();
    const Vector b = model.mass() * phi;
    try {
        const auto sol = solve_bordered(A, b, -(dk_j * phi));
        return {sol.x, sol.lambda};
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << "modal derivative of mode " << basis.indices[i] + 1 << ": " << e.what()
           << " (eigenvalue multiplicity > 1)";
        throw NumericalError(os.str());
    }
}

StaticDerivativeSolver::StaticDerivativeSolver(const StructuralModel& model,
                                               const ModalBasis& basis, bool finite_difference)
    : phi_(basis.phi), factor_(model.linear_stiffness()) {
    if (factor_.info() != Eigen::Success) {
        throw NumericalError("static modal derivative: K(0) is singular");
    }
    dk_.reserve(basis.size());
    for (Index j = 0; j < basis.size(); ++j) {
        const Vector dir = basis.phi.col(j);
        dk_.push_back(finite_difference ? fd_stiffness_derivative(model, dir)
                                        : model.stiffness_derivative(dir));
    }
}

Vector StaticDerivativeSolver::solve(Index i, Index j) const {
    if (i < 0 || j < 0 || i >= phi_.cols() || j >= phi_.cols()) {
        throw InputError("static modal derivative: mode index out of range");
    }
    return factor_.solve(-(dk_[j] * phi_.col(i)));
}

Vector static_modal_derivative(const StructuralModel& model, const ModalBasis& basis, Index i,
                               Index j) {
    return StaticDerivativeSolver(model, basis).solve(i, j);
}

std::vector<std::pair<Index, Index>> ModalDerivativeSet::pairs() const {
    std::vector<std::pair<Index, Index>> out;
    const Index m = modes();
    for (Index i = 0; i < m; ++i) {
        for (Index j = kind == DerivativeKind::smd ? i : 0; j < m; ++j) out.emplace_back(i, j);
    }
    return out;
}

double ModalDerivativeSet::symmetry_residual() const {
    double worst = 0.0;
    const Index m = modes();
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            const double diff = (tensor.slice(i, j) - tensor.slice(j, i)).norm();
            worst = std::max(worst, diff / std::max(tensor.slice(i, j).norm(), 1.0));
        }
    }
    return worst;
}

ModalDerivativeSet modal_derivatives(const StructuralModel& model, const ModalBasis& basis,
                                     DerivativeKind kind, const DerivativeOptions& options) {
    const Index m = basis.size();
    ModalDerivativeSet set;
    set.kind = kind;
    set.tensor = Tensor3(basis.dofs(), m);
    StaticDerivativeSolver solver(model, basis, options.finite_difference);
    if (kind == DerivativeKind::smd) {
        for (Index j = 0; j < m; ++j)
            for (Index i = 0; i < m; ++i) set.tensor.slice(i, j) = solver.solve(i, j);
        return set;
    }
    for (Index i = 0; i < m; ++i) check_simple(basis, i, options.repeated_tol);
    set.eigenvalue_sensitivities = Matrix::Zero(m, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < m; ++i) {
            const auto md = modal_derivative(model, basis, i, solver.stiffness_derivative(j));
            set.tensor.slice(i, j) = md.vector;
            set.eigenvalue_sensitivities(i, j) = md.eigenvalue_sensitivity;
        }
    }
    return set;
}

ModalAmplitudeHistory linear_modal_run(const StructuralModel& model, const ModalBasis& basis,
                                       const LoadCase& load, double t_max, int n_steps,
                                       const LinearRunOptions& options) {
    validate(load, model.dofs());
    IntegratorParams params = IntegratorParams::uniform(t_max, n_steps);
    params.beta = options.beta;
    params.gamma = options.gamma;

    ModalAmplitudeHistory hist;
    hist.eta.resize(n_steps + 1, basis.size());
    for (Index i = 0; i < basis.size(); ++i) {
        const Vector phi = basis.phi.col(i);
        const double omega = std::sqrt(basis.omega_sq(i));
        const double damping = options.zeta ? 2.0 * *options.zeta * omega
                                            : phi.dot(model.damping() * phi);
        const double participation = phi.dot(load.spatial);
        auto forcing = [&](double t) { return participation * load_amplitude(load, t); };
        const NewmarkResult res = newmark_sdof(1.0, damping, basis.omega_sq(i), forcing, params);
        hist.eta.col(i) = res.q.row(0).transpose();
        if (i == 0) hist.times = res.times;
    }
    return hist;
}

}  // namespace qmrom
