#include "qmrom/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qmrom {

Matrix StructuralModel::stiffness_derivative(const Vector& phi) const {
    return fd_stiffness_derivative(*this, phi);
}

Matrix fd_stiffness_derivative(const StructuralModel& model, const Vector& phi, double rel_step) {
    const double amax = phi.cwiseAbs().maxCoeff();
    if (!(amax > 0.0)) throw InputError("stiffness derivative direction must be nonzero");
    const double h = rel_step * model.displacement_scale() / amax;
    const Vector step = h * phi;
    return (model.tangent_stiffness(step) - model.tangent_stiffness(-step)) / (2.0 * h);
}

// ---------------------------------------------------------------------------

TwoDofModel::TwoDofModel(const TwoDofParams& p) : p_(p) {
    if (!(p.m1 > 0.0 && p.m2 > 0.0 && p.k1 > 0.0 && p.k2 > 0.0)) {
        throw InputError("two_dof: masses and stiffnesses must be positive");
    }
    mass_ = Eigen::Vector2d(p.m1, p.m2).asDiagonal();
    damping_ = Eigen::Vector2d(p.c1, p.c2).asDiagonal();
    k0_ = Eigen::Vector2d(p.k1, p.k2).asDiagonal();
}

Vector TwoDofModel::internal_force(const Vector& u) const {
    const double w = u(0), v = u(1);
    Vector f(2);
    f << p_.k1 * w + p_.a * v * w + p_.b * w * w * w,
         p_.k2 * v + p_.c * w * w;
    return f;
}

Matrix TwoDofModel::tangent_stiffness(const Vector& u) const {
    const double w = u(0), v = u(1);
    Matrix K(2, 2);
    // Exact Jacobian; includes the a*v term in (0, 0).
    K << p_.k1 + 3.0 * p_.b * w * w + p_.a * v, p_.a * w,
         2.0 * p_.c * w,                        p_.k2;
    return K;
}

Matrix TwoDofModel::stiffness_derivative(const Vector& phi) const {
    Matrix D(2, 2);
    D << p_.a * phi(1),       p_.a * phi(0),
         2.0 * p_.c * phi(0), 0.0;
    return D;
}

ModelPtr two_dof_model(const TwoDofParams& p) { return std::make_shared<TwoDofModel>(p); }

// ---------------------------------------------------------------------------

DampedModel::DampedModel(ModelPtr base, Matrix damping)
    : base_(std::move(base)), damping_(std::move(damping)) {
    if (damping_.rows() != base_->dofs() || damping_.cols() != base_->dofs()) {
        throw InputError("damping matrix size does not match the model");
    }
}

LinearizedModel::LinearizedModel(ModelPtr base) : base_(std::move(base)) {}

LinearModel::LinearModel(Matrix M, Matrix C, Matrix K)
    : mass_(std::move(M)), damping_(std::move(C)), k_(std::move(K)) {
    const Index n = mass_.rows();
    if (mass_.cols() != n || damping_.rows() != n || damping_.cols() != n || k_.rows() != n ||
        k_.cols() != n) {
        throw InputError("LinearModel: matrix sizes differ");
    }
}

// ---------------------------------------------------------------------------

RayleighCoefficients rayleigh_coefficients(double zeta, double omega1, double omega2) {
    if (!(omega1 > 0.0 && omega2 > 0.0)) throw InputError("rayleigh: frequencies must be positive");
    if (omega1 == omega2) throw InputError("rayleigh: the two frequencies must differ");
    if (zeta < 0.0) throw InputError("rayleigh: damping ratio must be nonnegative");
    const double sum = omega1 + omega2;
    return {2.0 * zeta * omega1 * omega2 / sum, 2.0 * zeta / sum};
}

Matrix rayleigh_damping(const Matrix& M, const Matrix& K, double zeta, double omega1,
                        double omega2) {
    const auto rc = rayleigh_coefficients(zeta, omega1, omega2);
    Matrix C = rc.alpha * M + rc.beta * K;
    return 0.5 * (C + C.transpose());
}

double load_amplitude(const LoadCase& load, double t) {
    if (t < 0.0) throw InputError("load_amplitude: negative time");
    switch (load.kind) {
        case LoadKind::quasi_periodic:
            return load.amplitude *
                   (std::sin(load.omega * t) + std::sin(std::numbers::pi * load.omega * t));
        case LoadKind::pulse: {
            if (t > std::numbers::pi / load.omega) return 0.0;
            const double s = std::sin(load.omega * t);
            return load.amplitude * s * s;
        }
        case LoadKind::custom_samples: {
            if (load.samples.empty()) return 0.0;
            const double x = t / load.sample_dt;
            const auto k = static_cast<std::size_t>(std::floor(x));
            if (k + 1 >= load.samples.size()) {
                return k + 1 == load.samples.size() && x == static_cast<double>(k)
                           ? load.amplitude * load.samples.back()
                           : 0.0;
            }
            const double frac = x - static_cast<double>(k);
            return load.amplitude * ((1.0 - frac) * load.samples[k] + frac * load.samples[k + 1]);
        }
    }
    return 0.0;
}

Vector assemble_load(const LoadCase& load, double t) { return load_amplitude(load, t) * load.spatial; }

void validate(const LoadCase& load, Index dofs) {
    if (load.spatial.size() != dofs) {
        std::ostringstream os;
        os << "load vector has " << load.spatial.size() << " entries, model has " << dofs << " DOFs";
        throw InputError(os.str());
    }
    if (!(load.spatial.norm() > 0.0)) throw InputError("load spatial vector must be nonzero");
    if (load.kind == LoadKind::custom_samples) {
        if (!(load.sample_dt > 0.0)) throw InputError("custom load needs a positive sample_dt");
    } else if (!(load.omega > 0.0)) {
        throw InputError("load frequency must be positive");
    }
}

}  // namespace qmrom
