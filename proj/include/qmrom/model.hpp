#ifndef QMROM_MODEL_HPP
#define QMROM_MODEL_HPP

#include "qmrom/algebra.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace qmrom {

/// Second-order structural system M u'' + C u' + f(u) = g(t) on free DOFs.
///
/// Implementations are immutable after construction and every method is
/// reentrant. The equilibrium point is u = 0 with f(0) = 0.
class StructuralModel {
public:
    virtual ~StructuralModel() = default;

    virtual Index dofs() const = 0;
    virtual const Matrix& mass() const = 0;
    virtual const Matrix& damping() const = 0;
    virtual Vector internal_force(const Vector& u) const = 0;
    virtual Matrix tangent_stiffness(const Vector& u) const = 0;

    /// K(0), assembled once.
    virtual const Matrix& linear_stiffness() const = 0;

    /// d K(u = eta * phi) / d eta at eta = 0. The default falls back to
    /// central differences of tangent_stiffness.
    virtual Matrix stiffness_derivative(const Vector& phi) const;

    /// Characteristic displacement magnitude, used to size FD steps.
    virtual double displacement_scale() const { return 1.0; }

    virtual std::string dof_label(Index dof) const { return std::to_string(dof); }
};

using ModelPtr = std::shared_ptr<const StructuralModel>;

/// Central-difference estimate (K(h phi) - K(-h phi)) / 2h with
/// h = rel_step * scale / ||phi||_inf.
Matrix fd_stiffness_derivative(const StructuralModel& model, const Vector& phi,
                               double rel_step = 1e-5);

/// Analytic route when the model provides one.
inline Matrix stiffness_directional_derivative(const StructuralModel& model, const Vector& phi) {
    return model.stiffness_derivative(phi);
}

// ---------------------------------------------------------------------------
// 2-DOF oscillator
//   m1 w'' + c1 w' + k1 w + a v w + b w^3 = g(t)
//   m2 v'' + c2 v' + k2 v + c w^2        = 0

struct TwoDofParams {
    double m1 = 1.0, m2 = 1.0;
    double c1 = 0.0, c2 = 0.0;
    double k1 = 1.0, k2 = 1.0;
    double a = 0.0, b = 0.0, c = 0.0;
};

class TwoDofModel final : public StructuralModel {
public:
    explicit TwoDofModel(const TwoDofParams& p);

    Index dofs() const override { return 2; }
    const Matrix& mass() const override { return mass_; }
    const Matrix& damping() const override { return damping_; }
    const Matrix& linear_stiffness() const override { return k0_; }
    Vector internal_force(const Vector& u) const override;
    Matrix tangent_stiffness(const Vector& u) const override;
    Matrix stiffness_derivative(const Vector& phi) const override;
    std::string dof_label(Index dof) const override { return dof == 0 ? "w" : "v"; }

    const TwoDofParams& params() const { return p_; }

private:
    TwoDofParams p_;
    Matrix mass_, damping_, k0_;
};

ModelPtr two_dof_model(const TwoDofParams& p);

// ---------------------------------------------------------------------------
// von Karman beam

enum class BeamDof { axial = 0, transverse = 1, rotation = 2 };

struct BeamModelSpec {
    int n_elements = 20;
    double length = 0.04;           // m
    double width = 0.02;            // m
    double thickness = 0.8e-3;      // m
    double young_modulus = 70e9;    // Pa
    double poisson_ratio = 0.33;
    double density = 2700.0;        // kg/m^3
    /// fixed[node][dof]; empty means simply supported at both ends.
    std::vector<std::array<bool, 3>> fixed;
};

/// u = w = 0 at both end nodes, rotations free.
std::vector<std::array<bool, 3>> simply_supported(int n_nodes);
/// All DOFs fixed at both end nodes.
std::vector<std::array<bool, 3>> clamped_clamped(int n_nodes);
/// All DOFs fixed at node 0.
std::vector<std::array<bool, 3>> cantilever(int n_nodes);

/// Two-node beam elements with linear axial and cubic Hermite transverse
/// interpolation and the moderate-rotation strain eps = u' + (w')^2 / 2.
/// Element energy is integrated with 2-point Gauss quadrature; the mass
/// matrix is the exact consistent one (no rotary inertia).
class VonKarmanBeam final : public StructuralModel {
public:
    explicit VonKarmanBeam(BeamModelSpec spec);

    Index dofs() const override { return static_cast<Index>(free_to_global_.size()); }
    const Matrix& mass() const override { return mass_; }
    const Matrix& damping() const override { return damping_; }
    const Matrix& linear_stiffness() const override { return k0_; }
    Vector internal_force(const Vector& u) const override;
    Matrix tangent_stiffness(const Vector& u) const override;
    Matrix stiffness_derivative(const Vector& phi) const override;
    double displacement_scale() const override { return spec_.thickness; }
    std::string dof_label(Index dof) const override;

    const BeamModelSpec& spec() const { return spec_; }
    int nodes() const { return spec_.n_elements + 1; }

    /// Free DOF index, or -1 when constrained.
    Index free_dof(int node, BeamDof dof) const;

    /// Consistent nodal loads of a uniform transverse pressure acting on the
    /// full width (N per Pa).
    Vector uniform_transverse_load(double pressure = 1.0) const;
    /// Unit transverse point loads at the given nodes.
    Vector point_transverse_load(const std::vector<int>& nodes) const;

private:
    using Local = Eigen::Matrix<double, 6, 1>;
    using LocalMatrix = Eigen::Matrix<double, 6, 6>;

    Local gather(const Vector& u, int element) const;
    template <typename LocalT>
    void scatter(Vector& global, const LocalT& local, int element) const;
    void scatter(Matrix& global, const LocalMatrix& local, int element) const;

    BeamModelSpec spec_;
    std::vector<Index> global_to_free_;
    std::vector<Index> free_to_global_;
    double element_length_ = 0.0;
    double ea_ = 0.0, ei_ = 0.0;
    // Per Gauss point: weight * length, axial B, slope G, curvature B.
    struct GaussData {
        double wl;
        Local bu, g, bb;
    };
    std::array<GaussData, 2> gauss_{};
    Matrix mass_, damping_, k0_;
};

std::shared_ptr<const VonKarmanBeam> von_karman_beam(const BeamModelSpec& spec);

// ---------------------------------------------------------------------------
// Wrappers

/// Same model with its damping matrix replaced.
class DampedModel final : public StructuralModel {
public:
    DampedModel(ModelPtr base, Matrix damping);

    Index dofs() const override { return base_->dofs(); }
    const Matrix& mass() const override { return base_->mass(); }
    const Matrix& damping() const override { return damping_; }
    const Matrix& linear_stiffness() const override { return base_->linear_stiffness(); }
    Vector internal_force(const Vector& u) const override { return base_->internal_force(u); }
    Matrix tangent_stiffness(const Vector& u) const override { return base_->tangent_stiffness(u); }
    Matrix stiffness_derivative(const Vector& phi) const override {
        return base_->stiffness_derivative(phi);
    }
    double displacement_scale() const override { return base_->displacement_scale(); }
    std::string dof_label(Index dof) const override { return base_->dof_label(dof); }

    const ModelPtr& base() const { return base_; }

private:
    ModelPtr base_;
    Matrix damping_;
};

/// f(u) = K(0) u.
class LinearizedModel final : public StructuralModel {
public:
    explicit LinearizedModel(ModelPtr base);

    Index dofs() const override { return base_->dofs(); }
    const Matrix& mass() const override { return base_->mass(); }
    const Matrix& damping() const override { return base_->damping(); }
    const Matrix& linear_stiffness() const override { return base_->linear_stiffness(); }
    Vector internal_force(const Vector& u) const override { return linear_stiffness() * u; }
    Matrix tangent_stiffness(const Vector&) const override { return linear_stiffness(); }
    Matrix stiffness_derivative(const Vector&) const override {
        return Matrix::Zero(dofs(), dofs());
    }
    double displacement_scale() const override { return base_->displacement_scale(); }
    std::string dof_label(Index dof) const override { return base_->dof_label(dof); }

private:
    ModelPtr base_;
};

/// Linear system from explicit matrices (f = K u).
class LinearModel final : public StructuralModel {
public:
    LinearModel(Matrix M, Matrix C, Matrix K);

    Index dofs() const override { return mass_.rows(); }
    const Matrix& mass() const override { return mass_; }
    const Matrix& damping() const override { return damping_; }
    const Matrix& linear_stiffness() const override { return k_; }
    Vector internal_force(const Vector& u) const override { return k_ * u; }
    Matrix tangent_stiffness(const Vector&) const override { return k_; }
    Matrix stiffness_derivative(const Vector&) const override {
        return Matrix::Zero(dofs(), dofs());
    }

private:
    Matrix mass_, damping_, k_;
};

// ---------------------------------------------------------------------------
// Damping and loads

struct RayleighCoefficients {
    double alpha = 0.0;  // mass-proportional
    double beta = 0.0;   // stiffness-proportional
};

/// alpha, beta such that zeta = (alpha / omega + beta * omega) / 2 holds at
/// both omega1 and omega2.
RayleighCoefficients rayleigh_coefficients(double zeta, double omega1, double omega2);

Matrix rayleigh_damping(const Matrix& M, const Matrix& K, double zeta, double omega1,
                        double omega2);

enum class LoadKind { quasi_periodic, pulse, custom_samples };

/// g(t) = p(t) * spatial.
struct LoadCase {
    Vector spatial;
    LoadKind kind = LoadKind::quasi_periodic;
    double amplitude = 0.0;  // p0 or A
    double omega = 1.0;      // rad/s
    // custom_samples: p(t) linearly interpolated on t = k * sample_dt,
    // zero past the last sample.
    std::vector<double> samples;
    double sample_dt = 0.0;
};

/// quasi_periodic: p0 [sin(w t) + sin(pi w t)]
/// pulse:          A sin^2(w t) on [0, pi / w], zero afterwards
double load_amplitude(const LoadCase& load, double t);
Vector assemble_load(const LoadCase& load, double t);

void validate(const LoadCase& load, Index dofs);

}  // namespace qmrom

#endif  // QMROM_MODEL_HPP
