#ifndef QMROM_INTEGRATE_HPP
#define QMROM_INTEGRATE_HPP

#include "qmrom/algebra.hpp"
#include "qmrom/model.hpp"

#include <functional>
#include <vector>

namespace qmrom {

struct LinearManifold;
struct QuadraticManifold;

struct IntegratorParams {
    double h = 0.0;          // time step, s
    double t_max = 0.0;      // end of the window, s
    double beta = 0.25;
    double gamma = 0.5;
    double epsilon = 1e-6;   // relative residual tolerance
    int max_iterations = 25;

    /// n_steps equal steps over [0, t_max].
    static IntegratorParams uniform(double t_max, int n_steps);

    int steps() const;
    void validate() const;
};

/// Time history on a uniform grid. Column k of each state matrix is the
/// state at times(k); column 0 holds the initial condition.
struct Trajectory {
    Vector times;
    Matrix u, v, a;      // full-order (lifted) states, n x (steps + 1)
    Matrix q, qd, qdd;   // reduced coordinates; equal to u, v, a for full runs
    std::vector<int> iterations;   // Newton corrections per step (index 0 unused)
    std::vector<double> residuals; // residual norm at acceptance

    Index steps() const { return times.size() - 1; }
    Index dofs() const { return u.rows(); }
    int total_iterations() const;
    int max_iterations() const;
};

/// Generalized system seen by the time marcher:
///   mass * qdd + damping * qd + nonlinear(q, qd) = external(t, q)
/// `stiffness` is the (approximate) derivative of `nonlinear` w.r.t. q and
/// is only filled when requested.
struct SystemEvaluation {
    Matrix mass, damping, stiffness;
    Vector nonlinear;       // f~ + p~
    Vector external;        // g~
    double force_norm = 0;  // ||f~||, reference for the convergence test
};

using SystemEvaluator =
    std::function<SystemEvaluation(double t, const Vector& q, const Vector& qd, bool need_jacobian)>;

struct NewmarkResult {
    Vector times;
    Matrix q, qd, qdd;
    std::vector<int> iterations;
    std::vector<double> residuals;
};

/// Implicit Newmark with Newton-Raphson corrections and a full Jacobian
/// update at every iteration. Throws NumericalError on divergence.
NewmarkResult newmark_march(const SystemEvaluator& system, const Vector& q0, const Vector& qd0,
                            const IntegratorParams& params);

struct InitialState {
    Vector position, velocity;
    static InitialState rest(Index size) { return {Vector::Zero(size), Vector::Zero(size)}; }
};

Trajectory newmark_full(const StructuralModel& model, const LoadCase& load,
                        const InitialState& ic, const IntegratorParams& params);

/// Galerkin projection onto span(V); V need not be orthonormal but must
/// have full column rank.
Trajectory newmark_reduced_linear(const StructuralModel& model, const LinearManifold& manifold,
                                  const LoadCase& load, const InitialState& ic,
                                  const IntegratorParams& params);

/// Projection onto the tangent space of the quadratic manifold with the
/// reduced operators reassembled inside every Newton iteration.
Trajectory newmark_reduced_qm(const StructuralModel& model, const QuadraticManifold& manifold,
                              const LoadCase& load, const InitialState& ic,
                              const IntegratorParams& params);

/// Scalar linear oscillator m x'' + c x' + k x = p(t) by the same scheme.
NewmarkResult newmark_sdof(double mass, double damping, double stiffness,
                           const std::function<double(double)>& forcing,
                           const IntegratorParams& params, double x0 = 0.0, double v0 = 0.0);

/// Reduced residual of the quadratic-manifold equations at a given state,
/// M~ qdd + p~ + C~ qd + f~ - g~.
Vector qm_reduced_residual(const StructuralModel& model, const QuadraticManifold& manifold,
                           const LoadCase& load, double t, const Vector& q, const Vector& qd,
                           const Vector& qdd);

}  // namespace qmrom

#endif  // QMROM_INTEGRATE_HPP
