#include "qmrom/integrate.hpp"

#include "qmrom/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmrom {

IntegratorParams IntegratorParams::uniform(double t_max, int n_steps) {
    if (n_steps < 1) throw InputError("integrator: at least one step is required");
    IntegratorParams p;
    p.t_max = t_max;
    p.h = t_max / n_steps;
    return p;
}

int IntegratorParams::steps() const { return static_cast<int>(std::llround(t_max / h)); }

void IntegratorParams::validate() const {
    if (!(h > 0.0)) throw InputError("integrator: time step must be positive");
    if (!(t_max >= h)) throw InputError("integrator: t_max must cover at least one step");
    if (!(beta > 0.0 && beta <= 0.5)) throw InputError("integrator: beta must lie in (0, 0.5]");
    if (!(gamma >= 0.5 && gamma <= 1.0)) throw InputError("integrator: gamma must lie in [0.5, 1]");
    if (!(epsilon > 0.0)) throw InputError("integrator: epsilon must be positive");
    if (max_iterations < 1) throw InputError("integrator: max_iterations must be positive");
}

int Trajectory::total_iterations() const {
    int s = 0;
    for (int k : iterations) s += k;
    return s;
}

int Trajectory::max_iterations() const {
    return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

NewmarkResult newmark_march(const SystemEvaluator& system, const Vector& q0, const Vector& qd0,
                            const IntegratorParams& params) {
    params.validate();
    const Index m = q0.size();
    if (qd0.size() != m) throw InputError("integrator: initial state sizes differ");
    const int n_steps = params.steps();
    const double h = params.h;
    const double beta = params.beta;
    const double gamma = params.gamma;
    const double c_v = gamma / (beta * h);
    const double c_a = 1.0 / (beta * h * h);

    NewmarkResult out;
    out.times.resize(n_steps + 1);
    out.q.resize(m, n_steps + 1);
    out.qd.resize(m, n_steps + 1);
    out.qdd.resize(m, n_steps + 1);
    out.iterations.assign(n_steps + 1, 0);
    out.residuals.assign(n_steps + 1, 0.0);

    // Initial acceleration from the equations of motion at t0.
    {
        const SystemEvaluation ev = system(0.0, q0, qd0, false);
        Eigen::PartialPivLU<Matrix> lu(ev.mass);
        if (!(lu.rcond() > 1e-14)) {
            throw NumericalError("integrator: singular mass matrix in the initial acceleration solve");
        }
        out.times(0) = 0.0;
        out.q.col(0) = q0;
        out.qd.col(0) = qd0;
        out.qdd.col(0) = lu.solve(ev.external - ev.nonlinear - ev.damping * qd0);
    }

    Vector q(m), qd(m), qdd(m);
    for (int k = 0; k < n_steps; ++k) {
        const double t = (k + 1) * h;
        const auto qk = out.q.col(k);
        const auto qdk = out.qd.col(k);
        const auto qddk = out.qdd.col(k);
        qd = qdk + (1.0 - gamma) * h * qddk;
        q = qk + h * qdk + (0.5 - beta) * h * h * qddk;
        qdd.setZero();

        int it = 0;
        double rnorm = 0.0;
        while (true) {
            const SystemEvaluation ev = system(t, q, qd, true);
            const Vector r = ev.mass * qdd + ev.damping * qd + ev.nonlinear - ev.external;
            rnorm = r.norm();
            // Plain ||f~|| breaks down at rest, so g~ and the inertia scale
            // also count as references.
            const double ref = std::max({ev.force_norm, ev.external.norm(),
                                         1e-12 * ev.mass.norm() * qdd.norm()});
            if (rnorm <= params.epsilon * ref) break;
            if (it == params.max_iterations) {
                std::ostringstream os;
                os << "Newton-Raphson did not converge at step " << k + 1 << " (t = " << t
                   << ", ||r|| = " << rnorm << ", reference = " << ref << ")";
                throw NumericalError(os.str());
            }
            const Matrix S = ev.stiffness + c_v * ev.damping + c_a * ev.mass;
            Eigen::PartialPivLU<Matrix> lu(S);
            if (!(lu.rcond() > 1e-15)) {
                std::ostringstream os;
                os << "singular iteration matrix at step " << k + 1;
                throw NumericalError(os.str());
            }
            const Vector dq = -lu.solve(r);
            if (!dq.allFinite()) {
                std::ostringstream os;
                os << "non-finite Newton correction at step " << k + 1;
                throw NumericalError(os.str());
            }
            q += dq;
            qd += c_v * dq;
            qdd += c_a * dq;
            ++it;
        }
        out.times(k + 1) = t;
        out.q.col(k + 1) = q;
        out.qd.col(k + 1) = qd;
        out.qdd.col(k + 1) = qdd;
        out.iterations[k + 1] = it;
        out.residuals[k + 1] = rnorm;
    }
    return out;
}

namespace {

Trajectory with_reduced(NewmarkResult&& res) {
    Trajectory tr;
    tr.times = std::move(res.times);
    tr.q = std::move(res.q);
    tr.qd = std::move(res.qd);
    tr.qdd = std::move(res.qdd);
    tr.iterations = std::move(res.iterations);
    tr.residuals = std::move(res.residuals);
    return tr;
}

}  // namespace

Trajectory newmark_full(const StructuralModel& model, const LoadCase& load,
                        const InitialState& ic, const IntegratorParams& params) {
    const Index n = model.dofs();
    validate(load, n);
    if (ic.position.size() != n || ic.velocity.size() != n) {
        throw InputError("newmark_full: initial state size mismatch");
    }
    const Matrix& M = model.mass();
    const Matrix& C = model.damping();
    SystemEvaluator system = [&](double t, const Vector& u, const Vector&, bool jac) {
        SystemEvaluation ev;
        ev.mass = M;
        ev.damping = C;
        ev.nonlinear = model.internal_force(u);
        ev.force_norm = ev.nonlinear.norm();
        ev.external = assemble_load(load, t);
        if (jac) ev.stiffness = model.tangent_stiffness(u);
        return ev;
    };
    Trajectory tr = with_reduced(newmark_march(system, ic.position, ic.velocity, params));
    tr.u = tr.q;
    tr.v = tr.qd;
    tr.a = tr.qdd;
    return tr;
}

Trajectory newmark_reduced_linear(const StructuralModel& model, const LinearManifold& manifold,
                                  const LoadCase& load, const InitialState& ic,
                                  const IntegratorParams& params) {
    const Matrix& V = manifold.V;
    if (V.rows() != model.dofs()) throw InputError("linear manifold does not match the model");
    validate(load, model.dofs());
    const Matrix Mr = V.transpose() * model.mass() * V;
    const Matrix Cr = V.transpose() * model.damping() * V;
    const Vector lr = V.transpose() * load.spatial;
    SystemEvaluator system = [&](double t, const Vector& q, const Vector&, bool jac) {
        SystemEvaluation ev;
        const Vector u = V * q;
        ev.mass = Mr;
        ev.damping = Cr;
        ev.nonlinear = V.transpose() * model.internal_force(u);
        ev.force_norm = ev.nonlinear.norm();
        ev.external = load_amplitude(load, t) * lr;
        if (jac) ev.stiffness = V.transpose() * model.tangent_stiffness(u) * V;
        return ev;
    };
    Trajectory tr = with_reduced(newmark_march(system, ic.position, ic.velocity, params));
    tr.u = V * tr.q;
    tr.v = V * tr.qd;
    tr.a = V * tr.qdd;
    return tr;
}

namespace {

SystemEvaluation qm_evaluate(const StructuralModel& model, const QuadraticManifold& qm,
                             const LoadCase& load, double t, const Vector& q, const Vector& qd,
                             bool jac) {
    const Matrix P = qm_tangent(qm, q);
    const Vector u = qm_map(qm, q);
    const Matrix MP = model.mass() * P;
    SystemEvaluation ev;
    ev.mass = P.transpose() * MP;
    ev.damping = P.transpose() * model.damping() * P;
    const Vector f = P.transpose() * model.internal_force(u);
    ev.force_norm = f.norm();
    ev.nonlinear = f;
    if (!qm.theta.is_zero() && !qd.isZero(0.0)) {
        ev.nonlinear += P.transpose() * (model.mass() * contract_t3(qm.theta, qd, qd));
    }
    ev.external = P.transpose() * assemble_load(load, t);
    if (jac) ev.stiffness = P.transpose() * model.tangent_stiffness(u) * P;
    return ev;
}

}  // namespace

Trajectory newmark_reduced_qm(const StructuralModel& model, const QuadraticManifold& manifold,
                              const LoadCase& load, const InitialState& ic,
                              const IntegratorParams& params) {
    if (manifold.dofs() != model.dofs()) throw InputError("quadratic manifold does not match the model");
    validate(load, model.dofs());
    SystemEvaluator system = [&](double t, const Vector& q, const Vector& qd, bool jac) {
        return qm_evaluate(model, manifold, load, t, q, qd, jac);
    };
    Trajectory tr = with_reduced(newmark_march(system, ic.position, ic.velocity, params));
    const Index n = model.dofs();
    const Index cols = tr.q.cols();
    tr.u.resize(n, cols);
    tr.v.resize(n, cols);
    tr.a.resize(n, cols);
    for (Index k = 0; k < cols; ++k) {
        const Kinematics kin = qm_kinematics(manifold, tr.q.col(k), tr.qd.col(k), tr.qdd.col(k));
        tr.u.col(k) = kin.u;
        tr.v.col(k) = kin.v;
        tr.a.col(k) = kin.a;
    }
    return tr;
}

Vector qm_reduced_residual(const StructuralModel& model, const QuadraticManifold& manifold,
                           const LoadCase& load, double t, const Vector& q, const Vector& qd,
                           const Vector& qdd) {
    const SystemEvaluation ev = qm_evaluate(model, manifold, load, t, q, qd, false);
    return ev.mass * qdd + ev.nonlinear + ev.damping * qd - ev.external;
}

NewmarkResult newmark_sdof(double mass, double damping, double stiffness,
                           const std::function<double(double)>& forcing,
                           const IntegratorParams& params, double x0, double v0) {
    const Matrix M = Matrix::Constant(1, 1, mass);
    const Matrix C = Matrix::Constant(1, 1, damping);
    const Matrix K = Matrix::Constant(1, 1, stiffness);
    SystemEvaluator system = [&](double t, const Vector& x, const Vector&, bool) {
        SystemEvaluation ev;
        ev.mass = M;
        ev.damping = C;
        ev.stiffness = K;
        ev.nonlinear = K * x;
        ev.force_norm = ev.nonlinear.norm();
        ev.external = Vector::Constant(1, forcing(t));
        return ev;
    };
    return newmark_march(system, Vector::Constant(1, x0), Vector::Constant(1, v0), params);
}

}  // namespace qmrom
