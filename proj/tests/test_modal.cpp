#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace qmrom;
using namespace qmrom::test;

namespace {

/// Eigenvector of (K(eps phi_j), M) closest to phi_i, sign-aligned.
Vector perturbed_mode(const StructuralModel& model, const ModalBasis& b, Index i, Index j,
                      double eps) {
    const Matrix K = model.tangent_stiffness(eps * b.phi.col(j));
    const Matrix& M = model.mass();
    const EigenPairs e = sym_generalized_eig(K, M, b.indices[i] + 3);
    const Vector mphi = M * b.phi.col(i);
    Index best = 0;
    (e.vectors.transpose() * mphi).cwiseAbs().maxCoeff(&best);
    Vector v = e.vectors.col(best);
    if (v.dot(mphi) < 0.0) v = -v;
    return v;
}

}  // namespace

TEST_CASE("modes: 2-DOF closed form") {
    TwoDofParams p;
    p.m1 = 2.0;
    p.m2 = 0.5;
    p.k1 = 3.0;
    p.k2 = 20.0;
    const auto model = two_dof_model(p);
    const ModalBasis b = vibration_modes(*model, 2);
    CHECK(b.omega_sq(0) == doctest::Approx(1.5));
    CHECK(b.omega_sq(1) == doctest::Approx(40.0));
    Matrix phi(2, 2);
    phi << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(0.5);
    CHECK((b.phi - phi).norm() < 1e-14);
}

TEST_CASE("modes: simply supported beam against Euler-Bernoulli") {
    const BeamModelSpec s = beam_spec(24);
    const auto beam = von_karman_beam(s);
    const ModalBasis b = vibration_modes(*beam, 3);
    const double A = s.width * s.thickness;
    const double I = s.width * std::pow(s.thickness, 3) / 12.0;
    for (Index i = 0; i < 3; ++i) {
        const double k = (i + 1) * std::numbers::pi / s.length;
        const double exact = k * k * std::sqrt(s.young_modulus * I / (s.density * A));
        CHECK(std::abs(std::sqrt(b.omega_sq(i)) / exact - 1.0) < 0.02);
    }
    CHECK((b.phi.transpose() * beam->mass() * b.phi - Matrix::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("modes: complete basis diagonalizes the stiffness") {
    const auto beam = von_karman_beam(beam_spec(2));
    const Index n = beam->dofs();
    const ModalBasis b = vibration_modes(*beam, n);
    const Matrix D = b.phi.transpose() * beam->linear_stiffness() * b.phi;
    const Matrix off = D - Matrix(D.diagonal().asDiagonal());
    CHECK(off.norm() <= 1e-9 * D.norm());
    CHECK_THROWS_AS(vibration_modes(*beam, n + 1), InputError);
}

TEST_CASE("modes: selection by spectral index") {
    const auto beam = von_karman_beam(beam_spec(12));
    const ModalBasis all = vibration_modes(*beam, 4);
    const ModalBasis sel = vibration_modes(*beam, std::vector<Index>{0, 2});
    CHECK((sel.phi.col(1) - all.phi.col(2)).norm() < 1e-12);
    CHECK(sel.indices == std::vector<Index>{0, 2});
    const auto part = load_participating_modes(*beam, beam->uniform_transverse_load(), 2);
    CHECK(part == std::vector<Index>{0, 2});
}

TEST_CASE("MD: linear model has zero derivatives") {
    const Matrix K = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
    const LinearModel model(Matrix::Identity(4, 4), Matrix::Zero(4, 4), K);
    const ModalBasis b = vibration_modes(model, 2);
    const ModalDerivative d = modal_derivative(model, b, 0, 1);
    CHECK(d.vector.isZero(0.0));
    CHECK(d.eigenvalue_sensitivity == 0.0);
    CHECK(static_modal_derivative(model, b, 1, 1).isZero(0.0));
}

TEST_CASE("MD: 2-DOF bordered solve satisfies the normalization constraint") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto model = two_dof_model(random_two_dof(rng));
        const ModalBasis b = vibration_modes(*model, 2);
        for (Index j = 0; j < 2; ++j) {
            const ModalDerivative d = modal_derivative(*model, b, 0, j);
            CHECK(std::abs(b.phi.col(0).dot(model->mass() * d.vector)) < 1e-12);
            // bordered equation residual
            const Matrix A = model->linear_stiffness() - b.omega_sq(0) * model->mass();
            const Vector r = A * d.vector - model->mass() * b.phi.col(0) * d.eigenvalue_sensitivity +
                             model->stiffness_derivative(b.phi.col(j)) * b.phi.col(0);
            CHECK(r.norm() < 1e-12 * std::max(1.0, d.vector.norm()));
        }
    }
}

TEST_CASE("MD: bordered solve without inertia reproduces the static derivative") {
    std::mt19937 rng(37);
    const auto model = two_dof_model(random_two_dof(rng));
    const ModalBasis b = vibration_modes(*model, 1);
    const Vector phi = b.phi.col(0);
    const Matrix D = model->stiffness_derivative(phi);
    const BorderedSolution s =
        solve_bordered(model->linear_stiffness(), model->mass() * phi, -D * phi);
    CHECK(rel_err(s.x, static_modal_derivative(*model, b, 0, 0)) < 1e-12);
}

TEST_CASE("MD: not symmetric in general on the beam") {
    const auto beam = von_karman_beam(beam_spec(12));
    const ModalBasis b = vibration_modes(*beam, 3);
    const ModalDerivativeSet md = modal_derivatives(*beam, b, DerivativeKind::md);
    double worst = 0.0;
    for (Index i = 0; i < 3; ++i)
        for (Index j = i + 1; j < 3; ++j)
            worst = std::max(worst, rel_err(md.tensor.slice(i, j), md.tensor.slice(j, i)));
    CHECK(worst > 1e-6);
    CHECK(md.pairs().size() == 9);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j)
            CHECK(std::abs(b.phi.col(i).dot(beam->mass() * md.tensor.slice(i, j))) <
                  1e-12 * std::max(1.0, md.tensor.slice(i, j).norm()));
}

TEST_CASE("MD: repeated eigenvalue is reported") {
    Matrix K = Matrix::Identity(3, 3);
    K(2, 2) = 2.0;
    const Matrix K1 = K;
    const LinearModel model(Matrix::Identity(3, 3), Matrix::Zero(3, 3), K1);
    const ModalBasis b = vibration_modes(model, 2);
    CHECK_THROWS_AS(modal_derivative(model, b, 0, Matrix(Matrix::Ones(3, 3))), NumericalError);
}

TEST_CASE("MD: first-order eigenvector perturbation") {
    const auto beam = von_karman_beam(beam_spec(12));
    const ModalBasis b = vibration_modes(*beam, 2);
    const ModalDerivativeSet md = modal_derivatives(*beam, b, DerivativeKind::md);
    for (const auto& [i, j] : std::vector<std::pair<Index, Index>>{{0, 0}, {0, 1}, {1, 0}}) {
        double eps = 2e-7;
        std::vector<double> err;
        for (int k = 0; k < 4; ++k, eps /= 2.0) {
            const Vector v = perturbed_mode(*beam, b, i, j, eps);
            err.push_back((v - b.phi.col(i) - eps * md.tensor.slice(i, j)).norm());
        }
        for (std::size_t k = 0; k + 1 < err.size(); ++k) {
            const double ratio = err[k] / err[k + 1];
            INFO("pair (" << i << "," << j << ") ratio " << ratio);
            CHECK(ratio > 3.5);
            CHECK(ratio < 4.5);
        }
    }
}

TEST_CASE("SMD: 2-DOF closed form") {
    TwoDofParams p;
    p.k1 = 1.0;
    p.k2 = 7.0;
    p.a = 0.4;
    p.c = 1.3;
    const auto unit = two_dof_model(p);
    const ModalBasis b1 = vibration_modes(*unit, 1);
    const Vector th = static_modal_derivative(*unit, b1, 0, 0);
    CHECK(std::abs(th(0)) < 1e-15);
    CHECK(th(1) == doctest::Approx(-2.0 * p.c / p.k2).epsilon(1e-14));

    // non-unit transverse mass: phi_1 = e1 / sqrt(m1) enters twice
    p.m1 = 2.5;
    p.m2 = 3.0;
    p.k2 = 30.0;
    const auto general = two_dof_model(p);
    const ModalBasis b2 = vibration_modes(*general, 1);
    const Vector th2 = static_modal_derivative(*general, b2, 0, 0);
    CHECK(th2(1) == doctest::Approx(-2.0 * p.c / (p.k2 * p.m1)).epsilon(1e-14));
}

TEST_CASE("SMD: symmetric and statically admissible on the beam") {
    const auto beam = von_karman_beam(beam_spec(24));
    const ModalBasis b = vibration_modes(*beam, 5);
    const ModalDerivativeSet smd = modal_derivatives(*beam, b, DerivativeKind::smd);
    CHECK(smd.symmetry_residual() < 1e-10);
    CHECK(smd.pairs().size() == 15);
    const Matrix& K0 = beam->linear_stiffness();
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            const Vector rhs = beam->stiffness_derivative(b.phi.col(j)) * b.phi.col(i);
            const Vector r = K0 * smd.tensor.slice(i, j) + rhs;
            CHECK(r.norm() <= 1e-12 * std::max(rhs.norm(), 1.0));
        }
    }
    const ModalDerivativeSet fd =
        modal_derivatives(*beam, b, DerivativeKind::smd, DerivativeOptions{true, 1e-8});
    CHECK(fd.symmetry_residual() < 1e-5);
    CHECK((fd.tensor.flat() - smd.tensor.flat()).norm() < 1e-5 * smd.tensor.flat().norm());
}

TEST_CASE("linear modal run") {
    const auto beam = von_karman_beam(beam_spec(12));
    const ModalBasis b = vibration_modes(*beam, 3);
    LoadCase load;
    load.spatial = beam->uniform_transverse_load();
    load.omega = std::sqrt(b.omega_sq(0));

    SUBCASE("no load stays at rest") {
        load.amplitude = 0.0;
        const auto h = linear_modal_run(*beam, b, load, 1e-3, 50);
        CHECK(h.eta.isZero(0.0));
    }
    SUBCASE("antisymmetric mode is not excited by a uniform load") {
        load.amplitude = 100.0;
        const auto h = linear_modal_run(*beam, b, load, 4 * 2 * std::numbers::pi / load.omega, 400);
        CHECK(h.eta.col(1).cwiseAbs().maxCoeff() < 1e-10 * h.eta.col(0).cwiseAbs().maxCoeff());
        CHECK(h.samples() == 401);
    }
    SUBCASE("undamped forced mode converges at second order") {
        load.kind = LoadKind::pulse;  // replaced below by a custom sine
        const double w = std::sqrt(b.omega_sq(0));
        const double W = 0.63 * w;
        const double T = 3 * 2 * std::numbers::pi / w;
        const double F = b.phi.col(0).dot(load.spatial);
        std::vector<double> errs;
        for (int n : {200, 400, 800, 1600}) {
            LoadCase sine = load;
            sine.kind = LoadKind::custom_samples;
            sine.amplitude = 1.0;
            sine.sample_dt = T / (16 * n);
            for (int k = 0; k <= 16 * n; ++k) sine.samples.push_back(std::sin(W * k * sine.sample_dt));
            LinearRunOptions o;
            o.zeta = 0.0;
            const auto h = linear_modal_run(*beam, b, sine, T, n, o);
            double e = 0.0;
            for (Index k = 0; k < h.samples(); ++k) {
                const double t = h.times(k);
                const double exact = F / (w * w - W * W) * (std::sin(W * t) - W / w * std::sin(w * t));
                e = std::max(e, std::abs(h.eta(k, 0) - exact));
            }
            errs.push_back(e);
        }
        for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
            const double ratio = errs[k] / errs[k + 1];
            INFO("ratio " << ratio);
            CHECK(ratio > 3.6);
            CHECK(ratio < 4.4);
        }
    }
}
