#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace qmrom;
using namespace qmrom::test;

namespace {

struct BeamFixture {
    std::shared_ptr<const VonKarmanBeam> beam = von_karman_beam(beam_spec(12));
    ModalBasis basis = vibration_modes(*beam, 3);
    ModalDerivativeSet smd = modal_derivatives(*beam, basis, DerivativeKind::smd);
    ModalDerivativeSet md = modal_derivatives(*beam, basis, DerivativeKind::md);
};

const BeamFixture& fixture() {
    static const BeamFixture f;
    return f;
}

ModalAmplitudeHistory history(const Vector& t, const Matrix& eta) { return {t, eta}; }

}  // namespace

TEST_CASE("linear manifold: VMs only") {
    const auto& f = fixture();
    const LinearManifold lm = build_linear_manifold(f.basis);
    CHECK(lm.size() == 3);
    CHECK(lm.candidates == 3);
    CHECK((lm.V.transpose() * lm.V - Matrix::Identity(3, 3)).norm() < 1e-12);
    CHECK((f.basis.phi - lm.V * (lm.V.transpose() * f.basis.phi)).norm() <
          1e-10 * f.basis.phi.norm());
}

TEST_CASE("linear manifold: two VMs with every SMD") {
    const auto beam = von_karman_beam(beam_spec(12));
    const ModalBasis b = vibration_modes(*beam, std::vector<Index>{0, 2});
    const ModalDerivativeSet smd = modal_derivatives(*beam, b, DerivativeKind::smd);
    const LinearManifold lm = build_linear_manifold(b, smd);
    CHECK(lm.candidates == 5);
    CHECK(lm.size() <= 5);
    CHECK((lm.V.transpose() * lm.V - Matrix::Identity(lm.size(), lm.size())).norm() < 1e-12);
    CHECK(lm.provenance.size() == 5);
    CHECK(lm.provenance[2].label() == "SMD(1,1)");
}

TEST_CASE("linear manifold: duplicate column is deflated") {
    const auto& f = fixture();
    const LinearManifold one = build_linear_manifold(f.basis, f.smd, {{0, 1}});
    const LinearManifold dup = build_linear_manifold(f.basis, f.smd, {{0, 1}, {0, 1}});
    CHECK(dup.candidates == one.candidates + 1);
    CHECK(dup.size() == one.size());
}

TEST_CASE("MMI weights") {
    SUBCASE("silent mode gives a zero row and column") {
        const Vector t = Vector::LinSpaced(11, 0.0, 1.0);
        Matrix eta = Matrix::Zero(11, 2);
        eta.col(0) = t;
        const WeightMatrix W = mmi_weights(history(t, eta));
        CHECK(W.W.row(1).isZero(0.0));
        CHECK(W.W.col(1).isZero(0.0));
    }
    SUBCASE("constant amplitudes integrate exactly") {
        const Vector t = Vector::LinSpaced(7, 0.0, 1.0);
        const WeightMatrix W = mmi_weights(history(t, Matrix::Ones(7, 2)));
        CHECK(W.W(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("sin times cos over half a period") {
        const Vector t = Vector::LinSpaced(1001, 0.0, std::numbers::pi);
        Matrix eta(1001, 2);
        eta.col(0) = t.array().sin();
        eta.col(1) = t.array().cos();
        const WeightMatrix W = mmi_weights(history(t, eta));
        CHECK(std::abs(W.W(0, 1) - 1.0) < 1e-4);
        CHECK(W.W(0, 1) == W.W(1, 0));
    }
}

TEST_CASE("MVW weights") {
    SUBCASE("linear force gives a diagonal matrix") {
        const auto& f = fixture();
        const LinearizedModel lin(f.beam);
        const Vector t = Vector::LinSpaced(5, 0.0, 1.0);
        Matrix eta(5, 3);
        eta << 0, 0, 0, 1, -2, 0.5, 3, 1, 0.1, -4, 0, 0, 2, 1, 0.2;
        const WeightMatrix W = mvw_weights(history(t, eta), lin, f.basis);
        const double wmax = W.W.maxCoeff();
        for (Index i = 0; i < 3; ++i) {
            const double expected = f.basis.omega_sq(i) * eta.col(i).cwiseAbs().maxCoeff();
            CHECK(W.W(i, i) == doctest::Approx(expected).epsilon(1e-10));
            for (Index j = 0; j < 3; ++j)
                if (i != j) CHECK(W.W(i, j) < 1e-10 * wmax);
        }
    }
    SUBCASE("silent mode gives a zero row") {
        const auto& f = fixture();
        const Vector t = Vector::LinSpaced(3, 0.0, 1.0);
        Matrix eta = Matrix::Ones(3, 3);
        eta.col(2).setZero();
        const WeightMatrix W = mvw_weights(history(t, eta), *f.beam, f.basis);
        CHECK(W.W.row(2).isZero(0.0));
    }
    SUBCASE("2-DOF hand evaluation") {
        TwoDofParams p;
        p.m1 = 1.5;
        p.m2 = 0.8;
        p.k1 = 1.0;
        p.k2 = 12.0;
        p.a = 0.3;
        p.b = 0.9;
        p.c = 1.7;
        const auto model = two_dof_model(p);
        const ModalBasis b = vibration_modes(*model, 2);
        const Vector t = Vector::LinSpaced(3, 0.0, 1.0);
        Matrix eta(3, 2);
        eta << 0.0, 0.0, -0.7, 0.2, 0.4, 0.1;
        const WeightMatrix W = mvw_weights(history(t, eta), *model, b);
        const double w = -0.7 / std::sqrt(p.m1);
        CHECK(W.W(0, 1) == doctest::Approx(p.c * 0.49 / (p.m1 * std::sqrt(p.m2))).epsilon(1e-13));
        CHECK(W.W(0, 0) == doctest::Approx(std::abs((p.k1 * w + p.b * w * w * w) / std::sqrt(p.m1))));
    }
}

TEST_CASE("selection ranking") {
    SUBCASE("k equal to every pair keeps them all") {
        Matrix A(2, 2);
        A << 3, 1, 1, 2;
        const auto r = select_top_k({A, SelectionTechnique::mmi}, 3);
        REQUIRE(r.size() == 3);
        CHECK(r[0].i == 0);
        CHECK(r[0].j == 0);
        CHECK(r[0].weight == 1.0);
        CHECK(r[2].j == 1);
        CHECK_THROWS_AS(select_top_k({A, SelectionTechnique::mmi}, 4), InputError);
    }
    SUBCASE("single nonzero entry comes first") {
        Matrix A = Matrix::Zero(3, 3);
        A(2, 0) = 0.5;
        const auto r = select_top_k({A, SelectionTechnique::mvw}, 1);
        CHECK(r[0].i == 2);
        CHECK(r[0].j == 0);
    }
    SUBCASE("random weights match a brute-force sort") {
        std::mt19937 rng(41);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix A = random_matrix(rng, 4, 4).cwiseAbs();
            for (SelectionTechnique st : {SelectionTechnique::mmi, SelectionTechnique::mvw}) {
                std::vector<std::tuple<double, Index, Index>> all;
                for (Index i = 0; i < 4; ++i)
                    for (Index j = st == SelectionTechnique::mmi ? i : 0; j < 4; ++j)
                        all.emplace_back(-A(i, j), i, j);
                std::sort(all.begin(), all.end());
                const auto r = select_top_k({A, st}, 3);
                for (int k = 0; k < 3; ++k) {
                    CHECK(r[k].i == std::get<1>(all[k]));
                    CHECK(r[k].j == std::get<2>(all[k]));
                }
            }
        }
    }
}

TEST_CASE("quadratic manifold: construction") {
    const auto& f = fixture();
    const QuadraticManifold qs = build_quadratic_manifold(f.basis, f.smd);
    REQUIRE(qs.omega.has_value());
    CHECK((qs.theta.flat() - qs.omega->flat()).norm() <= 1e-10 * qs.theta.flat().norm());

    TwoDofParams p;
    p.k2 = 6.0;
    p.c = 0.9;
    p.a = 0.4;
    const auto model = two_dof_model(p);
    const ModalBasis b = vibration_modes(*model, 1);
    const QuadraticManifold q2 =
        build_quadratic_manifold(b, modal_derivatives(*model, b, DerivativeKind::smd));
    CHECK(std::abs(q2.theta(0, 0, 0)) < 1e-15);
    CHECK(q2.theta(1, 0, 0) == doctest::Approx(-2.0 * p.c / p.k2).epsilon(1e-14));
}

TEST_CASE("quadratic manifold: mapping") {
    const auto& f = fixture();
    const QuadraticManifold qm = build_quadratic_manifold(f.basis, f.md);
    std::mt19937 rng(43);
    CHECK(qm_map(qm, Vector::Zero(3)).isZero(0.0));

    SUBCASE("antisymmetric part does not contribute") {
        for (int k = 0; k < 100; ++k) {
            const Vector q = random_vector(rng, 3, 1e-6);
            const Vector a = qm_map(qm, q), r = qm_map_raw(qm, q);
            CHECK((a - r).norm() <= 1e-12 * a.norm());
        }
    }
    SUBCASE("curvature lies in the span of the derivatives") {
        const QuadraticManifold qs = build_quadratic_manifold(f.basis, f.smd);
        const LinearManifold lm = build_linear_manifold(f.basis, f.smd);
        for (int k = 0; k < 10; ++k) {
            const Vector q = random_vector(rng, 3, 1e-6);
            const Vector g = qm_map(qs, q);
            const Vector d = g - f.basis.phi * q;
            const Vector res = d - lm.V * (lm.V.transpose() * d);
            CHECK(res.norm() <= 1e-12 * g.norm());
        }
    }
    SUBCASE("2-DOF matches static condensation") {
        TwoDofParams p;
        p.k1 = 1.0;
        p.k2 = 5.0;
        p.a = 0.7;
        p.b = 0.2;
        p.c = 1.1;
        const auto model = two_dof_model(p);
        const ModalBasis b = vibration_modes(*model, 1);
        const QuadraticManifold q2 =
            build_quadratic_manifold(b, modal_derivatives(*model, b, DerivativeKind::smd));
        for (double w : {-1.0, -0.3, 0.0, 0.25, 1.0}) {
            const Vector u = qm_map(q2, Vector::Constant(1, w));
            CHECK(std::abs(u(0) - w) < 1e-15);
            CHECK(std::abs(u(1) + p.c / p.k2 * w * w) < 1e-15);
        }
    }
}

TEST_CASE("quadratic manifold: tangent") {
    const auto& f = fixture();
    const QuadraticManifold qm = build_quadratic_manifold(f.basis, f.md);
    CHECK((qm_tangent(qm, Vector::Zero(3)) - f.basis.phi).norm() == 0.0);

    std::mt19937 rng(47);
    const double scale = 1e-5;
    for (int k = 0; k < 20; ++k) {
        const Vector q = random_vector(rng, 3, scale);
        const Matrix P = qm_tangent(qm, q);
        for (Index i = 0; i < 3; ++i) {
            Vector col = f.basis.phi.col(i);
            for (Index j = 0; j < 3; ++j) col += qm.theta.slice(i, j) * q(j);
            CHECK((P.col(i) - col).norm() <= 1e-14 * col.norm());
        }
        const double h = 1e-6 * scale;
        Matrix J(P.rows(), 3);
        for (Index j = 0; j < 3; ++j) {
            Vector qp = q, qm_ = q;
            qp(j) += h;
            qm_(j) -= h;
            J.col(j) = (qm_map(qm, qp) - qm_map(qm, qm_)) / (2.0 * h);
        }
        CHECK((J - P).norm() <= 1e-7 * P.norm());
    }
}

TEST_CASE("quadratic manifold: kinematics") {
    const auto& f = fixture();
    const QuadraticManifold qm = build_quadratic_manifold(f.basis, f.smd);
    const Vector z = Vector::Zero(3);
    const Vector q = Vector::Constant(3, 1e-6);
    const Kinematics k0 = qm_kinematics(qm, q, z, z);
    CHECK(k0.v.isZero(0.0));
    CHECK(k0.a.isZero(0.0));

    const QuadraticManifold flat = QuadraticManifold::from_theta(f.basis.phi, Tensor3(f.basis.dofs(), 3));
    const Vector qd = Vector::LinSpaced(3, 1.0, 2.0), qdd = Vector::LinSpaced(3, -1.0, 1.0);
    const Kinematics kl = qm_kinematics(flat, q, qd, qdd);
    CHECK((kl.v - f.basis.phi * qd).norm() < 1e-12 * kl.v.norm());
    CHECK((kl.a - f.basis.phi * qdd).norm() < 1e-12 * kl.a.norm());

    // q(t) cubic; second time difference of Gamma(q(t)) converges to u''
    const Vector c1 = Vector::LinSpaced(3, 1.0, 3.0), c2 = Vector::LinSpaced(3, -2.0, 1.0),
                 c3 = Vector::LinSpaced(3, 0.5, -0.5);
    auto path = [&](double t) { return 1e-3 * (c1 * t + c2 * t * t + c3 * t * t * t); };
    auto dpath = [&](double t) { return 1e-3 * (c1 + 2.0 * c2 * t + 3.0 * c3 * t * t); };
    auto ddpath = [&](double t) { return 1e-3 * (2.0 * c2 + 6.0 * c3 * t); };
    const double t0 = 0.4;
    const Kinematics ex = qm_kinematics(qm, path(t0), dpath(t0), ddpath(t0));
    std::vector<double> err;
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
        const Vector fd = (qm_map(qm, path(t0 + h)) - 2.0 * qm_map(qm, path(t0)) + qm_map(qm, path(t0 - h))) / (h * h);
        err.push_back((fd - ex.a).norm());
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("POD") {
    std::mt19937 rng(53);
    SUBCASE("identical snapshots give one direction") {
        const Vector v = random_vector(rng, 6);
        const Matrix S = v * Vector::LinSpaced(5, 1.0, 5.0).transpose();
        const LinearManifold p = pod_basis(S, 1);
        CHECK(std::abs(std::abs(p.V.col(0).dot(v.normalized())) - 1.0) < 1e-12);
        CHECK_THROWS_AS(pod_basis(S, 2), InputError);
    }
    SUBCASE("orthonormal and monotone reconstruction") {
        const Matrix S = random_matrix(rng, 10, 8);
        double prev = std::numeric_limits<double>::infinity();
        for (Index k = 1; k <= 8; ++k) {
            const LinearManifold p = pod_basis(S, k);
            CHECK((p.V.transpose() * p.V - Matrix::Identity(k, k)).norm() < 1e-12);
            const double e = (S - p.V * (p.V.transpose() * S)).norm();
            CHECK(e <= prev + 1e-12);
            prev = e;
        }
        CHECK(prev < 1e-12 * S.norm());
    }
    SUBCASE("mass-weighted variant") {
        const Matrix S = random_matrix(rng, 6, 4);
        const Matrix M = random_spd(rng, 6);
        PodOptions o;
        o.mass = &M;
        const LinearManifold p = pod_basis(S, 3, o);
        CHECK((p.V.transpose() * M * p.V - Matrix::Identity(3, 3)).norm() < 1e-12);
    }
}
