#include "qmrom/model.hpp"

#include <cmath>
#include <sstream>

namespace qmrom {

std::vector<std::array<bool, 3>> simply_supported(int n_nodes) {
    std::vector<std::array<bool, 3>> fixed(n_nodes, {false, false, false});
    fixed.front() = {true, true, false};
    fixed.back() = {true, true, false};
    return fixed;
}

std::vector<std::array<bool, 3>> clamped_clamped(int n_nodes) {
    std::vector<std::array<bool, 3>> fixed(n_nodes, {false, false, false});
    fixed.front() = {true, true, true};
    fixed.back() = {true, true, true};
    return fixed;
}

std::vector<std::array<bool, 3>> cantilever(int n_nodes) {
    std::vector<std::array<bool, 3>> fixed(n_nodes, {false, false, false});
    fixed.front() = {true, true, true};
    return fixed;
}

VonKarmanBeam::VonKarmanBeam(BeamModelSpec spec) : spec_(std::move(spec)) {
    const auto& s = spec_;
    if (s.n_elements < 2) throw InputError("vk_beam: at least two elements are required");
    if (!(s.length > 0.0 && s.width > 0.0 && s.thickness > 0.0 && s.young_modulus > 0.0 &&
          s.density > 0.0 && s.poisson_ratio > 0.0)) {
        throw InputError("vk_beam: physical parameters must be positive");
    }
    const int n_nodes = nodes();
    if (spec_.fixed.empty()) spec_.fixed = simply_supported(n_nodes);
    if (static_cast<int>(spec_.fixed.size()) != n_nodes) {
        throw InputError("vk_beam: boundary condition table must have one row per node");
    }

    global_to_free_.assign(3 * n_nodes, -1);
    for (int node = 0; node < n_nodes; ++node) {
        for (int d = 0; d < 3; ++d) {
            if (!spec_.fixed[node][d]) {
                global_to_free_[3 * node + d] = static_cast<Index>(free_to_global_.size());
                free_to_global_.push_back(3 * node + d);
            }
        }
    }
    if (free_to_global_.size() == global_to_free_.size()) {
        throw InputError("vk_beam: no constrained DOFs");
    }

    const double l = s.length / s.n_elements;
    element_length_ = l;
    const double area = s.width * s.thickness;
    ea_ = s.young_modulus * area;
    ei_ = s.young_modulus * s.width * s.thickness * s.thickness * s.thickness / 12.0;

    const double gp = 0.5 / std::sqrt(3.0);
    const std::array<double, 2> xi = {0.5 - gp, 0.5 + gp};
    for (int q = 0; q < 2; ++q) {
        const double x = xi[q];
        GaussData& g = gauss_[q];
        g.wl = 0.5 * l;
        g.bu << -1.0 / l, 0, 0, 1.0 / l, 0, 0;
        g.g << 0, (-6.0 * x + 6.0 * x * x) / l, 1.0 - 4.0 * x + 3.0 * x * x,
               0, (6.0 * x - 6.0 * x * x) / l, -2.0 * x + 3.0 * x * x;
        g.bb << 0, (-6.0 + 12.0 * x) / (l * l), (-4.0 + 6.0 * x) / l,
                0, (6.0 - 12.0 * x) / (l * l), (-2.0 + 6.0 * x) / l;
    }

    const Index n = dofs();
    mass_ = Matrix::Zero(n, n);
    damping_ = Matrix::Zero(n, n);
    const double rho_a = s.density * area;
    LocalMatrix me = LocalMatrix::Zero();
    me(0, 0) = me(3, 3) = 2.0 * rho_a * l / 6.0;
    me(0, 3) = me(3, 0) = rho_a * l / 6.0;
    Eigen::Matrix4d mh;
    mh << 156, 22 * l, 54, -13 * l,
          22 * l, 4 * l * l, 13 * l, -3 * l * l,
          54, 13 * l, 156, -22 * l,
          -13 * l, -3 * l * l, -22 * l, 4 * l * l;
    mh *= rho_a * l / 420.0;
    const std::array<int, 4> bend = {1, 2, 4, 5};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) me(bend[a], bend[b]) = mh(a, b);
    for (int e = 0; e < s.n_elements; ++e) scatter(mass_, me, e);

    k0_ = tangent_stiffness(Vector::Zero(n));
    Eigen::LLT<Matrix> llt(k0_);
    if (llt.info() != Eigen::Success) {
        throw InputError("vk_beam: stiffness at equilibrium is singular; the model is under-constrained");
    }
}

VonKarmanBeam::Local VonKarmanBeam::gather(const Vector& u, int element) const {
    Local d;
    for (int k = 0; k < 6; ++k) {
        const Index f = global_to_free_[3 * element + k];
        d(k) = f < 0 ? 0.0 : u(f);
    }
    return d;
}

template <typename LocalT>
void VonKarmanBeam::scatter(Vector& global, const LocalT& local, int element) const {
    for (int k = 0; k < 6; ++k) {
        const Index f = global_to_free_[3 * element + k];
        if (f >= 0) global(f) += local(k);
    }
}

void VonKarmanBeam::scatter(Matrix& global, const LocalMatrix& local, int element) const {
    for (int b = 0; b < 6; ++b) {
        const Index fb = global_to_free_[3 * element + b];
        if (fb < 0) continue;
        for (int a = 0; a < 6; ++a) {
            const Index fa = global_to_free_[3 * element + a];
            if (fa >= 0) global(fa, fb) += local(a, b);
        }
    }
}

Vector VonKarmanBeam::internal_force(const Vector& u) const {
    if (u.size() != dofs()) throw InputError("vk_beam: displacement size mismatch");
    Vector f = Vector::Zero(dofs());
    for (int e = 0; e < spec_.n_elements; ++e) {
        const Local d = gather(u, e);
        Local fe = Local::Zero();
        for (const auto& g : gauss_) {
            const double slope = g.g.dot(d);
            const double strain = g.bu.dot(d) + 0.5 * slope * slope;
            const double curvature = g.bb.dot(d);
            fe += g.wl * (ea_ * strain * (g.bu + slope * g.g) + ei_ * curvature * g.bb);
        }
        scatter(f, fe, e);
    }
    return f;
}

Matrix VonKarmanBeam::tangent_stiffness(const Vector& u) const {
    if (u.size() != dofs()) throw InputError("vk_beam: displacement size mismatch");
    Matrix K = Matrix::Zero(dofs(), dofs());
    for (int e = 0; e < spec_.n_elements; ++e) {
        const Local d = gather(u, e);
        LocalMatrix ke = LocalMatrix::Zero();
        for (const auto& g : gauss_) {
            const double slope = g.g.dot(d);
            const double strain = g.bu.dot(d) + 0.5 * slope * slope;
            const Local bn = g.bu + slope * g.g;
            ke += g.wl * (ea_ * (bn * bn.transpose() + strain * g.g * g.g.transpose()) +
                          ei_ * g.bb * g.bb.transpose());
        }
        scatter(K, ke, e);
    }
    return K;
}

Matrix VonKarmanBeam::stiffness_derivative(const Vector& phi) const {
    if (phi.size() != dofs()) throw InputError("vk_beam: direction size mismatch");
    Matrix D = Matrix::Zero(dofs(), dofs());
    for (int e = 0; e < spec_.n_elements; ++e) {
        const Local p = gather(phi, e);
        LocalMatrix de = LocalMatrix::Zero();
        for (const auto& g : gauss_) {
            const double slope = g.g.dot(p);
            const double stretch = g.bu.dot(p);
            de += g.wl * ea_ *
                  (slope * (g.g * g.bu.transpose() + g.bu * g.g.transpose()) +
                   stretch * g.g * g.g.transpose());
        }
        scatter(D, de, e);
    }
    return D;
}

Index VonKarmanBeam::free_dof(int node, BeamDof dof) const {
    if (node < 0 || node >= nodes()) throw InputError("vk_beam: node index out of range");
    return global_to_free_[3 * node + static_cast<int>(dof)];
}

std::string VonKarmanBeam::dof_label(Index dof) const {
    const Index g = free_to_global_.at(dof);
    static constexpr const char* names[] = {"u", "w", "t"};
    std::ostringstream os;
    os << "n" << g / 3 << "_" << names[g % 3];
    return os.str();
}

Vector VonKarmanBeam::uniform_transverse_load(double pressure) const {
    const double l = element_length_;
    const double q = pressure * spec_.width;
    Local fe;
    fe << 0, q * l / 2.0, q * l * l / 12.0, 0, q * l / 2.0, -q * l * l / 12.0;
    Vector f = Vector::Zero(dofs());
    for (int e = 0; e < spec_.n_elements; ++e) scatter(f, fe, e);
    return f;
}

Vector VonKarmanBeam::point_transverse_load(const std::vector<int>& node_list) const {
    Vector f = Vector::Zero(dofs());
    for (int node : node_list) {
        const Index k = free_dof(node, BeamDof::transverse);
        if (k < 0) throw InputError("vk_beam: point load on a constrained DOF");
        f(k) += 1.0;
    }
    return f;
}

std::shared_ptr<const VonKarmanBeam> von_karman_beam(const BeamModelSpec& spec) {
    return std::make_shared<VonKarmanBeam>(spec);
}

}  // namespace qmrom
