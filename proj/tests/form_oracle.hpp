#pragma once
// Dense reference assembly of every named form on a single-triangle mesh.
// Bases are Vandermonde interpolants on the physical triangle, quadrature is
// the collapsed Gauss rule from oracle.hpp, normals come from the vertex list.

#include <memory>

#include "oracle.hpp"
#include "spb/assembly.hpp"

namespace oracle {

inline std::shared_ptr<const spb::Mesh> single_triangle(const spb::Point& a, const spb::Point& b, const spb::Point& c) {
    return std::make_shared<const spb::Mesh>(std::vector<spb::Point>{a, b, c}, std::vector<std::array<int, 3>>{{0, 1, 2}},
                                             [](const spb::Point&) { return spb::BoundaryTag::Navier; });
}

struct FieldBasis {
    std::vector<int> dofs;
    NodalBasis basis;
};

inline FieldBasis field_basis(const spb::LagrangeSpace& s) {
    std::vector<Eigen::Vector2d> nodes;
    std::vector<int> dofs;
    for (int d = 0; d < s.num_dofs(); ++d) {
        dofs.push_back(d);
        nodes.push_back(s.node(d));
    }
    return {dofs, NodalBasis(s.degree(), nodes)};
}

struct Inputs {
    const spb::PhysParams* params = nullptr;
    const spb::LoadData* loads = nullptr;
    const spb::SystemState* state = nullptr; // advecting velocity for c1/c2, potential for k_*
};

/// Full-size dense matrix (bilinear forms, rows = test) or a one-column
/// vector (linear forms).
inline Eigen::MatrixXd assemble_dense(spb::FormId id, const spb::SpaceTriple& sp, const Inputs& in) {
    using spb::FormId;
    const spb::Mesh& m = sp.mesh();
    const spb::PhysParams& prm = *in.params;
    const int n = sp.num_dofs();
    const FieldBasis V = field_basis(sp.velocity()), P = field_basis(sp.pressure()), Q = field_basis(sp.potential());
    const int nv = V.basis.size(), np = P.basis.size(), nf = Q.basis.size();
    const bool vec = !spb::is_matrix_form(id);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, vec ? 1 : n);

    const Eigen::Vector2d x0 = m.vertex(m.cell(0)[0]), x1 = m.vertex(m.cell(0)[1]), x2 = m.vertex(m.cell(0)[2]);
    Eigen::Matrix2d jac;
    jac.col(0) = x1 - x0;
    jac.col(1) = x2 - x0;
    const double det = std::abs(jac.determinant());

    auto velocity_at = [&](const Eigen::Vector2d& x) {
        Eigen::Vector2d w(0.0, 0.0);
        for (int j = 0; j < nv; ++j)
            w += V.basis.value(j, x) * Eigen::Vector2d(in.state->x(sp.u_offset(0) + V.dofs[j]),
                                                       in.state->x(sp.u_offset(1) + V.dofs[j]));
        return w;
    };
    auto potential_at = [&](const Eigen::Vector2d& x) {
        double v = 0.0;
        Eigen::Vector2d g(0.0, 0.0);
        for (int j = 0; j < nf; ++j) {
            v += Q.basis.value(j, x) * in.state->x(sp.psi_offset() + Q.dofs[j]);
            g += Q.basis.grad(j, x) * in.state->x(sp.psi_offset() + Q.dofs[j]);
        }
        return std::make_pair(v, g);
    };

    const Rule2D cell = triangle_rule(10);
    for (std::size_t q = 0; q < cell.w.size(); ++q) {
        const Eigen::Vector2d x = x0 + jac * cell.p[q];
        const double w = cell.w[q] * det;
        const Eigen::Vector2d E = prm.efield(x);
        switch (id) {
            case FormId::a:
                for (int a = 0; a < 2; ++a)
                    for (int i = 0; i < nv; ++i)
                        for (int j = 0; j < nv; ++j)
                            out(sp.u_offset(a) + V.dofs[i], sp.u_offset(a) + V.dofs[j]) +=
                                w * prm.mu * V.basis.grad(i, x).dot(V.basis.grad(j, x));
                break;
            case FormId::b:
                for (int i = 0; i < np; ++i)
                    for (int a = 0; a < 2; ++a)
                        for (int j = 0; j < nv; ++j)
                            out(sp.p_offset() + P.dofs[i], sp.u_offset(a) + V.dofs[j]) -=
                                w * P.basis.value(i, x) * V.basis.grad(j, x)(a);
                break;
            case FormId::d:
                for (int i = 0; i < nf; ++i)
                    for (int j = 0; j < nf; ++j)
                        out(sp.psi_offset() + Q.dofs[i], sp.psi_offset() + Q.dofs[j]) +=
                            w * prm.eps * Q.basis.grad(i, x).dot(Q.basis.grad(j, x));
                break;
            case FormId::c1: {
                const Eigen::Vector2d wv = velocity_at(x);
                for (int a = 0; a < 2; ++a)
                    for (int i = 0; i < nv; ++i)
                        for (int j = 0; j < nf; ++j)
                            out(sp.u_offset(a) + V.dofs[i], sp.psi_offset() + Q.dofs[j]) +=
                                w * wv.dot(Q.basis.grad(j, x)) * E(a) * V.basis.value(i, x);
                break;
            }
            case FormId::c2: {
                const Eigen::Vector2d wv = velocity_at(x);
                for (int i = 0; i < nf; ++i)
                    for (int j = 0; j < nf; ++j)
                        out(sp.psi_offset() + Q.dofs[i], sp.psi_offset() + Q.dofs[j]) +=
                            w * wv.dot(Q.basis.grad(j, x)) * Q.basis.value(i, x);
                break;
            }
            case FormId::k_momentum:
            case FormId::k_potential:
            case FormId::F:
            case FormId::G: {
                double s = 0.0;
                Eigen::Vector2d v(0.0, 0.0);
                if (id == FormId::k_momentum || id == FormId::k_potential) {
                    s = prm.k0 * std::sinh(prm.k1 * potential_at(x).first);
                    v = s * E;
                } else {
                    s = in.loads->g(x);
                    v = in.loads->f(x) + s * E;
                }
                if (id == FormId::k_momentum || id == FormId::F) {
                    for (int a = 0; a < 2; ++a)
                        for (int i = 0; i < nv; ++i) out(sp.u_offset(a) + V.dofs[i], 0) += w * v(a) * V.basis.value(i, x);
                } else {
                    for (int i = 0; i < nf; ++i) out(sp.psi_offset() + Q.dofs[i], 0) += w * s * Q.basis.value(i, x);
                }
                break;
            }
            default: break;
        }
    }

    const bool boundary = id == FormId::a_tau || id == FormId::a_gamma || id == FormId::a_c || id == FormId::b_bnd;
    if (!boundary) return out;
    const std::array<Eigen::Vector2d, 3> xs{x0, x1, x2};
    const double diam = std::max({(x1 - x0).norm(), (x2 - x1).norm(), (x0 - x2).norm()});
    const Rule1D g = gauss01(10);
    for (int e = 0; e < 3; ++e) {
        const Eigen::Vector2d a0 = xs[e], a1 = xs[(e + 1) % 3];
        const double len = (a1 - a0).norm();
        const Eigen::Vector2d t = (a1 - a0) / len;
        const Eigen::Vector2d nrm(t.y(), -t.x()); // outward for counter-clockwise cells
        const Eigen::Vector2d tau(-nrm.y(), nrm.x());
        const double pen = prm.gamma / (prm.penalty_length == spb::PenaltyLength::CellDiameter ? diam : len);
        for (std::size_t q = 0; q < g.w.size(); ++q) {
            const Eigen::Vector2d x = a0 + g.x[q] * (a1 - a0);
            const double w = g.w[q] * len;
            for (int a = 0; a < 2; ++a)
                for (int j = 0; j < nv; ++j) {
                    const double pj = V.basis.value(j, x);
                    const int col = sp.u_offset(a) + V.dofs[j];
                    if (id == FormId::b_bnd) {
                        for (int i = 0; i < np; ++i) out(sp.p_offset() + P.dofs[i], col) += w * P.basis.value(i, x) * nrm(a) * pj;
                        continue;
                    }
                    for (int b = 0; b < 2; ++b)
                        for (int i = 0; i < nv; ++i) {
                            const double pi = V.basis.value(i, x);
                            double v = 0.0;
                            if (id == FormId::a_tau) v = prm.beta * tau(a) * tau(b) * pj * pi;
                            else if (id == FormId::a_gamma) v = pen * nrm(a) * nrm(b) * pj * pi;
                            else v = prm.mu * nrm(a) * V.basis.grad(j, x).dot(nrm) * nrm(b) * pi;
                            out(sp.u_offset(b) + V.dofs[i], col) += w * v;
                        }
                }
        }
    }
    return out;
}

inline const std::vector<spb::FormId>& all_forms() {
    using spb::FormId;
    static const std::vector<FormId> ids{FormId::a,  FormId::a_tau, FormId::a_gamma,    FormId::a_c,
                                         FormId::b,  FormId::b_bnd, FormId::c1,         FormId::c2,
                                         FormId::d,  FormId::k_momentum, FormId::k_potential, FormId::F,
                                         FormId::G};
    return ids;
}

/// Largest relative deviation between the library's assembled form and the
/// dense oracle, over all forms, on the given single-triangle mesh.
struct FormComparison {
    spb::FormId worst_form = spb::FormId::a;
    double worst = 0.0;
    std::vector<std::pair<spb::FormId, double>> per_form;
};

inline FormComparison compare_forms(std::shared_ptr<const spb::Mesh> mesh, unsigned seed) {
    const auto sp = spb::make_space_triple(mesh, 1);
    spb::PhysParams prm;
    prm.mu = 0.7;
    prm.eps = 1.3;
    prm.beta = 2.1;
    prm.gamma = 17.0;
    prm.k0 = 0.9;
    prm.k1 = 1.4;
    prm.efield = [](const spb::Point& x) { return Eigen::Vector2d(1.0 + x.x(), -0.5 + x.y() * x.x()); };
    spb::LoadData loads = spb::LoadData::zero();
    loads.f = [](const spb::Point& x) { return Eigen::Vector2d(x.x() * x.y() - 1.0, 2.0 + x.y()); };
    loads.g = [](const spb::Point& x) { return 1.0 - x.x() + 3.0 * x.y() * x.y(); };
    spb::SystemState st(sp);
    std::srand(seed);
    st.x = Eigen::VectorXd::Random(sp->num_dofs());
    // sinh terms beyond the cubic exceed degree 10; a small argument keeps them below 1e-11
    st.psi() *= 0.01;
    const Inputs in{&prm, &loads, &st};
    FormComparison res;
    for (spb::FormId id : all_forms()) {
        const Eigen::MatrixXd ref = assemble_dense(id, *sp, in);
        Eigen::MatrixXd got;
        if (spb::is_matrix_form(id)) {
            got = Eigen::MatrixXd(spb::assemble_form_matrix(id, *sp, prm, &st, spb::kMaxQuadratureDegree));
        } else {
            got = spb::assemble_form_vector(id, *sp, prm, &loads, &st, spb::kMaxQuadratureDegree);
        }
        const double d = rel_diff(got, ref);
        res.per_form.emplace_back(id, d);
        if (d > res.worst || std::isnan(d)) {
            res.worst = d;
            res.worst_form = id;
        }
    }
    return res;
}

} // namespace oracle
