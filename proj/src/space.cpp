#include <algorithm>
#include <string>

#include "spb/errors.hpp"
#include "spb/fespace.hpp"

namespace spb {

LagrangeSpace::LagrangeSpace(std::shared_ptr<const Mesh> mesh, int degree, EssentialBoundary essential)
    : mesh_(std::move(mesh)), basis_(&lagrange_basis(degree)) {
    const Mesh& m = *mesh_;
    const int nv = m.num_vertices();
    const int nf = m.num_facets();
    const int per_edge = degree - 1;
    const int per_cell = (degree - 1) * (degree - 2) / 2;
    const int nd = dofs_per_cell();

    nodes_.reserve(nv + static_cast<std::size_t>(nf) * per_edge + static_cast<std::size_t>(m.num_cells()) * per_cell);
    for (const auto& v : m.vertices()) nodes_.push_back(v);
    for (int f = 0; f < nf; ++f) {
        const Point& a = m.vertex(m.facet(f).vertices[0]);
        const Point& b = m.vertex(m.facet(f).vertices[1]);
        for (int j = 1; j <= per_edge; ++j) nodes_.push_back(a + (static_cast<double>(j) / degree) * (b - a));
    }
    const int interior_base = static_cast<int>(nodes_.size());
    if (per_cell > 0)
        for (int c = 0; c < m.num_cells(); ++c) nodes_.push_back(m.cell_centroid(c));

    cell_dofs_.resize(static_cast<std::size_t>(m.num_cells()) * nd);
    for (int c = 0; c < m.num_cells(); ++c) {
        int* d = cell_dofs_.data() + static_cast<std::size_t>(c) * nd;
        const auto& k = m.cell(c);
        for (int i = 0; i < 3; ++i) d[i] = k[i];
        for (int le = 0; le < 3; ++le) {
            const int f = m.cell_facets(c)[le];
            const bool same = k[(le + 1) % 3] == m.facet(f).vertices[0];
            const int base = nv + f * per_edge;
            for (int j = 1; j <= per_edge; ++j) d[3 + le * per_edge + (j - 1)] = base + (same ? j - 1 : per_edge - j);
        }
        if (per_cell > 0) d[nd - 1] = interior_base + c;
    }

    essential_.assign(nodes_.size(), 0);
    if (essential == EssentialBoundary::None) return;
    for (int f = 0; f < nf; ++f) {
        const Facet& fc = m.facet(f);
        if (!fc.is_boundary()) continue;
        if (essential == EssentialBoundary::DirichletTagged && fc.tag != BoundaryTag::Dirichlet) continue;
        essential_[fc.vertices[0]] = 1;
        essential_[fc.vertices[1]] = 1;
        for (int j = 0; j < per_edge; ++j) essential_[nv + f * per_edge + j] = 1;
    }
}

int LagrangeSpace::num_essential() const {
    return static_cast<int>(std::count(essential_.begin(), essential_.end(), 1));
}

SpaceTriple::SpaceTriple(std::shared_ptr<const Mesh> mesh, int k)
    : mesh_(mesh), k_(k), velocity_(mesh, k + 1, EssentialBoundary::DirichletTagged),
      pressure_(mesh, k, EssentialBoundary::None), potential_(mesh, k + 1, EssentialBoundary::AllBoundary) {
    if (k < 1 || k > 2) throw CapabilityError("pressure degree k=" + std::to_string(k) + " unsupported (1..2)");
}

std::shared_ptr<const SpaceTriple> make_space_triple(std::shared_ptr<const Mesh> mesh, int k) {
    if (k < 1 || k > 2) throw CapabilityError("pressure degree k=" + std::to_string(k) + " unsupported (1..2)");
    return std::make_shared<const SpaceTriple>(std::move(mesh), k);
}

Eigen::VectorXd interpolate(const LagrangeSpace& space, const ScalarField& f) {
    Eigen::VectorXd out(space.num_dofs());
    for (int i = 0; i < space.num_dofs(); ++i) out(i) = f(space.node(i));
    return out;
}

SystemState interpolate(std::shared_ptr<const SpaceTriple> space, const VectorField& u, const ScalarField& p,
                        const ScalarField& psi) {
    SystemState s(std::move(space));
    const LagrangeSpace& vs = s.space->velocity();
    for (int i = 0; i < vs.num_dofs(); ++i) {
        const Eigen::Vector2d val = u(vs.node(i));
        s.u(0)(i) = val.x();
        s.u(1)(i) = val.y();
    }
    s.p() = interpolate(s.space->pressure(), p);
    s.psi() = interpolate(s.space->potential(), psi);
    return s;
}

namespace {

CellwisePolynomial project_impl(int degree, int comps, const std::function<void(const Point&, double*)>& f,
                                const Mesh& m, int quad_degree) {
    const LagrangeBasis& basis = lagrange_basis(degree);
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, std::max(quad_degree, 2 * degree));
    const Tabulation tab = basis.tabulate(rule.points);
    const int nb = basis.size();
    Eigen::MatrixXd ref_mass = Eigen::MatrixXd::Zero(nb, nb);
    for (int q = 0; q < rule.size(); ++q)
        ref_mass += rule.weights[q] * tab.values.row(q).transpose() * tab.values.row(q);
    const Eigen::LDLT<Eigen::MatrixXd> mass_inv(ref_mass);

    CellwisePolynomial out;
    out.degree = degree;
    out.components = comps;
    out.coeffs.resize(static_cast<Eigen::Index>(m.num_cells()) * comps, nb);
    std::vector<double> val(comps);
    Eigen::MatrixXd rhs(nb, comps);
    for (int c = 0; c < m.num_cells(); ++c) {
        const CellMap cm = cell_map(m, c);
        rhs.setZero();
        for (int q = 0; q < rule.size(); ++q) {
            f(cm.to_physical(rule.points[q]), val.data());
            for (int k = 0; k < comps; ++k) rhs.col(k) += rule.weights[q] * val[k] * tab.values.row(q).transpose();
        }
        // The |det J| factor cancels between mass matrix and load.
        const Eigen::MatrixXd sol = mass_inv.solve(rhs);
        for (int k = 0; k < comps; ++k) out.coeffs.row(c * comps + k) = sol.col(k).transpose();
    }
    return out;
}

} // namespace

CellwisePolynomial project_elementwise(int degree, const ScalarField& f, const Mesh& m, int quad_degree) {
    return project_impl(degree, 1, [&](const Point& x, double* v) { v[0] = f(x); }, m, quad_degree);
}

CellwisePolynomial project_elementwise(int degree, const VectorField& f, const Mesh& m, int quad_degree) {
    return project_impl(
        degree, 2,
        [&](const Point& x, double* v) {
            const Eigen::Vector2d r = f(x);
            v[0] = r.x();
            v[1] = r.y();
        },
        m, quad_degree);
}

} // namespace spb
