#include "spb/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "spb/errors.hpp"
#include "spb/parallel.hpp"

namespace spb {

namespace {

int estimator_degree(const SpaceTriple& sp, int requested) {
    return requested > 0 ? requested : std::min(kMaxQuadratureDegree, sp.quad_degree() + 2);
}

struct Coefficients {
    Eigen::VectorXd ux, uy, p, psi;

    Coefficients(const SystemState& s, int c) {
        const SpaceTriple& sp = *s.space;
        const auto vd = sp.velocity().cell_dofs(c);
        const auto pd = sp.pressure().cell_dofs(c);
        const auto fd = sp.potential().cell_dofs(c);
        ux.resize(static_cast<Eigen::Index>(vd.size()));
        uy.resize(ux.size());
        p.resize(static_cast<Eigen::Index>(pd.size()));
        psi.resize(static_cast<Eigen::Index>(fd.size()));
        for (std::size_t i = 0; i < vd.size(); ++i) {
            ux(static_cast<Eigen::Index>(i)) = s.x(sp.u_offset(0) + vd[i]);
            uy(static_cast<Eigen::Index>(i)) = s.x(sp.u_offset(1) + vd[i]);
        }
        for (std::size_t i = 0; i < pd.size(); ++i) p(static_cast<Eigen::Index>(i)) = s.x(sp.p_offset() + pd[i]);
        for (std::size_t i = 0; i < fd.size(); ++i) psi(static_cast<Eigen::Index>(i)) = s.x(sp.psi_offset() + fd[i]);
    }
};

struct PointValues {
    Eigen::Vector2d u;
    Eigen::Matrix2d G; // G(i, j) = d u_i / d x_j
    Eigen::Vector2d lap_u;
    double p = 0.0;
    Eigen::Vector2d grad_p;
    double psi = 0.0;
    Eigen::Vector2d grad_psi;
    double lap_psi = 0.0;
};

Eigen::Vector2d grad_of(const Tabulation& t, int q, const Eigen::VectorXd& c, const CellMap& cm) {
    return cm.grad(t.dx.row(q).dot(c), t.dy.row(q).dot(c));
}

double lap_of(const Tabulation& t, int q, const Eigen::VectorXd& c, const CellMap& cm) {
    return cm.laplacian(t.dxx.row(q).dot(c), t.dxy.row(q).dot(c), t.dyy.row(q).dot(c));
}

PointValues evaluate(const Coefficients& k, const CellMap& cm, const Tabulation& tv, const Tabulation& tp,
                     const Tabulation& tf, int q) {
    PointValues v;
    v.u = {tv.values.row(q).dot(k.ux), tv.values.row(q).dot(k.uy)};
    v.G.row(0) = grad_of(tv, q, k.ux, cm).transpose();
    v.G.row(1) = grad_of(tv, q, k.uy, cm).transpose();
    v.lap_u = {lap_of(tv, q, k.ux, cm), lap_of(tv, q, k.uy, cm)};
    v.p = tp.values.row(q).dot(k.p);
    v.grad_p = grad_of(tp, q, k.p, cm);
    v.psi = tf.values.row(q).dot(k.psi);
    v.grad_psi = grad_of(tf, q, k.psi, cm);
    v.lap_psi = lap_of(tf, q, k.psi, cm);
    return v;
}

struct EdgeSide {
    int cell;
    int le;
    bool reversed; // quadrature index runs opposite to the primary side
};

EdgeSide side_of(const Mesh& m, const Facet& f, int which) {
    const int c = f.cells[which];
    const int le = f.local[which];
    const int start = m.cell(c)[(le + 1) % 3];
    return {c, le, start != f.vertices[0]};
}

} // namespace

DataProjection project_data(const SpaceTriple& sp, const LoadData& loads, int quad_degree) {
    if (!loads.f || !loads.g) throw UsageError("load data is missing f or g");
    const int qd = estimator_degree(sp, quad_degree);
    const int deg = sp.k() + 1;
    return {project_elementwise(deg, loads.f, sp.mesh(), qd), project_elementwise(deg, loads.g, sp.mesh(), qd)};
}

ElementResiduals element_residuals(const SystemState& s, const PhysParams& params, const LoadData& loads,
                                   const DataProjection& proj, int c, int quad_degree) {
    const SpaceTriple& sp = *s.space;
    const Mesh& m = sp.mesh();
    if (c < 0 || c >= m.num_cells()) throw UsageError("cell index out of range");
    const int qd = estimator_degree(sp, quad_degree);
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, qd);
    const Tabulation& tv = cell_tabulation(sp.velocity().degree(), qd);
    const Tabulation& tp = cell_tabulation(sp.pressure().degree(), qd);
    const Tabulation& tf = cell_tabulation(sp.potential().degree(), qd);
    const Tabulation& td = cell_tabulation(proj.f.degree, qd);
    const Coefficients k(s, c);
    const CellMap cm = cell_map(m, c);
    const ChargeLaw law = params.charge();
    const Eigen::VectorXd fx = proj.f.values(c, 0, td), fy = proj.f.values(c, 1, td), gh = proj.g.values(c, 0, td);
    (void)loads;

    ElementResiduals out;
    for (int q = 0; q < rule.size(); ++q) {
        const Point x = cm.to_physical(rule.points[q]);
        const PointValues v = evaluate(k, cm, tv, tp, tf, q);
        const Eigen::Vector2d E = params.efield(x);
        const double K = law.value(v.psi);
        const double adv = v.u.dot(v.grad_psi);
        out.points.push_back(x);
        out.weights.push_back(rule.weights[q] * std::abs(cm.det));
        out.r_momentum.push_back(Eigen::Vector2d(fx(q), fy(q)) + (gh(q) - K) * E + params.mu * v.lap_u - v.grad_p -
                                 adv * E);
        out.r_div.push_back(v.G.trace());
        out.r_potential.push_back(gh(q) - K - adv + params.eps * v.lap_psi);
    }
    return out;
}

FacetResiduals facet_residuals(const SystemState& s, const PhysParams& params, int fid, bool swap, int quad_degree) {
    const SpaceTriple& sp = *s.space;
    const Mesh& m = sp.mesh();
    if (fid < 0 || fid >= m.num_facets()) throw UsageError("facet index out of range");
    const int qd = estimator_degree(sp, quad_degree);
    const QuadratureRule& erule = quad_rule(QuadDomain::Edge, qd);
    const int nq = erule.size();
    const Facet& f = m.facet(fid);
    const double he = m.facet_length(fid);
    FacetResiduals out;
    out.weights.resize(nq);
    for (int q = 0; q < nq; ++q) out.weights[q] = erule.weights[q] * he;
    out.r_stress.assign(nq, Eigen::Vector2d::Zero());
    out.r_flux.assign(nq, 0.0);
    if (f.is_boundary()) return out;

    EdgeSide a = side_of(m, f, 0), b = side_of(m, f, 1);
    if (swap) {
        std::swap(a, b);
        // Orientation flags are relative to the K- edge direction; re-base on the new primary.
        const bool a_rev = a.reversed;
        a.reversed = false;
        b.reversed = b.reversed != a_rev;
    }
    const int kv = sp.velocity().degree(), kp = sp.pressure().degree(), kf = sp.potential().degree();
    const Coefficients ka(s, a.cell), kb(s, b.cell);
    const CellMap ca = cell_map(m, a.cell), cb = cell_map(m, b.cell);
    const Eigen::Vector2d n = m.outward_normal(a.cell, a.le);
    for (int q = 0; q < nq; ++q) {
        const int qb = b.reversed ? nq - 1 - q : q;
        const PointValues va = evaluate(ka, ca, edge_tabulation(kv, a.le, qd), edge_tabulation(kp, a.le, qd),
                                        edge_tabulation(kf, a.le, qd), q);
        const PointValues vb = evaluate(kb, cb, edge_tabulation(kv, b.le, qd), edge_tabulation(kp, b.le, qd),
                                        edge_tabulation(kf, b.le, qd), qb);
        out.r_stress[q] = 0.5 * ((va.p - vb.p) * n - params.mu * (va.G - vb.G) * n);
        out.r_flux[q] = 0.5 * params.eps * (va.grad_psi - vb.grad_psi).dot(n);
    }
    return out;
}

BoundaryResiduals boundary_residuals(const SystemState& s, const PhysParams& params, const LoadData& loads, int fid,
                                     int quad_degree) {
    const SpaceTriple& sp = *s.space;
    const Mesh& m = sp.mesh();
    if (fid < 0 || fid >= m.num_facets()) throw UsageError("facet index out of range");
    const Facet& f = m.facet(fid);
    if (f.tag != BoundaryTag::Navier) throw UsageError("facet " + std::to_string(fid) + " is not a Navier facet");
    const int qd = estimator_degree(sp, quad_degree);
    const QuadratureRule& erule = quad_rule(QuadDomain::Edge, qd);
    const FacetFrame fr = m.facet_frame(fid);
    const int c = f.cells[0], le = f.local[0];
    const Coefficients k(s, c);
    const CellMap cm = cell_map(m, c);
    const Tabulation& tv = edge_tabulation(sp.velocity().degree(), le, qd);
    const Tabulation& tp = edge_tabulation(sp.pressure().degree(), le, qd);
    const Tabulation& tf = edge_tabulation(sp.potential().degree(), le, qd);
    BoundaryResiduals out;
    for (int q = 0; q < erule.size(); ++q) {
        const Point x = cm.to_physical(edge_to_reference(le, erule.points[q].x()));
        const PointValues v = evaluate(k, cm, tv, tp, tf, q);
        out.weights.push_back(erule.weights[q] * fr.h_e);
        out.r_tangential.push_back(params.mu * fr.tangent.dot(v.G * fr.normal) + params.beta * v.u.dot(fr.tangent) -
                                   loads.g_tau(x, fr.normal));
        out.r_normal.push_back(v.u.dot(fr.normal) - loads.g_n(x, fr.normal));
    }
    return out;
}

EstimatorReport compute_indicators(const SystemState& s, const PhysParams& params, const LoadData& loads,
                                   const ExactFields* exact, const EstimatorOptions& opts) {
    if (!s.space) throw UsageError("state has no space");
    if (!loads.complete()) throw UsageError("load data is missing callbacks");
    const SpaceTriple& sp = *s.space;
    const Mesh& m = sp.mesh();
    const int qd = estimator_degree(sp, opts.quad_degree);
    const DataProjection proj = project_data(sp, loads, qd);
    const Tabulation& td = cell_tabulation(proj.f.degree, qd);

    EstimatorReport rep;
    rep.cells.resize(m.num_cells());
    parallel_for(m.num_cells(), [&](int begin, int end) {
        for (int c = begin; c < end; ++c) {
            const ElementResiduals r = element_residuals(s, params, loads, proj, c, qd);
            const double hk = opts.cell_size == CellSize::Diameter ? m.cell_diameter(c)
                                                                  : std::sqrt(std::abs(cell_map(m, c).det));
            double rk = 0.0, r1 = 0.0, r2 = 0.0, of = 0.0, og = 0.0;
            const Eigen::VectorXd fx = proj.f.values(c, 0, td), fy = proj.f.values(c, 1, td);
            const Eigen::VectorXd gh = proj.g.values(c, 0, td);
            for (std::size_t q = 0; q < r.weights.size(); ++q) {
                const double w = r.weights[q];
                rk += w * r.r_momentum[q].squaredNorm();
                r1 += w * r.r_div[q] * r.r_div[q];
                r2 += w * r.r_potential[q] * r.r_potential[q];
                const auto qi = static_cast<Eigen::Index>(q);
                of += w * (loads.f(r.points[q]) - Eigen::Vector2d(fx(qi), fy(qi))).squaredNorm();
                const double dg = loads.g(r.points[q]) - gh(qi);
                og += w * dg * dg;
            }
            rep.cells[c].psi_R_sq = hk * hk * rk + r1 + hk * hk * r2;
            rep.cells[c].osc_sq = hk * hk * (of + og);
        }
    });

    std::vector<double> facet_sq(m.num_facets(), 0.0);
    parallel_for(m.num_facets(), [&](int begin, int end) {
        for (int f = begin; f < end; ++f) {
            const Facet& fc = m.facet(f);
            const double he = m.facet_length(f);
            double acc = 0.0;
            if (!fc.is_boundary()) {
                const FacetResiduals r = facet_residuals(s, params, f, opts.swap_facet_convention, qd);
                for (std::size_t q = 0; q < r.weights.size(); ++q)
                    acc += r.weights[q] * (r.r_stress[q].squaredNorm() + r.r_flux[q] * r.r_flux[q]);
                facet_sq[f] = he * acc;
            } else if (fc.tag == BoundaryTag::Navier) {
                const BoundaryResiduals r = boundary_residuals(s, params, loads, f, qd);
                double t = 0.0, nn = 0.0;
                for (std::size_t q = 0; q < r.weights.size(); ++q) {
                    t += r.weights[q] * r.r_tangential[q] * r.r_tangential[q];
                    nn += r.weights[q] * r.r_normal[q] * r.r_normal[q];
                }
                facet_sq[f] = he * t + nn / he;
            }
        }
    });

    double sum_psi = 0.0, sum_osc = 0.0, sum_r = 0.0, sum_e = 0.0, sum_j = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
        ElementIndicator& ind = rep.cells[c];
        for (int le = 0; le < 3; ++le) {
            const int f = m.cell_facets(c)[le];
            if (m.facet(f).is_boundary()) ind.psi_J_sq += facet_sq[f];
            else ind.psi_e_sq += facet_sq[f];
        }
        const double sq = ind.psi_R_sq + ind.psi_e_sq + ind.psi_J_sq;
        ind.psi_K = std::sqrt(sq);
        sum_psi += sq;
        sum_osc += ind.osc_sq;
        sum_r += ind.psi_R_sq;
        sum_e += ind.psi_e_sq;
        sum_j += ind.psi_J_sq;
    }
    rep.psi = std::sqrt(sum_psi);
    rep.theta = std::sqrt(sum_osc);
    rep.psi_R = std::sqrt(sum_r);
    rep.psi_e = std::sqrt(sum_e);
    rep.psi_J = std::sqrt(sum_j);
    rep.effectivity = std::numeric_limits<double>::quiet_NaN();
    if (exact != nullptr) {
        rep.error_total = error_norms(s, *exact).total;
        rep.effectivity = rep.psi / rep.error_total;
    }
    return rep;
}

std::set<int> mark_max_strategy(const EstimatorReport& report, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw UsageError("marking fraction theta must lie in (0, 1)");
    if (report.cells.empty()) throw UsageError("empty indicator report");
    double mx = 0.0;
    for (const auto& c : report.cells) mx = std::max(mx, c.psi_K);
    std::set<int> out;
    for (int i = 0; i < static_cast<int>(report.cells.size()); ++i)
        if (report.cells[i].psi_K >= theta * mx) out.insert(i);
    return out;
}

void write_indicator_csv(std::ostream& os, const EstimatorReport& report) {
    const auto old = os.precision(17);
    os << "cell_id,psi_R,psi_e,psi_J,psi_K,osc\n";
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        const ElementIndicator& c = report.cells[i];
        os << i << ',' << std::sqrt(c.psi_R_sq) << ',' << std::sqrt(c.psi_e_sq) << ',' << std::sqrt(c.psi_J_sq) << ','
           << c.psi_K << ',' << std::sqrt(c.osc_sq) << '\n';
    }
    os.precision(old);
}

} // namespace spb
