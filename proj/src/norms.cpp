#include <array>
#include <cmath>
#include <vector>

#include "spb/errors.hpp"
#include "spb/fespace.hpp"
#include "spb/parallel.hpp"

namespace spb {

namespace {

void gather(const SystemState& s, int c, Eigen::VectorXd& ux, Eigen::VectorXd& uy, Eigen::VectorXd& p,
            Eigen::VectorXd& psi) {
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

ErrorNorms compute(const SystemState& s, const ExactFields* exact) {
    if (!s.space) throw UsageError("state has no space");
    if (s.x.size() != s.space->num_dofs()) throw UsageError("state length does not match its space");
    const SpaceTriple& sp = *s.space;
    const Mesh& m = sp.mesh();
    const int qd = std::min(kMaxQuadratureDegree, sp.quad_degree() + 2);
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, qd);
    const QuadratureRule& erule = quad_rule(QuadDomain::Edge, qd);
    const int kv = sp.velocity().degree(), kp = sp.pressure().degree(), kf = sp.potential().degree();
    const Tabulation& tv = cell_tabulation(kv, qd);
    const Tabulation& tp = cell_tabulation(kp, qd);
    const Tabulation& tf = cell_tabulation(kf, qd);
    const double sign = exact != nullptr ? -1.0 : 1.0; // error = exact - discrete

    std::vector<std::array<double, 4>> cell_part(m.num_cells());
    parallel_for(m.num_cells(), [&](int begin, int end) {
        Eigen::VectorXd ux, uy, pc, fc;
        for (int c = begin; c < end; ++c) {
            gather(s, c, ux, uy, pc, fc);
            const CellMap cm = cell_map(m, c);
            std::array<double, 4> acc{0, 0, 0, 0};
            for (int q = 0; q < rule.size(); ++q) {
                const double w = rule.weights[q] * cm.det;
                Eigen::Matrix2d gu;
                gu.row(0) = cm.grad(tv.dx.row(q).dot(ux), tv.dy.row(q).dot(ux)).transpose();
                gu.row(1) = cm.grad(tv.dx.row(q).dot(uy), tv.dy.row(q).dot(uy)).transpose();
                double e_p = tp.values.row(q).dot(pc);
                double e_f = tf.values.row(q).dot(fc);
                Point g_f = cm.grad(tf.dx.row(q).dot(fc), tf.dy.row(q).dot(fc));
                gu *= sign;
                e_p *= sign;
                e_f *= sign;
                g_f *= sign;
                if (exact != nullptr) {
                    const Point x = cm.to_physical(rule.points[q]);
                    gu += exact->grad_u(x);
                    e_p += exact->p(x);
                    e_f += exact->psi(x);
                    g_f += exact->grad_psi(x);
                }
                acc[0] += w * gu.squaredNorm();
                acc[1] += w * e_p * e_p;
                acc[2] += w * e_f * e_f;
                acc[3] += w * g_f.squaredNorm();
            }
            cell_part[c] = acc;
        }
    });

    std::vector<int> nav;
    for (int f = 0; f < m.num_facets(); ++f)
        if (m.facet(f).tag == BoundaryTag::Navier) nav.push_back(f);
    std::vector<double> facet_part(nav.size(), 0.0);
    parallel_for(static_cast<int>(nav.size()), [&](int begin, int end) {
        Eigen::VectorXd ux, uy, pc, fc;
        for (int i = begin; i < end; ++i) {
            const Facet& fct = m.facet(nav[i]);
            const int c = fct.cells[0];
            const int le = fct.local[0];
            gather(s, c, ux, uy, pc, fc);
            const CellMap cm = cell_map(m, c);
            const FacetFrame fr = m.facet_frame(nav[i]);
            const Tabulation& te = edge_tabulation(kv, le, qd);
            double acc = 0.0;
            for (int q = 0; q < erule.size(); ++q) {
                Eigen::Vector2d e(te.values.row(q).dot(ux), te.values.row(q).dot(uy));
                e *= sign;
                if (exact != nullptr) e += exact->u(cm.to_physical(edge_to_reference(le, erule.points[q].x())));
                const double en = e.dot(fr.normal);
                acc += erule.weights[q] * fr.h_e * en * en;
            }
            facet_part[i] = acc / fr.h_e;
        }
    });

    std::array<double, 4> sum{0, 0, 0, 0};
    for (const auto& a : cell_part)
        for (int k = 0; k < 4; ++k) sum[k] += a[k];
    double nav_sum = 0.0;
    for (double v : facet_part) nav_sum += v;

    ErrorNorms n;
    n.u_grad = std::sqrt(sum[0]);
    n.u_navier = std::sqrt(nav_sum);
    n.u_1h = std::sqrt(sum[0] + nav_sum);
    n.p_l2 = std::sqrt(sum[1]);
    n.psi_l2 = std::sqrt(sum[2]);
    n.psi_grad = std::sqrt(sum[3]);
    n.psi_h1 = std::sqrt(sum[2] + sum[3]);
    n.total = std::sqrt(sum[0] + nav_sum + sum[1] + sum[3]);
    n.total_sum = n.u_1h + n.p_l2 + n.psi_grad;
    return n;
}

} // namespace

ErrorNorms error_norms(const SystemState& state, const ExactFields& exact) {
    if (!exact.complete()) throw UsageError("exact fields are missing callbacks");
    return compute(state, &exact);
}

ErrorNorms discrete_norms(const SystemState& state) { return compute(state, nullptr); }

ErrorNorms difference_norms(const SystemState& a, const SystemState& b) {
    if (a.space != b.space) throw UsageError("states live on different spaces");
    SystemState d(a.space);
    d.x = a.x - b.x;
    return discrete_norms(d);
}

} // namespace spb
