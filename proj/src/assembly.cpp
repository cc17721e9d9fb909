#include "spb/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "spb/errors.hpp"
#include "spb/parallel.hpp"

namespace spb {

// ------------------------------------------------------------ scalar laws

void ChargeLaw::guard(double s) const {
    if (!(std::abs(k1_ * s) <= kMaxArgument)) {
        std::ostringstream os;
        os << std::setprecision(17) << "charge law argument k1*s out of range at s=" << s << " (|k1*s| > "
           << kMaxArgument << ")";
        throw DomainError(os.str());
    }
}

double ChargeLaw::value(double s) const {
    guard(s);
    return k0_ * std::sinh(k1_ * s);
}

double ChargeLaw::derivative(double s) const {
    guard(s);
    return k0_ * k1_ * std::cosh(k1_ * s);
}

std::vector<std::string> PhysParams::validate() const {
    const std::pair<const char*, double> scalars[] = {{"mu", mu},       {"eps", eps}, {"beta", beta},
                                                      {"gamma", gamma}, {"k0", k0},   {"k1", k1}};
    for (const auto& [name, v] : scalars)
        if (!(v > 0.0) || !std::isfinite(v))
            throw UsageError(std::string("parameter ") + name + " must be positive and finite");
    if (!efield) throw UsageError("electric field callback missing");
    std::vector<std::string> warnings;
    if (gamma < gamma_floor) {
        std::ostringstream os;
        os << "gamma=" << gamma << " is below the coercivity floor " << gamma_floor;
        warnings.push_back(os.str());
    }
    return warnings;
}

LoadData LoadData::zero() {
    LoadData d;
    d.f = [](const Point&) { return Eigen::Vector2d(0.0, 0.0); };
    d.g = [](const Point&) { return 0.0; };
    d.g_n = [](const Point&, const Eigen::Vector2d&) { return 0.0; };
    d.g_tau = d.g_n;
    d.u_dirichlet = d.f;
    d.psi_dirichlet = d.g;
    return d;
}

namespace {

// Local unknown ordering inside one cell: [ux | uy | p | psi].
struct Layout {
    int nv = 0, np = 0, nf = 0;
    [[nodiscard]] int n() const { return 2 * nv + np + nf; }
    [[nodiscard]] int u(int comp) const { return comp * nv; }
    [[nodiscard]] int p() const { return 2 * nv; }
    [[nodiscard]] int f() const { return 2 * nv + np; }
    /// 0 = velocity, 1 = pressure, 2 = potential.
    [[nodiscard]] int block(int i) const { return i < 2 * nv ? 0 : (i < 2 * nv + np ? 1 : 2); }
};

Layout layout_of(const SpaceTriple& sp) {
    return {sp.velocity().dofs_per_cell(), sp.pressure().dofs_per_cell(), sp.potential().dofs_per_cell()};
}

void global_dofs(const SpaceTriple& sp, const Layout& L, int c, int* g) {
    const auto vd = sp.velocity().cell_dofs(c);
    const auto pd = sp.pressure().cell_dofs(c);
    const auto fd = sp.potential().cell_dofs(c);
    for (int i = 0; i < L.nv; ++i) {
        g[L.u(0) + i] = sp.u_offset(0) + vd[i];
        g[L.u(1) + i] = sp.u_offset(1) + vd[i];
    }
    for (int i = 0; i < L.np; ++i) g[L.p() + i] = sp.p_offset() + pd[i];
    for (int i = 0; i < L.nf; ++i) g[L.f() + i] = sp.psi_offset() + fd[i];
}

bool couples(int a, int b) { return !((a == 1 && b != 0) || (b == 1 && a != 0)); }

int block_of(const SpaceTriple& sp, int dof) { return dof < sp.p_offset() ? 0 : (dof < sp.psi_offset() ? 1 : 2); }

struct Pattern {
    int n = 0;
    std::vector<int> outer, inner;

    [[nodiscard]] int position(int row, int col) const {
        const auto b = inner.begin() + outer[row];
        const auto e = inner.begin() + outer[row + 1];
        const auto it = std::lower_bound(b, e, col);
        return static_cast<int>(it - inner.begin());
    }
};

Pattern build_pattern(const SpaceTriple& sp) {
    const Layout L = layout_of(sp);
    const int n = sp.num_dofs();
    std::vector<std::vector<int>> rows(n);
    std::vector<int> g(L.n());
    for (int c = 0; c < sp.mesh().num_cells(); ++c) {
        global_dofs(sp, L, c, g.data());
        for (int i = 0; i < L.n(); ++i)
            for (int j = 0; j < L.n(); ++j)
                if (couples(L.block(i), L.block(j))) rows[g[i]].push_back(g[j]);
    }
    Pattern p;
    p.n = n;
    p.outer.assign(n + 1, 0);
    for (int r = 0; r < n; ++r) {
        auto& v = rows[r];
        if (block_of(sp, r) != 1) v.push_back(r); // identity rows need their diagonal
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        p.outer[r + 1] = p.outer[r] + static_cast<int>(v.size());
    }
    p.inner.reserve(p.outer[n]);
    for (auto& v : rows) {
        p.inner.insert(p.inner.end(), v.begin(), v.end());
        std::vector<int>().swap(v);
    }
    return p;
}

std::shared_ptr<const Pattern> cached_pattern(const std::shared_ptr<const SpaceTriple>& sp) {
    static std::mutex mutex;
    static std::weak_ptr<const SpaceTriple> key;
    static std::shared_ptr<const Pattern> value;
    std::lock_guard lock(mutex);
    if (value && key.lock() == sp) return value;
    value = std::make_shared<const Pattern>(build_pattern(*sp));
    key = sp;
    return value;
}

CsrMatrix csr_from_pattern(const Pattern& p, const std::vector<double>& values) {
    CsrMatrix a(p.n, p.n);
    a.resizeNonZeros(static_cast<Eigen::Index>(p.inner.size()));
    std::copy(p.outer.begin(), p.outer.end(), a.outerIndexPtr());
    std::copy(p.inner.begin(), p.inner.end(), a.innerIndexPtr());
    std::copy(values.begin(), values.end(), a.valuePtr());
    return a;
}

// --------------------------------------------------------- fused kernel

struct Context {
    const SpaceTriple& sp;
    const Mesh& m;
    const PhysParams& prm;
    const LoadData& loads;
    bool coupling;
    Layout L;
    int qd;
    const QuadratureRule& rule;
    const QuadratureRule& erule;
    const Tabulation& tv;
    const Tabulation& tp;
    const Tabulation& tf;
    std::array<const Tabulation*, 3> tev{};
    std::array<const Tabulation*, 3> tep{};
    ChargeLaw charge;

    Context(const SpaceTriple& s, const PhysParams& p, const LoadData& l, const AssemblyOptions& o)
        : sp(s), m(s.mesh()), prm(p), loads(l), coupling(o.include_coupling), L(layout_of(s)),
          qd(o.quad_degree > 0 ? o.quad_degree : s.quad_degree()), rule(quad_rule(QuadDomain::Triangle, qd)),
          erule(quad_rule(QuadDomain::Edge, qd)), tv(cell_tabulation(s.velocity().degree(), qd)),
          tp(cell_tabulation(s.pressure().degree(), qd)), tf(cell_tabulation(s.potential().degree(), qd)),
          charge(p.charge()) {
        for (int le = 0; le < 3; ++le) {
            tev[le] = &edge_tabulation(s.velocity().degree(), le, qd);
            tep[le] = &edge_tabulation(s.pressure().degree(), le, qd);
        }
    }
};

struct Work {
    Eigen::VectorXd xl;           // local coefficients in Layout order
    Eigen::MatrixXd dv, df;       // physical gradients, rows = basis fns
    Eigen::MatrixXd dref;         // scratch for reference gradients
    std::vector<int> g;
};

void physical_gradients(const Tabulation& t, int q, const Eigen::Matrix2d& jinv, Eigen::MatrixXd& out) {
    out.resize(t.dx.cols(), 2);
    out.col(0) = t.dx.row(q).transpose();
    out.col(1) = t.dy.row(q).transpose();
    out = (out * jinv).eval();
}

/// Residual (and optionally Jacobian) contributions of cell c and of its
/// Navier facets, in local Layout order.
void cell_kernel(const Context& cx, int c, Work& w, bool want_jac, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const Layout& L = cx.L;
    const int nv = L.nv, np = L.np, nf = L.nf;
    const CellMap cm = cell_map(cx.m, c);
    const double mu = cx.prm.mu, eps = cx.prm.eps;
    const auto ux = w.xl.segment(L.u(0), nv);
    const auto uy = w.xl.segment(L.u(1), nv);
    const auto pc = w.xl.segment(L.p(), np);
    const auto fc = w.xl.segment(L.f(), nf);
    r.setZero(L.n());
    if (want_jac) J.setZero(L.n(), L.n());

    for (int q = 0; q < cx.rule.size(); ++q) {
        const double wq = cx.rule.weights[q] * cm.det;
        const Point x = cm.to_physical(cx.rule.points[q]);
        const auto phi = cx.tv.values.row(q).transpose();
        const auto chi = cx.tp.values.row(q).transpose();
        const auto th = cx.tf.values.row(q).transpose();
        physical_gradients(cx.tv, q, cm.jac_inv, w.dv);
        physical_gradients(cx.tf, q, cm.jac_inv, w.df);

        const Eigen::Vector2d u(phi.dot(ux), phi.dot(uy));
        Eigen::Matrix2d G;
        G.row(0) = ux.transpose() * w.dv;
        G.row(1) = uy.transpose() * w.dv;
        const double p = chi.dot(pc);
        const double psi = th.dot(fc);
        const Eigen::Vector2d gpsi = w.df.transpose() * fc;
        const Eigen::Vector2d E = cx.prm.efield(x);
        const Eigen::Vector2d f = cx.loads.f(x);
        const double g = cx.loads.g(x);

        double K = 0.0, Kp = 0.0, s = 0.0;
        if (cx.coupling) {
            K = cx.charge.value(psi);
            Kp = cx.charge.derivative(psi);
            s = u.dot(gpsi);
        }
        for (int a = 0; a < 2; ++a) {
            r.segment(L.u(a), nv) += wq * (mu * (w.dv * G.row(a).transpose()) - p * w.dv.col(a) +
                                           ((s + K - g) * E(a) - f(a)) * phi);
        }
        r.segment(L.p(), np) -= wq * G.trace() * chi;
        r.segment(L.f(), nf) += wq * ((K + s - g) * th + eps * (w.df * gpsi));

        if (!want_jac) continue;
        const Eigen::MatrixXd lap = wq * mu * (w.dv * w.dv.transpose());
        const Eigen::MatrixXd pf = wq * (phi * phi.transpose());
        const Eigen::VectorXd adv = w.df * u + Kp * th; // d/dpsi of (u.grad psi + K)
        for (int a = 0; a < 2; ++a) {
            J.block(L.u(a), L.u(a), nv, nv) += lap;
            J.block(L.u(a), L.p(), nv, np) -= wq * w.dv.col(a) * chi.transpose();
            J.block(L.p(), L.u(a), np, nv) -= wq * chi * w.dv.col(a).transpose();
            if (!cx.coupling) continue;
            for (int b = 0; b < 2; ++b) J.block(L.u(a), L.u(b), nv, nv) += (E(a) * gpsi(b)) * pf;
            J.block(L.u(a), L.f(), nv, nf) += wq * E(a) * phi * adv.transpose();
            J.block(L.f(), L.u(a), nf, nv) += wq * gpsi(a) * th * phi.transpose();
        }
        J.block(L.f(), L.f(), nf, nf) += wq * eps * (w.df * w.df.transpose());
        if (cx.coupling) J.block(L.f(), L.f(), nf, nf) += wq * th * adv.transpose();
    }

    // Symmetric Nitsche terms on Navier facets owned by this cell.
    const double beta = cx.prm.beta;
    for (int le = 0; le < 3; ++le) {
        const int fid = cx.m.cell_facets(c)[le];
        if (cx.m.facet(fid).tag != BoundaryTag::Navier) continue;
        const FacetFrame fr = cx.m.facet_frame(fid);
        const Eigen::Vector2d& n = fr.normal;
        const Eigen::Vector2d& tau = fr.tangent;
        const Tabulation& te = *cx.tev[le];
        const Tabulation& tpe = *cx.tep[le];
        const double pen = cx.prm.penalty(fr.h_e, fr.h_K);
        for (int q = 0; q < cx.erule.size(); ++q) {
            const double wq = cx.erule.weights[q] * fr.h_e;
            const Point x = cm.to_physical(edge_to_reference(le, cx.erule.points[q].x()));
            const auto phi = te.values.row(q).transpose();
            const auto chi = tpe.values.row(q).transpose();
            physical_gradients(te, q, cm.jac_inv, w.dv);
            const Eigen::VectorXd dn = w.dv * n;

            const Eigen::Vector2d u(phi.dot(ux), phi.dot(uy));
            Eigen::Matrix2d G;
            G.row(0) = ux.transpose() * w.dv;
            G.row(1) = uy.transpose() * w.dv;
            const double p = chi.dot(pc);
            const double gn = cx.loads.g_n(x, n);
            const double gt = cx.loads.g_tau(x, n);
            const double jump = u.dot(n) - gn;
            const double gnn = n.dot(G * n);
            const double ut = u.dot(tau);

            for (int a = 0; a < 2; ++a) {
                r.segment(L.u(a), nv) +=
                    wq * ((beta * ut * tau(a) + pen * jump * n(a) - mu * gnn * n(a) + p * n(a) - gt * tau(a)) * phi -
                          mu * n(a) * jump * dn);
            }
            r.segment(L.p(), np) += wq * jump * chi;

            if (!want_jac) continue;
            const Eigen::MatrixXd pf = phi * phi.transpose();
            const Eigen::MatrixXd cons = phi * dn.transpose() + dn * phi.transpose();
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b)
                    J.block(L.u(a), L.u(b), nv, nv) +=
                        wq * ((beta * tau(a) * tau(b) + pen * n(a) * n(b)) * pf - mu * n(a) * n(b) * cons);
                J.block(L.u(a), L.p(), nv, np) += wq * n(a) * phi * chi.transpose();
                J.block(L.p(), L.u(a), np, nv) += wq * n(a) * chi * phi.transpose();
            }
        }
    }
}

void gather_local(const Eigen::VectorXd& x, const std::vector<int>& g, Eigen::VectorXd& xl) {
    xl.resize(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) xl(static_cast<Eigen::Index>(i)) = x(g[i]);
}

void check_state(const SystemState& s, const LoadData& loads) {
    if (!s.space) throw UsageError("state has no space");
    if (s.x.size() != s.space->num_dofs()) throw UsageError("state length does not match its space");
    if (!loads.complete()) throw UsageError("load data is missing callbacks");
}

/// Dirichlet data at every essential dof, NaN elsewhere.
Eigen::VectorXd dirichlet_values(const SpaceTriple& sp, const LoadData& loads) {
    Eigen::VectorXd d = Eigen::VectorXd::Constant(sp.num_dofs(), std::numeric_limits<double>::quiet_NaN());
    const LagrangeSpace& vs = sp.velocity();
    for (int i = 0; i < vs.num_dofs(); ++i) {
        if (!vs.is_essential(i)) continue;
        const Eigen::Vector2d v = loads.u_dirichlet(vs.node(i));
        d(sp.u_offset(0) + i) = v.x();
        d(sp.u_offset(1) + i) = v.y();
    }
    const LagrangeSpace& fs = sp.potential();
    for (int i = 0; i < fs.num_dofs(); ++i)
        if (fs.is_essential(i)) d(sp.psi_offset() + i) = loads.psi_dirichlet(fs.node(i));
    return d;
}

std::vector<char> essential_mask(const SpaceTriple& sp) {
    std::vector<char> e(sp.num_dofs(), 0);
    for (int i = 0; i < sp.velocity().num_dofs(); ++i)
        if (sp.velocity().is_essential(i)) e[sp.u_offset(0) + i] = e[sp.u_offset(1) + i] = 1;
    for (int i = 0; i < sp.potential().num_dofs(); ++i)
        if (sp.potential().is_essential(i)) e[sp.psi_offset() + i] = 1;
    return e;
}

constexpr int kCellBlock = 2048;

/// Runs the fused kernel over all cells in blocks; `sink` consumes each
/// cell's local contributions sequentially in cell order.
template <class Sink>
void sweep(const Context& cx, const Eigen::VectorXd& x, bool want_jac, Sink&& sink) {
    const int nc = cx.m.num_cells();
    const int n = cx.L.n();
    std::vector<Eigen::VectorXd> rs(kCellBlock);
    std::vector<Eigen::MatrixXd> js(want_jac ? kCellBlock : 0);
    std::vector<int> gl(static_cast<std::size_t>(kCellBlock) * n);
    for (int start = 0; start < nc; start += kCellBlock) {
        const int count = std::min(kCellBlock, nc - start);
        parallel_for(count, [&](int b, int e) {
            Work w;
            w.g.resize(n);
            Eigen::MatrixXd dummy;
            for (int i = b; i < e; ++i) {
                const int c = start + i;
                global_dofs(cx.sp, cx.L, c, w.g.data());
                std::copy(w.g.begin(), w.g.end(), gl.begin() + static_cast<std::ptrdiff_t>(i) * n);
                gather_local(x, w.g, w.xl);
                cell_kernel(cx, c, w, want_jac, rs[i], want_jac ? js[i] : dummy);
            }
        });
        for (int i = 0; i < count; ++i)
            sink(gl.data() + static_cast<std::ptrdiff_t>(i) * n, rs[i], want_jac ? &js[i] : nullptr);
    }
}

} // namespace

Eigen::VectorXd assemble_residual(const SystemState& state, const PhysParams& params, const LoadData& loads,
                                  const AssemblyOptions& opts) {
    check_state(state, loads);
    const SpaceTriple& sp = *state.space;
    const Context cx(sp, params, loads, opts);
    Eigen::VectorXd res = Eigen::VectorXd::Zero(sp.num_dofs());
    sweep(cx, state.x, false, [&](const int* g, const Eigen::VectorXd& r, const Eigen::MatrixXd*) {
        for (int i = 0; i < r.size(); ++i) res(g[i]) += r(i);
    });
    const Eigen::VectorXd d = dirichlet_values(sp, loads);
    for (int i = 0; i < sp.num_dofs(); ++i)
        if (!std::isnan(d(i))) res(i) = state.x(i) - d(i);
    return res;
}

BlockSystem assemble_jacobian(const SystemState& state, const PhysParams& params, const LoadData& loads,
                              const AssemblyOptions& opts) {
    check_state(state, loads);
    const SpaceTriple& sp = *state.space;
    const Context cx(sp, params, loads, opts);
    const auto pattern = cached_pattern(state.space);
    std::vector<double> values(pattern->inner.size(), 0.0);
    Eigen::VectorXd res = Eigen::VectorXd::Zero(sp.num_dofs());
    sweep(cx, state.x, true, [&](const int* g, const Eigen::VectorXd& r, const Eigen::MatrixXd* J) {
        const int n = static_cast<int>(r.size());
        for (int i = 0; i < n; ++i) {
            res(g[i]) += r(i);
            const int bi = cx.L.block(i);
            for (int j = 0; j < n; ++j)
                if (couples(bi, cx.L.block(j))) values[pattern->position(g[i], g[j])] += (*J)(i, j);
        }
    });

    BlockSystem sys;
    sys.offsets = {0, sp.p_offset(), sp.psi_offset(), sp.num_dofs()};
    sys.essential = essential_mask(sp);
    const Eigen::VectorXd d = dirichlet_values(sp, loads);
    for (int i = 0; i < sp.num_dofs(); ++i) {
        if (!sys.essential[i]) continue;
        res(i) = state.x(i) - d(i);
        for (int k = pattern->outer[i]; k < pattern->outer[i + 1]; ++k)
            values[k] = pattern->inner[k] == i ? 1.0 : 0.0;
    }
    sys.matrix = csr_from_pattern(*pattern, values);
    sys.rhs = -res;
    return sys;
}

void eliminate_dirichlet_columns(BlockSystem& sys) {
    CsrMatrix& a = sys.matrix;
    for (int i = 0; i < a.outerSize(); ++i) {
        if (i < static_cast<int>(sys.essential.size()) && sys.essential[i]) continue;
        for (CsrMatrix::InnerIterator it(a, i); it; ++it) {
            const auto j = it.col();
            if (j < static_cast<Eigen::Index>(sys.essential.size()) && sys.essential[j] && it.value() != 0.0) {
                sys.rhs(i) -= it.value() * sys.rhs(j);
                it.valueRef() = 0.0;
            }
        }
    }
}

Eigen::VectorXd assemble_nitsche_rhs(const SpaceTriple& sp, const PhysParams& params, const LoadData& loads) {
    if (!loads.g_n || !loads.g_tau) throw UsageError("Navier data callbacks missing");
    const Mesh& m = sp.mesh();
    const int qd = sp.quad_degree();
    const QuadratureRule& erule = quad_rule(QuadDomain::Edge, qd);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.num_dofs());
    for (int f = 0; f < m.num_facets(); ++f) {
        const Facet& fc = m.facet(f);
        if (fc.tag != BoundaryTag::Navier) continue;
        const int c = fc.cells[0], le = fc.local[0];
        const FacetFrame fr = m.facet_frame(f);
        const CellMap cm = cell_map(m, c);
        const Tabulation& te = edge_tabulation(sp.velocity().degree(), le, qd);
        const Tabulation& tpe = edge_tabulation(sp.pressure().degree(), le, qd);
        const auto vd = sp.velocity().cell_dofs(c);
        const auto pd = sp.pressure().cell_dofs(c);
        Eigen::MatrixXd dv;
        for (int q = 0; q < erule.size(); ++q) {
            const double wq = erule.weights[q] * fr.h_e;
            const Point x = cm.to_physical(edge_to_reference(le, erule.points[q].x()));
            const double gn = loads.g_n(x, fr.normal), gt = loads.g_tau(x, fr.normal);
            physical_gradients(te, q, cm.jac_inv, dv);
            const Eigen::VectorXd dn = dv * fr.normal;
            for (int i = 0; i < static_cast<int>(vd.size()); ++i) {
                const double phi = te.values(q, i);
                for (int a = 0; a < 2; ++a)
                    out(sp.u_offset(a) + vd[i]) +=
                        wq * (-params.mu * fr.normal(a) * dn(i) * gn + params.penalty(fr.h_e, fr.h_K) * gn * fr.normal(a) * phi +
                              gt * fr.tangent(a) * phi);
            }
            for (int j = 0; j < static_cast<int>(pd.size()); ++j) out(sp.p_offset() + pd[j]) += wq * tpe.values(q, j) * gn;
        }
    }
    return out;
}

// ------------------------------------------------------------ named forms

namespace {

const std::map<std::string, FormId>& form_names() {
    static const std::map<std::string, FormId> names{
        {"a", FormId::a},         {"a_tau", FormId::a_tau},
        {"a_gamma", FormId::a_gamma}, {"a_c", FormId::a_c},
        {"b", FormId::b},         {"b_bnd", FormId::b_bnd},
        {"c1", FormId::c1},       {"c2", FormId::c2},
        {"d", FormId::d},         {"k_momentum", FormId::k_momentum},
        {"k_potential", FormId::k_potential}, {"F", FormId::F},
        {"G", FormId::G}};
    return names;
}

} // namespace

FormId form_from_string(const std::string& name) {
    const auto& names = form_names();
    const auto it = names.find(name);
    if (it == names.end()) throw UsageError("unknown form id '" + name + "'");
    return it->second;
}

std::string to_string(FormId id) {
    for (const auto& [name, v] : form_names())
        if (v == id) return name;
    return "?";
}

bool is_matrix_form(FormId id) {
    return id != FormId::k_momentum && id != FormId::k_potential && id != FormId::F && id != FormId::G;
}

CsrMatrix assemble_form_matrix(FormId id, const SpaceTriple& sp, const PhysParams& params, const SystemState* frozen,
                               int quad_degree) {
    if (!is_matrix_form(id)) throw UsageError("form " + to_string(id) + " is linear, not bilinear");
    if ((id == FormId::c1 || id == FormId::c2) && (frozen == nullptr || frozen->space.get() != &sp))
        throw UsageError("form " + to_string(id) + " needs an advecting state on the same space");
    const Mesh& m = sp.mesh();
    const int qd = quad_degree > 0 ? quad_degree : sp.quad_degree();
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, qd);
    const QuadratureRule& erule = quad_rule(QuadDomain::Edge, qd);
    const int kv = sp.velocity().degree(), kp = sp.pressure().degree(), kf = sp.potential().degree();
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](int r, int c, double v) {
        if (v != 0.0) trip.emplace_back(r, c, v);
    };

    const bool boundary = id == FormId::a_tau || id == FormId::a_gamma || id == FormId::a_c || id == FormId::b_bnd;
    Eigen::MatrixXd dv, df;
    if (!boundary) {
        const Tabulation& tv = cell_tabulation(kv, qd);
        const Tabulation& tp = cell_tabulation(kp, qd);
        const Tabulation& tf = cell_tabulation(kf, qd);
        for (int c = 0; c < m.num_cells(); ++c) {
            const CellMap cm = cell_map(m, c);
            const auto vd = sp.velocity().cell_dofs(c);
            const auto pd = sp.pressure().cell_dofs(c);
            const auto fd = sp.potential().cell_dofs(c);
            for (int q = 0; q < rule.size(); ++q) {
                const double wq = rule.weights[q] * cm.det;
                const Point x = cm.to_physical(rule.points[q]);
                physical_gradients(tv, q, cm.jac_inv, dv);
                physical_gradients(tf, q, cm.jac_inv, df);
                switch (id) {
                    case FormId::a:
                        for (int a = 0; a < 2; ++a)
                            for (std::size_t i = 0; i < vd.size(); ++i)
                                for (std::size_t j = 0; j < vd.size(); ++j)
                                    add(sp.u_offset(a) + vd[i], sp.u_offset(a) + vd[j],
                                        wq * params.mu * dv.row(i).dot(dv.row(j)));
                        break;
                    case FormId::b:
                        for (std::size_t i = 0; i < pd.size(); ++i)
                            for (int a = 0; a < 2; ++a)
                                for (std::size_t j = 0; j < vd.size(); ++j)
                                    add(sp.p_offset() + pd[i], sp.u_offset(a) + vd[j],
                                        -wq * tp.values(q, i) * dv(j, a));
                        break;
                    case FormId::d:
                        for (std::size_t i = 0; i < fd.size(); ++i)
                            for (std::size_t j = 0; j < fd.size(); ++j)
                                add(sp.psi_offset() + fd[i], sp.psi_offset() + fd[j],
                                    wq * params.eps * df.row(i).dot(df.row(j)));
                        break;
                    case FormId::c1:
                    case FormId::c2: {
                        Eigen::Vector2d w(0.0, 0.0);
                        for (std::size_t i = 0; i < vd.size(); ++i)
                            w += tv.values(q, i) * Eigen::Vector2d(frozen->x(sp.u_offset(0) + vd[i]),
                                                                   frozen->x(sp.u_offset(1) + vd[i]));
                        const Eigen::Vector2d E = params.efield(x);
                        for (std::size_t j = 0; j < fd.size(); ++j) {
                            const double adv = w.dot(df.row(j).transpose());
                            if (id == FormId::c1) {
                                for (int a = 0; a < 2; ++a)
                                    for (std::size_t i = 0; i < vd.size(); ++i)
                                        add(sp.u_offset(a) + vd[i], sp.psi_offset() + fd[j],
                                            wq * adv * E(a) * tv.values(q, i));
                            } else {
                                for (std::size_t i = 0; i < fd.size(); ++i)
                                    add(sp.psi_offset() + fd[i], sp.psi_offset() + fd[j], wq * adv * tf.values(q, i));
                            }
                        }
                        break;
                    }
                    default: break;
                }
            }
        }
    } else {
        for (int f = 0; f < m.num_facets(); ++f) {
            const Facet& fc = m.facet(f);
            if (fc.tag != BoundaryTag::Navier) continue;
            const int c = fc.cells[0], le = fc.local[0];
            const FacetFrame fr = m.facet_frame(f);
            const CellMap cm = cell_map(m, c);
            const Tabulation& te = edge_tabulation(kv, le, qd);
            const Tabulation& tpe = edge_tabulation(kp, le, qd);
            const auto vd = sp.velocity().cell_dofs(c);
            const auto pd = sp.pressure().cell_dofs(c);
            const Eigen::Vector2d& n = fr.normal;
            const Eigen::Vector2d& t = fr.tangent;
            for (int q = 0; q < erule.size(); ++q) {
                const double wq = erule.weights[q] * fr.h_e;
                physical_gradients(te, q, cm.jac_inv, dv);
                for (int a = 0; a < 2; ++a)
                    for (std::size_t j = 0; j < vd.size(); ++j) {
                        const double pj = te.values(q, j);
                        const int col = sp.u_offset(a) + vd[j];
                        if (id == FormId::b_bnd) {
                            for (std::size_t i = 0; i < pd.size(); ++i)
                                add(sp.p_offset() + pd[i], col, wq * tpe.values(q, i) * n(a) * pj);
                            continue;
                        }
                        for (int b = 0; b < 2; ++b)
                            for (std::size_t i = 0; i < vd.size(); ++i) {
                                const double pi = te.values(q, i);
                                double v = 0.0;
                                if (id == FormId::a_tau) v = params.beta * t(a) * t(b) * pj * pi;
                                else if (id == FormId::a_gamma) v = params.penalty(fr.h_e, fr.h_K) * n(a) * n(b) * pj * pi;
                                else v = params.mu * n(a) * dv.row(j).dot(n) * n(b) * pi; // a_c
                                add(sp.u_offset(b) + vd[i], col, wq * v);
                            }
                    }
            }
        }
    }
    CsrMatrix out(sp.num_dofs(), sp.num_dofs());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Eigen::VectorXd assemble_form_vector(FormId id, const SpaceTriple& sp, const PhysParams& params,
                                     const LoadData* loads, const SystemState* state, int quad_degree) {
    if (is_matrix_form(id)) throw UsageError("form " + to_string(id) + " is bilinear, not linear");
    const bool charge_form = id == FormId::k_momentum || id == FormId::k_potential;
    if (charge_form && (state == nullptr || state->space.get() != &sp))
        throw UsageError("form " + to_string(id) + " needs a state on the same space");
    if (!charge_form && (loads == nullptr || !loads->f || !loads->g))
        throw UsageError("form " + to_string(id) + " needs load data");
    const Mesh& m = sp.mesh();
    const int qd = quad_degree > 0 ? quad_degree : sp.quad_degree();
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, qd);
    const Tabulation& tv = cell_tabulation(sp.velocity().degree(), qd);
    const Tabulation& tf = cell_tabulation(sp.potential().degree(), qd);
    const ChargeLaw law = params.charge();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.num_dofs());
    for (int c = 0; c < m.num_cells(); ++c) {
        const CellMap cm = cell_map(m, c);
        const auto vd = sp.velocity().cell_dofs(c);
        const auto fd = sp.potential().cell_dofs(c);
        for (int q = 0; q < rule.size(); ++q) {
            const double wq = rule.weights[q] * cm.det;
            const Point x = cm.to_physical(rule.points[q]);
            double sval = 0.0;
            Eigen::Vector2d vval(0.0, 0.0);
            if (charge_form) {
                double psi = 0.0;
                for (std::size_t i = 0; i < fd.size(); ++i) psi += tf.values(q, i) * state->x(sp.psi_offset() + fd[i]);
                sval = law.value(psi);
                vval = sval * params.efield(x);
            } else {
                sval = loads->g(x);
                vval = loads->f(x) + sval * params.efield(x);
            }
            if (id == FormId::k_momentum || id == FormId::F) {
                for (int a = 0; a < 2; ++a)
                    for (std::size_t i = 0; i < vd.size(); ++i)
                        out(sp.u_offset(a) + vd[i]) += wq * vval(a) * tv.values(q, i);
            } else {
                for (std::size_t i = 0; i < fd.size(); ++i) out(sp.psi_offset() + fd[i]) += wq * sval * tf.values(q, i);
            }
        }
    }
    return out;
}

double eval_form(FormId id, const SystemState& trial, const SystemState& test, const PhysParams& params,
                 const LoadData* loads, const SystemState* convect) {
    if (!trial.space || trial.space != test.space) throw UsageError("form arguments live on different spaces");
    const SpaceTriple& sp = *trial.space;
    if (is_matrix_form(id)) {
        const SystemState& w = convect != nullptr ? *convect : trial;
        const CsrMatrix a = assemble_form_matrix(id, sp, params, &w);
        return test.x.dot(a * trial.x);
    }
    return test.x.dot(assemble_form_vector(id, sp, params, loads, &trial));
}

void write_coordinate(std::ostream& os, const CsrMatrix& a) {
    const auto old = os.precision(17);
    for (int i = 0; i < a.outerSize(); ++i)
        for (CsrMatrix::InnerIterator it(a, i); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    os.precision(old);
}

} // namespace spb
