#include "spb/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "spb/errors.hpp"
#include "spb/jet.hpp"

namespace spb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Vector2d constant_vector(double a, double b) { return {a, b}; }

} // namespace

SolverKind solver_from_string(const std::string& s) {
    if (s == "newton") return SolverKind::Newton;
    if (s == "picard") return SolverKind::Picard;
    throw UsageError("unknown solver '" + s + "' (newton, picard)");
}

std::string to_string(SolverKind s) { return s == SolverKind::Newton ? "newton" : "picard"; }

// ------------------------------------------------------- manufactured data

ExactFields fields_from_stream(JetScalar stream, JetScalar pressure, JetScalar potential) {
    auto at = [](const JetScalar& f, const Point& x) { return f(Jet::variable_x(x.x()), Jet::variable_y(x.y())); };
    ExactFields e;
    e.u = [=](const Point& x) {
        const Jet s = at(stream, x);
        return Eigen::Vector2d(s.d(0, 1), -s.d(1, 0));
    };
    e.grad_u = [=](const Point& x) {
        const Jet s = at(stream, x);
        Eigen::Matrix2d g;
        g << s.d(1, 1), s.d(0, 2), -s.d(2, 0), -s.d(1, 1);
        return g;
    };
    e.lap_u = [=](const Point& x) {
        const Jet s = at(stream, x);
        return Eigen::Vector2d(s.d(2, 1) + s.d(0, 3), -(s.d(3, 0) + s.d(1, 2)));
    };
    e.p = [=](const Point& x) { return at(pressure, x).value(); };
    e.grad_p = [=](const Point& x) {
        const Jet s = at(pressure, x);
        return Eigen::Vector2d(s.d(1, 0), s.d(0, 1));
    };
    e.psi = [=](const Point& x) { return at(potential, x).value(); };
    e.grad_psi = [=](const Point& x) {
        const Jet s = at(potential, x);
        return Eigen::Vector2d(s.d(1, 0), s.d(0, 1));
    };
    e.lap_psi = [=](const Point& x) {
        const Jet s = at(potential, x);
        return s.d(2, 0) + s.d(0, 2);
    };
    return e;
}

LoadData manufactured_data(const ExactFields& ex, const PhysParams& params) {
    if (!ex.complete()) throw UsageError("exact fields are missing derivative callbacks");
    const ChargeLaw law = params.charge();
    const PhysParams prm = params;
    LoadData d;
    d.g = [ex, prm, law](const Point& x) {
        return law.value(ex.psi(x)) + ex.u(x).dot(ex.grad_psi(x)) - prm.eps * ex.lap_psi(x);
    };
    // The coupling factor K + u.grad psi - g collapses to eps lap psi.
    d.f = [ex, prm](const Point& x) -> Eigen::Vector2d {
        return -prm.mu * ex.lap_u(x) + ex.grad_p(x) + prm.eps * ex.lap_psi(x) * prm.efield(x);
    };
    d.g_n = [ex](const Point& x, const Eigen::Vector2d& n) { return ex.u(x).dot(n); };
    d.g_tau = [ex, prm](const Point& x, const Eigen::Vector2d& n) {
        const Eigen::Vector2d tau(-n.y(), n.x());
        return prm.mu * tau.dot(ex.grad_u(x) * n) + prm.beta * ex.u(x).dot(tau);
    };
    d.u_dirichlet = ex.u;
    d.psi_dirichlet = ex.psi;
    return d;
}

// ------------------------------------------------------------------- cases

const std::vector<std::string>& case_names() {
    static const std::vector<std::string> names{"convergence-square", "nonconvex-L",          "nonconvex-C",
                                                "nonconvex-T",        "boundary-layer-triangle", "pipe-obstacle"};
    return names;
}

namespace {

void apply_overrides(PhysParams& p, const CaseOverrides& o) {
    if (o.mu) p.mu = *o.mu;
    if (o.gamma) p.gamma = *o.gamma;
    if (o.beta) p.beta = *o.beta;
    if (o.eps) p.eps = *o.eps;
    if (o.k0) p.k0 = *o.k0;
    if (o.k1) p.k1 = *o.k1;
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

// The discrete pressure is gauged to mean zero; shift the exact one to match.
void subtract_pressure_mean(CaseSpec& c) {
    const Mesh m = refine_uniform(refine_uniform(c.initial_mesh()));
    const QuadratureRule& q = quad_rule(QuadDomain::Triangle, kMaxQuadratureDegree);
    double integral = 0.0, area = 0.0;
    for (int cell = 0; cell < m.num_cells(); ++cell) {
        const CellMap cm = cell_map(m, cell);
        for (int i = 0; i < q.size(); ++i) {
            const double w = q.weights[i] * std::abs(cm.det);
            integral += w * c.exact->p(cm.to_physical(q.points[i]));
            area += w;
        }
    }
    const double mean = integral / area;
    c.exact->p = [p = c.exact->p, mean](const Point& x) { return p(x) - mean; };
}

} // namespace

CaseSpec make_case(const std::string& name, const CaseOverrides& overrides) {
    CaseSpec c;
    c.name = name;
    PhysParams& p = c.params;
    if (name == "convergence-square") {
        p.mu = 1.0;
        p.eps = 1.0;
        p.beta = 1.0;
        p.gamma = 10.0;
        p.k0 = p.k1 = 1.0;
        p.efield = [](const Point&) { return constant_vector(1.0, -1.0); };
        c.domain = {RectangleDomain{{0.0, 0.0, 1.0, 1.0}}, [](const Point& m) {
                        return near(m.x(), 1.0) || near(m.y(), 1.0) ? BoundaryTag::Navier : BoundaryTag::Dirichlet;
                    }};
        c.h0 = 0.25;
        apply_overrides(p, overrides);
        c.exact = fields_from_stream(
            [](const Jet& x, const Jet& y) { return x * x * (1.0 - x) * (1.0 - x) * y * y; },
            [](const Jet& x, const Jet& y) { return sin(std::numbers::pi * x) * sin(std::numbers::pi * y); },
            [](const Jet& x, const Jet& y) { return x * (1.0 - x) * y * (1.0 - y); });
        c.loads = manufactured_data(*c.exact, p);
    } else if (name == "boundary-layer-triangle") {
        p.mu = 1.0;
        p.eps = 10.0;
        p.beta = 10.0;
        p.gamma = 50.0;
        p.k0 = 1.0;
        p.k1 = 10.0;
        p.efield = [](const Point&) { return constant_vector(-10.0, 0.0); };
        c.domain = {UnitTriangleDomain{}, {}};
        c.h0 = 0.25;
        c.assumptions.push_back("Navier slip on the hypotenuse x+y=1, Dirichlet data on both legs");
        apply_overrides(p, overrides);
        const double e50 = std::exp(-50.0);
        c.exact = fields_from_stream(
            [e50](const Jet& x, const Jet& y) {
                const Jet w = 1.0 - x - y;
                const Jet layer = 1.0 - x - (exp(-50.0 * x) - e50) / (1.0 - e50);
                return x * y * y * w * w * layer;
            },
            [](const Jet&, const Jet& y) { return cos(2.0 * std::numbers::pi * y) / 1024.0; },
            [](const Jet& x, const Jet& y) { return (exp(x) + exp(y)) / 1024.0; });
        c.loads = manufactured_data(*c.exact, p);
    } else if (name == "nonconvex-L" || name == "nonconvex-C" || name == "nonconvex-T") {
        p.mu = 1.0;
        p.eps = 1.0;
        p.beta = 1.0;
        p.gamma = 25.0;
        p.k0 = p.k1 = 1.0;
        p.efield = [](const Point&) { return constant_vector(0.0, -1.0); };
        if (name == "nonconvex-L") c.domain = {LShapeDomain{}, {}};
        else if (name == "nonconvex-C") c.domain = {CShapeDomain{}, {}};
        else c.domain = {TShapeDomain{}, {}};
        c.h0 = 0.25;
        c.assumptions.push_back(
            "Navier slip on the edges meeting the re-entrant corners, homogeneous Dirichlet data elsewhere");
        apply_overrides(p, overrides);
        c.loads = LoadData::zero();
        c.loads.f = [](const Point&) { return constant_vector(1.0, 1.0); };
        c.loads.g = [](const Point&) { return 1.0; };
    } else if (name == "pipe-obstacle") {
        p.mu = 1.0;
        p.eps = 1.0;
        p.beta = 1.0;
        p.gamma = 50.0;
        p.k0 = p.k1 = 1.0;
        p.efield = [](const Point&) { return constant_vector(-1.0, 0.0); };
        c.domain = {PipeWithHoleDomain{}, {}};
        c.h0 = 0.05;
        c.gauge = GaugeMode::None;
        c.assumptions.push_back("no-slip walls, Navier obstacle, do-nothing outlet, psi=0 off the inlet");
        apply_overrides(p, overrides);
        c.loads = LoadData::zero();
        c.loads.u_dirichlet = [](const Point& x) {
            if (x.x() > 1e-9) return constant_vector(0.0, 0.0);
            return constant_vector(4.0 * x.y() * (0.41 - x.y()) / (0.41 * 0.41), 0.0);
        };
        c.loads.psi_dirichlet = [](const Point& x) {
            return x.x() > 1e-9 ? 0.0 : std::cos(std::numbers::pi * x.x() + std::numbers::pi * x.y());
        };
    } else {
        std::string list;
        for (const auto& n : case_names()) list += (list.empty() ? "" : ", ") + n;
        throw UsageError("unknown case '" + name + "' (" + list + ")");
    }
    if (c.exact && c.gauge == GaugeMode::MeanZero) subtract_pressure_mean(c);
    return c;
}

// ---------------------------------------------------------------- solving

SystemState prolongate(const SystemState& coarse, std::shared_ptr<const SpaceTriple> fine) {
    const SpaceTriple& cs = *coarse.space;
    const Mesh& cm = cs.mesh();
    const Mesh& fm = fine->mesh();
    if (cs.k() != fine->k()) throw UsageError("prolongation between spaces of different degree");
    SystemState out(fine);
    std::vector<char> done(fine->num_dofs(), 0);
    const LagrangeSpace* spaces[3] = {&fine->velocity(), &fine->pressure(), &fine->potential()};
    const LagrangeSpace* cspaces[3] = {&cs.velocity(), &cs.pressure(), &cs.potential()};
    for (int c = 0; c < fm.num_cells(); ++c) {
        const int parent = fm.parent(c);
        if (parent < 0 || parent >= cm.num_cells()) throw UsageError("fine mesh has no parent link into the coarse mesh");
        const CellMap pm = cell_map(cm, parent);
        for (int b = 0; b < 3; ++b) {
            const LagrangeSpace& fs = *spaces[b];
            const LagrangeSpace& csb = *cspaces[b];
            const auto fd = fs.cell_dofs(c);
            const auto cd = csb.cell_dofs(parent);
            const int ncomp = b == 0 ? 2 : 1;
            for (std::size_t i = 0; i < fd.size(); ++i) {
                const int off0 = b == 0 ? fine->u_offset(0) : (b == 1 ? fine->p_offset() : fine->psi_offset());
                if (done[off0 + fd[i]]) continue;
                const Point ref = pm.to_reference(fs.node(fd[i]));
                const Eigen::VectorXd phi = csb.basis().tabulate(std::span<const Point>(&ref, 1)).values.row(0).transpose();
                for (int comp = 0; comp < ncomp; ++comp) {
                    const int coff = b == 0 ? cs.u_offset(comp) : (b == 1 ? cs.p_offset() : cs.psi_offset());
                    const int foff = b == 0 ? fine->u_offset(comp) : off0;
                    double v = 0.0;
                    for (std::size_t j = 0; j < cd.size(); ++j) v += phi(static_cast<Eigen::Index>(j)) * coarse.x(coff + cd[j]);
                    out.x(foff + fd[i]) = v;
                    done[foff + fd[i]] = 1;
                }
            }
        }
    }
    return out;
}

SolveOutcome solve_on_mesh(const CaseSpec& c, std::shared_ptr<const Mesh> mesh, const RunOptions& opts,
                           const SystemState* guess) {
    const auto space = make_space_triple(std::move(mesh), opts.degree);
    const GaugeMode gauge = opts.gauge.value_or(c.gauge);
    SolveOutcome out;
    NewtonConfig ncfg = opts.newton;
    ncfg.gauge = gauge;
    if (guess != nullptr) {
        if (guess->space->mesh_ptr() != space->mesh_ptr() || guess->space->k() != space->k())
            throw UsageError("initial guess lives on another mesh");
        SystemState g(space);
        g.x = guess->x;
        ncfg.initial_guess = InitialGuess::Provided;
        ncfg.provided = std::move(g);
    }
    if (opts.solver == SolverKind::Newton) {
        out.result = newton_solve(space, c.params, c.loads, ncfg);
    } else {
        PicardConfig pcfg = opts.picard;
        pcfg.inner = ncfg;
        out.result = picard_solve(space, c.params, c.loads, pcfg);
    }
    const ExactFields* ex = c.exact ? &*c.exact : nullptr;
    out.estimate = compute_indicators(out.result.state, c.params, c.loads, ex);
    if (ex != nullptr) out.errors = error_norms(out.result.state, *ex);
    return out;
}

// ------------------------------------------------------------ convergence

double observed_order(double e_prev, double e, double h_prev, double h) {
    return std::log(e_prev / e) / std::log(h_prev / h);
}

ConvergenceResult run_convergence(const CaseSpec& c, int levels, const RunOptions& opts,
                                  const std::function<void(const ConvergenceRow&)>& on_row) {
    if (levels < 1) throw UsageError("at least one level is required");
    if (!c.exact) throw UsageError("case '" + c.name + "' has no exact solution");
    ConvergenceResult res;
    auto mesh = std::make_shared<const Mesh>(c.initial_mesh());
    std::optional<SystemState> prev;
    for (int level = 0; level < levels; ++level) {
        if (level > 0) mesh = std::make_shared<const Mesh>(refine_uniform(*mesh));
        std::optional<SystemState> guess;
        if (prev) guess = prolongate(*prev, make_space_triple(mesh, opts.degree));
        SolveOutcome o;
        try {
            o = solve_on_mesh(c, mesh, opts, guess ? &*guess : nullptr);
        } catch (const std::exception& e) {
            res.ok = false;
            res.message = "level " + std::to_string(level) + ": " + e.what();
            return res;
        }
        ConvergenceRow row;
        row.level = level;
        row.h = mesh->max_h();
        row.dofs = o.result.state.space->num_dofs();
        row.err = *o.errors;
        row.psi = o.estimate.psi;
        row.theta = o.estimate.theta;
        row.effectivity = o.estimate.effectivity;
        row.iterations = o.result.report.iterations;
        if (opts.log != nullptr)
            *opts.log << "level " << level << " h=" << row.h << " dofs=" << row.dofs << " iters=" << row.iterations
                      << " |e|=" << row.err.total << " Psi=" << row.psi << " eff=" << row.effectivity << " ("
                      << o.result.report.wall_time << " s solve)" << std::endl;
        if (!o.result.report.converged) {
            res.ok = false;
            res.message = "level " + std::to_string(level) + ": " + o.result.report.message;
            return res;
        }
        res.rows.push_back(row);
        if (on_row) on_row(row);
        prev = std::move(o.result.state);
    }
    return res;
}

namespace {

void put_order(std::ostream& os, bool first, double e_prev, double e, double h_prev, double h) {
    os << ',';
    if (first) os << "--";
    else os << observed_order(e_prev, e, h_prev, h);
}

void put_value(std::ostream& os, double v) {
    if (std::isnan(v)) os << "--";
    else os << v;
}

} // namespace

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    const auto old = os.precision(17);
    os << "h,dofs,err_u,oc_u,err_p,oc_p,err_psi,oc_psi,err_total,oc_total,err_total_sum,psi,oc_psi_est,effectivity\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ConvergenceRow& r = rows[i];
        const bool first = i == 0;
        const ConvergenceRow& q = first ? r : rows[i - 1];
        os << r.h << ',' << r.dofs << ',' << r.err.u_1h;
        put_order(os, first, q.err.u_1h, r.err.u_1h, q.h, r.h);
        os << ',' << r.err.p_l2;
        put_order(os, first, q.err.p_l2, r.err.p_l2, q.h, r.h);
        os << ',' << r.err.psi_h1;
        put_order(os, first, q.err.psi_h1, r.err.psi_h1, q.h, r.h);
        os << ',' << r.err.total;
        put_order(os, first, q.err.total, r.err.total, q.h, r.h);
        os << ',' << r.err.total_sum << ',' << r.psi;
        put_order(os, first, q.psi, r.psi, q.h, r.h);
        os << ',' << r.effectivity << '\n';
    }
    os.precision(old);
}

// --------------------------------------------------------------- adaptive

AdaptiveResult run_adaptive(const CaseSpec& c, const AdaptiveOptions& a, const RunOptions& opts,
                            const std::function<void(const AdaptiveRow&)>& on_row) {
    if (!a.uniform && !(a.theta > 0.0 && a.theta < 1.0)) throw UsageError("theta must lie in (0, 1)");
    if (a.max_rounds < 1 || a.max_dofs < 1) throw UsageError("adaptive budgets must be positive");
    namespace fs = std::filesystem;
    if (!a.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(a.out_dir, ec);
        if (ec) throw IoError("cannot create output directory " + a.out_dir + ": " + ec.message());
    }
    AdaptiveResult res;
    auto mesh = std::make_shared<const Mesh>(c.initial_mesh());
    std::optional<SystemState> guess;
    for (int round = 0; round < a.max_rounds; ++round) {
        res.meshes.push_back(mesh);
        SolveOutcome o;
        try {
            o = solve_on_mesh(c, mesh, opts, guess ? &*guess : nullptr);
        } catch (const std::exception& e) {
            res.ok = false;
            res.message = "round " + std::to_string(round) + ": " + e.what();
            return res;
        }
        if (!o.result.report.converged) {
            res.ok = false;
            res.message = "round " + std::to_string(round) + ": " + o.result.report.message;
            return res;
        }
        std::set<int> marked;
        if (!a.uniform) marked = mark_max_strategy(o.estimate, a.theta);
        AdaptiveRow row;
        row.round = round;
        row.dofs = o.result.state.space->num_dofs();
        row.cells = mesh->num_cells();
        row.psi = o.estimate.psi;
        row.theta = o.estimate.theta;
        row.error_total = o.errors ? o.errors->total : kNaN;
        row.effectivity = o.errors ? o.estimate.effectivity : kNaN;
        row.marked = a.uniform ? mesh->num_cells() : static_cast<int>(marked.size());
        row.max_h = mesh->max_h();
        row.min_h = mesh->min_h();
        row.iterations = o.result.report.iterations;
        res.history.push_back(row);
        if (on_row) on_row(row);
        if (opts.log != nullptr)
            *opts.log << "round " << round << " dofs=" << row.dofs << " Psi=" << row.psi << " marked=" << row.marked
                      << " (" << o.result.report.wall_time << " s solve)" << std::endl;
        if (!a.out_dir.empty()) {
            std::ostringstream tag;
            tag << std::setw(3) << std::setfill('0') << round;
            write_mesh_file((fs::path(a.out_dir) / ("mesh_" + tag.str() + ".txt")).string(), *mesh);
            std::ofstream vtk(fs::path(a.out_dir) / ("fields_" + tag.str() + ".vtk"));
            std::ofstream ind(fs::path(a.out_dir) / ("indicators_" + tag.str() + ".csv"));
            if (!vtk || !ind) throw IoError("cannot write round output in " + a.out_dir);
            write_vtk(vtk, o.result.state, &o.estimate);
            write_indicator_csv(ind, o.estimate);
        }
        res.final_state = o.result.state;
        if (round + 1 >= a.max_rounds) break;
        auto next = std::make_shared<const Mesh>(a.uniform ? refine_uniform(*mesh) : refine_bisect(*mesh, marked));
        auto next_space = make_space_triple(next, opts.degree);
        if (next_space->num_dofs() > a.max_dofs) break;
        guess = prolongate(o.result.state, next_space);
        mesh = next;
    }
    return res;
}

void write_adaptive_csv(std::ostream& os, const std::vector<AdaptiveRow>& rows) {
    const auto old = os.precision(17);
    os << "round,dofs,cells,psi,theta,error_total,effectivity,marked,max_h,min_h\n";
    for (const AdaptiveRow& r : rows) {
        os << r.round << ',' << r.dofs << ',' << r.cells << ',' << r.psi << ',' << r.theta << ',';
        put_value(os, r.error_total);
        os << ',';
        put_value(os, r.effectivity);
        os << ',' << r.marked << ',' << r.max_h << ',' << r.min_h << '\n';
    }
    os.precision(old);
}

double loglog_slope(const std::vector<AdaptiveRow>& rows, double min_dofs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.dofs <= min_dofs) continue;
        const double x = std::log(static_cast<double>(r.dofs)), y = std::log(r.psi);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return kNaN;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// -------------------------------------------------------------------- VTK

void write_vtk(std::ostream& os, const SystemState& s, const EstimatorReport* report) {
    const SpaceTriple& sp = *s.space;
    const Mesh& m = sp.mesh();
    const auto old = os.precision(17);
    os << "# vtk DataFile Version 3.0\nSPB solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << m.num_vertices() << " double\n";
    for (const auto& v : m.vertices()) os << v.x() << ' ' << v.y() << " 0\n";
    os << "CELLS " << m.num_cells() << ' ' << 4 * m.num_cells() << '\n';
    for (const auto& c : m.cells()) os << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    os << "CELL_TYPES " << m.num_cells() << '\n';
    for (int c = 0; c < m.num_cells(); ++c) os << "5\n";
    // Vertex dofs come first in every space, so dof i is the value at vertex i.
    os << "POINT_DATA " << m.num_vertices() << "\nVECTORS u double\n";
    for (int v = 0; v < m.num_vertices(); ++v)
        os << s.x(sp.u_offset(0) + v) << ' ' << s.x(sp.u_offset(1) + v) << " 0\n";
    os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < m.num_vertices(); ++v) os << s.x(sp.p_offset() + v) << '\n';
    os << "SCALARS psi double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < m.num_vertices(); ++v) os << s.x(sp.psi_offset() + v) << '\n';
    if (report != nullptr && static_cast<int>(report->cells.size()) == m.num_cells()) {
        os << "CELL_DATA " << m.num_cells() << "\nSCALARS psi_K double 1\nLOOKUP_TABLE default\n";
        for (const auto& c : report->cells) os << c.psi_K << '\n';
    }
    os.precision(old);
    if (!os) throw IoError("failed writing VTK output");
}

// ----------------------------------------------------------------- config

std::map<std::string, std::string> read_config(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    return read_config(is);
}

} // namespace spb
