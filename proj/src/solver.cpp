#include "spb/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

extern "C" {
#include <umfpack.h>
}

#include "spb/errors.hpp"

namespace spb {

GaugeMode gauge_from_string(const std::string& s) {
    if (s == "mean-zero" || s == "mean_zero") return GaugeMode::MeanZero;
    if (s == "none") return GaugeMode::None;
    throw UsageError("unknown gauge mode '" + s + "' (mean-zero, none)");
}

std::string to_string(GaugeMode g) { return g == GaugeMode::MeanZero ? "mean-zero" : "none"; }

// ---------------------------------------------------------------- SparseLU

SparseLU::SparseLU() = default;

SparseLU::~SparseLU() {
    release_numeric();
    release_symbolic();
}

void SparseLU::release_numeric() {
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    numeric_ = nullptr;
}

void SparseLU::release_symbolic() {
    if (symbolic_ != nullptr) umfpack_di_free_symbolic(&symbolic_);
    symbolic_ = nullptr;
}

void SparseLU::factorize(const CsrMatrix& a_in) {
    if (a_in.rows() != a_in.cols()) throw SolverError("matrix is not square");
    CsrMatrix a = a_in;
    a.makeCompressed();
    const int n = static_cast<int>(a.rows());
    const int nnz = static_cast<int>(a.nonZeros());
    // CSR arrays of A are the CSC arrays of A^T; solves use the transpose.
    const bool same = symbolic_ != nullptr && n == n_ && static_cast<int>(outer_.size()) == n + 1 &&
                      std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
                      static_cast<int>(inner_.size()) == nnz &&
                      std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
    release_numeric();
    n_ = n;
    outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + n + 1);
    inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + nnz);
    values_.assign(a.valuePtr(), a.valuePtr() + nnz);

    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    reused_ = same;
    if (!same) {
        release_symbolic();
        const int st = umfpack_di_symbolic(n, n, outer_.data(), inner_.data(), values_.data(), &symbolic_, control, info);
        if (st != UMFPACK_OK) throw SolverError("sparse LU symbolic analysis failed (status " + std::to_string(st) + ")");
    }
    const int st = umfpack_di_numeric(outer_.data(), inner_.data(), values_.data(), symbolic_, &numeric_, control, info);
    if (st != UMFPACK_OK && st != UMFPACK_WARNING_singular_matrix) {
        release_numeric();
        throw SolverError("sparse LU factorization failed (status " + std::to_string(st) + ")");
    }
    rcond_ = info[UMFPACK_RCOND];
    if (st == UMFPACK_WARNING_singular_matrix || !(rcond_ >= kSingularRcond)) {
        std::vector<int> p(n), q(n);
        std::vector<double> d(n);
        int recip = 0;
        umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, p.data(), q.data(), d.data(),
                               &recip, nullptr, numeric_);
        int k_min = 0;
        for (int k = 1; k < n; ++k)
            if (std::abs(d[k]) < std::abs(d[k_min])) k_min = k;
        std::ostringstream os;
        os << "singular matrix: pivot " << k_min << " (row " << q[k_min] << ", column " << p[k_min]
           << ") has magnitude " << std::abs(d[k_min]) << ", rcond " << rcond_;
        release_numeric();
        throw SolverError(os.str());
    }
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& b) const {
    if (numeric_ == nullptr) throw SolverError("solve called without a factorization");
    if (b.size() != n_) throw UsageError("right-hand side length does not match the factorized matrix");
    Eigen::VectorXd x(n_);
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);
    control[UMFPACK_IRSTEP] = 0; // refinement is done by the caller against the true matrix
    const int st = umfpack_di_solve(UMFPACK_At, outer_.data(), inner_.data(), values_.data(), x.data(), b.data(),
                                    numeric_, control, info);
    if (st != UMFPACK_OK) throw SolverError("sparse LU solve failed (status " + std::to_string(st) + ")");
    return x;
}

// ------------------------------------------------------------ linear solve

Eigen::VectorXd solve_linear(const BlockSystem& sys, SparseLU& lu, LinearDiagnostics* diag) {
    const CsrMatrix& a = sys.matrix;
    if (a.rows() != a.cols() || a.rows() != sys.rhs.size()) throw UsageError("system dimensions are inconsistent");
    lu.factorize(a);
    const Eigen::VectorXd& b = sys.rhs;
    Eigen::VectorXd x = lu.solve(b);
    const double tol = 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd r = b - a * x;
    int steps = 0;
    while (r.lpNorm<Eigen::Infinity>() > tol && steps < 3) {
        x += lu.solve(r);
        r = b - a * x;
        ++steps;
    }
    const double res = r.lpNorm<Eigen::Infinity>();
    if (diag != nullptr) *diag = {lu.rcond(), res, steps};
    if (!(res <= tol)) {
        std::ostringstream os;
        os << "linear solve residual " << res << " exceeds " << tol << " (rcond " << lu.rcond() << ")";
        throw SolverError(os.str());
    }
    return x;
}

Eigen::VectorXd solve_linear(const BlockSystem& sys, LinearDiagnostics* diag) {
    SparseLU lu;
    return solve_linear(sys, lu, diag);
}

Eigen::VectorXd pressure_mass_vector(const SpaceTriple& sp) {
    const Mesh& m = sp.mesh();
    const int qd = 2 * sp.pressure().degree();
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, qd);
    const Tabulation& tp = cell_tabulation(sp.pressure().degree(), qd);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.num_dofs());
    for (int c = 0; c < m.num_cells(); ++c) {
        const double det = std::abs(cell_map(m, c).det);
        const auto pd = sp.pressure().cell_dofs(c);
        for (int q = 0; q < rule.size(); ++q)
            for (std::size_t j = 0; j < pd.size(); ++j)
                out(sp.p_offset() + pd[j]) += rule.weights[q] * det * tp.values(q, static_cast<Eigen::Index>(j));
    }
    return out;
}

BlockSystem apply_pressure_gauge(BlockSystem sys, GaugeMode mode, const Eigen::VectorXd& mass, double target) {
    if (mode == GaugeMode::None) return sys;
    const int n = sys.size();
    if (sys.bordered) throw UsageError("system already carries a pressure constraint");
    if (mass.size() != n) throw UsageError("pressure mass vector length does not match the system");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(sys.matrix.nonZeros()) + 2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (CsrMatrix::InnerIterator it(sys.matrix, i); it; ++it)
            trip.emplace_back(i, static_cast<int>(it.col()), it.value());
    for (int j = 0; j < n; ++j)
        if (mass(j) != 0.0) {
            trip.emplace_back(n, j, mass(j));
            trip.emplace_back(j, n, mass(j));
        }
    CsrMatrix a(n + 1, n + 1);
    a.setFromTriplets(trip.begin(), trip.end());
    sys.matrix = std::move(a);
    sys.rhs.conservativeResize(n + 1);
    sys.rhs(n) = target;
    sys.essential.push_back(0);
    sys.bordered = true;
    return sys;
}

double pressure_mean(const SystemState& s) {
    const Eigen::VectorXd m = pressure_mass_vector(*s.space);
    return m.dot(s.x) / m.sum();
}

// ------------------------------------------------------------------ Newton

void NewtonConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw UsageError("Newton tolerances must be positive");
    if (max_iter < 1) throw UsageError("Newton max_iter must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw UsageError("Newton damping must lie in (0, 1]");
    if (!(min_damping > 0.0 && min_damping <= damping)) throw UsageError("Newton damping floor must lie in (0, damping]");
    if (initial_guess == InitialGuess::Provided && !provided) throw UsageError("initial guess 'provided' without a state");
}

namespace {

using Clock = std::chrono::steady_clock;

SystemState initial_state(const std::shared_ptr<const SpaceTriple>& space, const LoadData& loads,
                          const NewtonConfig& cfg) {
    if (cfg.initial_guess == InitialGuess::Provided) {
        if (cfg.provided->space != space) throw UsageError("provided initial state lives on another space");
        return *cfg.provided;
    }
    SystemState s(space);
    if (cfg.initial_guess == InitialGuess::Zero) return s;
    // Residual rows of Dirichlet dofs are (x - data); one evaluation at zero gives -data there.
    const LagrangeSpace& vs = space->velocity();
    for (int i = 0; i < vs.num_dofs(); ++i) {
        if (!vs.is_essential(i)) continue;
        const Eigen::Vector2d v = loads.u_dirichlet(vs.node(i));
        s.x(space->u_offset(0) + i) = v.x();
        s.x(space->u_offset(1) + i) = v.y();
    }
    const LagrangeSpace& fs = space->potential();
    for (int i = 0; i < fs.num_dofs(); ++i)
        if (fs.is_essential(i)) s.x(space->psi_offset() + i) = loads.psi_dirichlet(fs.node(i));
    return s;
}

/// Replaces rows [begin, end) with identity rows and zero increments.
void freeze_rows(BlockSystem& sys, int begin, int end) {
    std::vector<int> missing; // pressure rows carry no stored diagonal
    for (int i = begin; i < end; ++i) {
        sys.essential[i] = 1;
        sys.rhs(i) = 0.0;
        bool diag = false;
        for (CsrMatrix::InnerIterator it(sys.matrix, i); it; ++it) {
            it.valueRef() = it.col() == i ? 1.0 : 0.0;
            diag = diag || it.col() == i;
        }
        if (!diag) missing.push_back(i);
    }
    if (missing.empty()) return;
    for (int i : missing) sys.matrix.coeffRef(i, i) = 1.0;
    sys.matrix.makeCompressed();
}

double range_norm(const Eigen::VectorXd& r, int begin, int end) {
    return end > begin ? r.segment(begin, end - begin).lpNorm<Eigen::Infinity>() : 0.0;
}

struct StepResult {
    double residual;
    double step;
};

/// Backtracking along `delta`, halving while the residual norm over
/// [begin, end) does not decrease, down to `floor`.
StepResult line_search(SystemState& s, const Eigen::VectorXd& delta, double r_now, double t0, double floor,
                       int begin, int end, const PhysParams& params, const LoadData& loads,
                       const AssemblyOptions& opts) {
    const Eigen::VectorXd x0 = s.x;
    double t = t0;
    while (true) {
        s.x = x0 + t * delta;
        double r = std::numeric_limits<double>::infinity();
        try {
            r = range_norm(assemble_residual(s, params, loads, opts), begin, end);
        } catch (const DomainError&) {
            if (t * 0.5 < floor) throw;
        }
        if (r < r_now || t * 0.5 < floor) return {r, t};
        t *= 0.5;
    }
}

} // namespace

SolveResult newton_solve(std::shared_ptr<const SpaceTriple> space, const PhysParams& params, const LoadData& loads,
                         const NewtonConfig& cfg) {
    cfg.validate();
    (void)params.validate();
    const auto t_start = Clock::now();
    SolveResult out{initial_state(space, loads, cfg), {}};
    SystemState& s = out.state;
    SolveReport& rep = out.report;
    const int n = space->num_dofs();
    const Eigen::VectorXd mass = pressure_mass_vector(*space);
    SparseLU lu;

    double r = assemble_residual(s, params, loads, cfg.assembly).lpNorm<Eigen::Infinity>();
    const double r0 = r;
    rep.residuals.push_back(r);
    const double target = std::max(cfg.abs_tol, cfg.rel_tol * r0);
    while (true) {
        if (r <= target) {
            rep.converged = true;
            break;
        }
        if (rep.iterations >= cfg.max_iter) break;
        BlockSystem sys = assemble_jacobian(s, params, loads, cfg.assembly);
        eliminate_dirichlet_columns(sys);
        sys = apply_pressure_gauge(std::move(sys), cfg.gauge, mass, -mass.dot(s.x));
        LinearDiagnostics diag;
        const Eigen::VectorXd sol = solve_linear(sys, lu, &diag);
        rep.rcond.push_back(diag.rcond);
        const StepResult st = line_search(s, sol.head(n), r, cfg.damping, cfg.min_damping, 0, n, params, loads,
                                          cfg.assembly);
        r = st.residual;
        rep.steps.push_back(st.step);
        rep.residuals.push_back(r);
        ++rep.iterations;
        if (!std::isfinite(r)) break;
    }
    rep.message = rep.converged ? "converged" : "Newton did not reach the residual tolerance";
    rep.wall_time = std::chrono::duration<double>(Clock::now() - t_start).count();
    return out;
}

SolveResult picard_solve(std::shared_ptr<const SpaceTriple> space, const PhysParams& params, const LoadData& loads,
                         const PicardConfig& cfg) {
    cfg.inner.validate();
    (void)params.validate();
    if (!(cfg.tol > 0.0) || cfg.max_outer < 1) throw UsageError("Picard tolerance and iteration limit must be positive");
    const auto t_start = Clock::now();
    SolveResult out{initial_state(space, loads, cfg.inner), {}};
    SystemState& s = out.state;
    SolveReport& rep = out.report;
    const SpaceTriple& sp = *space;
    const int n = sp.num_dofs();
    const int psi0 = sp.psi_offset();
    const Eigen::VectorXd mass = pressure_mass_vector(sp);
    const AssemblyOptions& opts = cfg.inner.assembly;
    SparseLU flow_lu, pot_lu;

    rep.residuals.push_back(assemble_residual(s, params, loads, opts).lpNorm<Eigen::Infinity>());
    double prev_inc = 0.0;
    for (int m = 0; m < cfg.max_outer; ++m) {
        // (i) Stokes-Nitsche problem with the potential frozen; affine in (u, p).
        BlockSystem flow = assemble_jacobian(s, params, loads, opts);
        freeze_rows(flow, psi0, n);
        eliminate_dirichlet_columns(flow);
        flow = apply_pressure_gauge(std::move(flow), cfg.inner.gauge, mass, -mass.dot(s.x));
        LinearDiagnostics diag;
        const Eigen::VectorXd dflow = solve_linear(flow, flow_lu, &diag).head(n);
        rep.rcond.push_back(diag.rcond);
        s.x += dflow;

        // (ii) nonlinear potential problem with the velocity frozen.
        double rp = range_norm(assemble_residual(s, params, loads, opts), psi0, n);
        for (int it = 0; it < cfg.inner.max_iter && rp > cfg.inner.abs_tol; ++it) {
            BlockSystem pot = assemble_jacobian(s, params, loads, opts);
            freeze_rows(pot, 0, psi0);
            eliminate_dirichlet_columns(pot);
            const Eigen::VectorXd dpot = solve_linear(pot, pot_lu, &diag);
            rep.rcond.push_back(diag.rcond);
            rp = line_search(s, dpot, rp, cfg.inner.damping, cfg.inner.min_damping, psi0, n, params, loads, opts)
                     .residual;
        }

        SystemState du(space);
        du.x.head(sp.num_u()) = dflow.head(sp.num_u());
        const double inc = discrete_norms(du).u_1h;
        rep.increments.push_back(inc);
        if (m > 0 && prev_inc > 0.0) rep.contraction.push_back(inc / prev_inc);
        prev_inc = inc;
        rep.residuals.push_back(assemble_residual(s, params, loads, opts).lpNorm<Eigen::Infinity>());
        rep.iterations = m + 1;
        if (inc <= cfg.tol) {
            rep.converged = true;
            break;
        }
        if (!std::isfinite(inc)) break;
    }
    rep.message = rep.converged ? "converged" : "Picard iteration did not reach the increment tolerance";
    rep.wall_time = std::chrono::duration<double>(Clock::now() - t_start).count();
    return out;
}

} // namespace spb
