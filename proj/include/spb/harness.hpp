#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spb/estimator.hpp"
#include "spb/solver.hpp"

namespace spb {

enum class SolverKind { Newton, Picard };

SolverKind solver_from_string(const std::string& s);
std::string to_string(SolverKind s);

/// Composes f, g and boundary data so that `exact` solves the strong system:
/// f = -mu lap u + grad p + (K(psi) + u.grad psi - g) E, g = K(psi) + u.grad psi - eps lap psi,
/// g_n = u.n and g_tau = mu tau.(grad u n) + beta u.tau (n, tau taken at the query point
/// from the domain boundary through `frame`).
LoadData manufactured_data(const ExactFields& exact, const PhysParams& params);

struct CaseOverrides {
    std::optional<double> mu, gamma, beta, eps, k0, k1;
};

struct CaseSpec {
    std::string name;
    PhysParams params;
    LoadData loads;
    std::optional<ExactFields> exact;
    DomainSpec domain;
    double h0 = 0.25; ///< grid spacing of the initial mesh
    GaugeMode gauge = GaugeMode::MeanZero;
    /// Modelling choices not fixed by the problem statement.
    std::vector<std::string> assumptions;

    [[nodiscard]] Mesh initial_mesh() const { return make_named_domain(domain, h0); }
};

const std::vector<std::string>& case_names();

/// convergence-square, nonconvex-L, nonconvex-C, nonconvex-T,
/// boundary-layer-triangle, pipe-obstacle. UsageError on other names.
CaseSpec make_case(const std::string& name, const CaseOverrides& overrides = {});

struct RunOptions {
    int degree = 1;
    SolverKind solver = SolverKind::Newton;
    std::optional<GaugeMode> gauge; ///< overrides the case default
    NewtonConfig newton;
    PicardConfig picard;
    std::ostream* log = nullptr;
};

struct SolveOutcome {
    SolveResult result;
    EstimatorReport estimate;
    std::optional<ErrorNorms> errors;
};

/// Solve, estimate and (for manufactured cases) measure errors on one mesh.
/// `guess`, when given, must live on a space over `mesh`.
SolveOutcome solve_on_mesh(const CaseSpec& c, std::shared_ptr<const Mesh> mesh, const RunOptions& opts,
                           const SystemState* guess = nullptr);

/// Interpolates a discrete state onto a space over a refinement of its mesh
/// (uses the parent links of the fine mesh).
SystemState prolongate(const SystemState& coarse, std::shared_ptr<const SpaceTriple> fine);

struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    int dofs = 0;
    ErrorNorms err;
    double psi = 0.0;
    double theta = 0.0;
    double effectivity = 0.0;
    int iterations = 0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    bool ok = true;
    std::string message;
};

/// Uniform red refinement from the case's initial mesh, `levels` meshes.
ConvergenceResult run_convergence(const CaseSpec& c, int levels, const RunOptions& opts,
                                  const std::function<void(const ConvergenceRow&)>& on_row = {});

/// log(e_prev / e) / log(h_prev / h).
double observed_order(double e_prev, double e, double h_prev, double h);

/// Table-shaped CSV; OC columns are "--" on the first row.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

struct AdaptiveRow {
    int round = 0;
    int dofs = 0;
    int cells = 0;
    double psi = 0.0;
    double theta = 0.0;
    double error_total = 0.0; ///< NaN without an exact solution
    double effectivity = 0.0; ///< NaN without an exact solution
    int marked = 0;
    double max_h = 0.0;
    double min_h = 0.0;
    int iterations = 0;
};

struct AdaptiveOptions {
    double theta = 0.5;
    int max_rounds = 100;
    int max_dofs = 200000;
    /// Uniform red refinement instead of marking (reference series).
    bool uniform = false;
    /// Per-round mesh, VTK and indicator files go here when non-empty.
    std::string out_dir;
};

struct AdaptiveResult {
    std::vector<AdaptiveRow> history;
    std::vector<std::shared_ptr<const Mesh>> meshes;
    std::optional<SystemState> final_state;
    bool ok = true;
    std::string message;
};

/// Solve -> estimate -> mark -> refine until the next mesh would exceed the
/// dof budget or the round limit is reached.
AdaptiveResult run_adaptive(const CaseSpec& c, const AdaptiveOptions& aopts, const RunOptions& opts,
                            const std::function<void(const AdaptiveRow&)>& on_row = {});

void write_adaptive_csv(std::ostream& os, const std::vector<AdaptiveRow>& rows);

/// Legacy-VTK ASCII unstructured grid: point fields u (padded to 3), p, psi
/// at mesh vertices and, if given, the cell field psi_K.
void write_vtk(std::ostream& os, const SystemState& state, const EstimatorReport* report = nullptr);

/// Least-squares slope of log(psi) against log(dofs) over rows with dofs > min_dofs.
double loglog_slope(const std::vector<AdaptiveRow>& rows, double min_dofs);

/// key=value lines; '#' starts a comment. IoError / UsageError on bad input.
std::map<std::string, std::string> read_config(std::istream& is);
std::map<std::string, std::string> read_config_file(const std::string& path);

} // namespace spb
