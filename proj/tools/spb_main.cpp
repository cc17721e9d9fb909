// Command-line driver: convergence studies, adaptive runs and single solves.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spb/errors.hpp"
#include "spb/harness.hpp"
#include "spb/parallel.hpp"

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string case_name = "convergence-square";
    std::vector<double> mu;
    std::optional<double> gamma, beta, eps, k0, k1;
    int degree = 1;
    int levels = -1;
    double theta = 0.5;
    int max_dofs = 200000;
    std::string out_dir = "out";
    std::string solver = "newton";
    std::string gauge;
    unsigned seed = 0;
    int threads = 1;
    bool export_matrix = false;
    bool quiet = false;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw spb::IoError("cannot write " + p.string());
    return os;
}

spb::CaseOverrides overrides(const Options& o, std::optional<double> mu) {
    spb::CaseOverrides ov;
    ov.mu = mu;
    ov.gamma = o.gamma;
    ov.beta = o.beta;
    ov.eps = o.eps;
    ov.k0 = o.k0;
    ov.k1 = o.k1;
    return ov;
}

spb::RunOptions run_options(const Options& o) {
    spb::RunOptions r;
    r.degree = o.degree;
    r.solver = spb::solver_from_string(o.solver);
    if (!o.gauge.empty()) r.gauge = spb::gauge_from_string(o.gauge);
    r.log = o.quiet ? nullptr : &std::cerr;
    return r;
}

std::string mu_tag(double mu) {
    std::ostringstream os;
    os << mu;
    return os.str();
}

void warn(const spb::CaseSpec& c) {
    for (const auto& w : c.params.validate()) std::cerr << "warning: " << w << '\n';
    for (const auto& a : c.assumptions) std::cerr << "assumption: " << a << '\n';
}

int cmd_converge(const Options& o) {
    const spb::RunOptions ro = run_options(o);
    std::vector<std::optional<double>> mus;
    if (o.mu.empty()) mus.emplace_back();
    for (double m : o.mu) mus.emplace_back(m);
    const int levels = o.levels > 0 ? o.levels : 6;
    bool ok = true;
    for (const auto& mu : mus) {
        const spb::CaseSpec c = spb::make_case(o.case_name, overrides(o, mu));
        warn(c);
        const spb::ConvergenceResult r = spb::run_convergence(c, levels, ro);
        auto os = open_out(fs::path(o.out_dir) / ("convergence_mu_" + mu_tag(c.params.mu) + ".csv"));
        spb::write_convergence_csv(os, r.rows);
        if (!r.ok) {
            std::cerr << "error: mu=" << c.params.mu << ": " << r.message << '\n';
            ok = false;
        }
    }
    return ok ? 0 : 1;
}

int cmd_adapt(const Options& o) {
    const spb::RunOptions ro = run_options(o);
    const spb::CaseSpec c =
        spb::make_case(o.case_name, overrides(o, o.mu.empty() ? std::nullopt : std::optional<double>(o.mu.front())));
    warn(c);
    spb::AdaptiveOptions ao;
    ao.theta = o.theta;
    ao.max_dofs = o.max_dofs;
    if (o.levels > 0) ao.max_rounds = o.levels;
    ao.out_dir = (fs::path(o.out_dir) / "rounds").string();
    const spb::AdaptiveResult r = spb::run_adaptive(c, ao, ro);
    auto os = open_out(fs::path(o.out_dir) / "adaptive.csv");
    spb::write_adaptive_csv(os, r.history);
    if (!r.ok) {
        std::cerr << "error: " << r.message << '\n';
        return 1;
    }
    return 0;
}

int cmd_solve_once(const Options& o) {
    const spb::RunOptions ro = run_options(o);
    const spb::CaseSpec c =
        spb::make_case(o.case_name, overrides(o, o.mu.empty() ? std::nullopt : std::optional<double>(o.mu.front())));
    warn(c);
    auto mesh = std::make_shared<const spb::Mesh>(c.initial_mesh());
    for (int i = 0; i < std::max(0, o.levels); ++i) mesh = std::make_shared<const spb::Mesh>(spb::refine_uniform(*mesh));
    const spb::SolveOutcome out = spb::solve_on_mesh(c, mesh, ro);
    const fs::path dir(o.out_dir);
    {
        auto os = open_out(dir / "solution.vtk");
        spb::write_vtk(os, out.result.state, &out.estimate);
    }
    {
        auto os = open_out(dir / "indicators.csv");
        spb::write_indicator_csv(os, out.estimate);
    }
    {
        auto os = open_out(dir / "summary.csv");
        os.precision(17);
        os << "dofs,iterations,converged,final_residual,psi,theta,error_total,effectivity\n";
        os << out.result.state.space->num_dofs() << ',' << out.result.report.iterations << ','
           << (out.result.report.converged ? 1 : 0) << ',' << out.result.report.residuals.back() << ','
           << out.estimate.psi << ',' << out.estimate.theta << ',';
        if (out.errors) os << out.errors->total << ',' << out.estimate.effectivity << '\n';
        else os << "--,--\n";
    }
    spb::write_mesh_file((dir / "mesh.txt").string(), *mesh);
    if (o.export_matrix) {
        const spb::BlockSystem sys = spb::assemble_jacobian(out.result.state, c.params, c.loads);
        auto os = open_out(dir / "jacobian.txt");
        spb::write_coordinate(os, sys.matrix);
    }
    if (!out.result.report.converged) {
        std::cerr << "error: " << out.result.report.message << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stokes-Poisson-Boltzmann finite element solver with Navier slip"};
    app.set_config("--config", "", "key=value file overriding defaults");
    app.require_subcommand(1);
    Options o;
    app.add_option("--case", o.case_name, "problem case")->check(CLI::IsMember(spb::case_names()));
    app.add_option("--mu", o.mu, "viscosity (several values allowed for converge)");
    app.add_option("--gamma", o.gamma, "Nitsche penalty");
    app.add_option("--beta", o.beta, "friction coefficient");
    app.add_option("--eps", o.eps, "permittivity");
    app.add_option("--k0", o.k0, "charge amplitude");
    app.add_option("--k1", o.k1, "charge slope");
    app.add_option("--degree", o.degree, "pressure degree k (velocity/potential use k+1)")->check(CLI::Range(1, 2));
    app.add_option("--levels", o.levels, "mesh levels (converge), round limit (adapt), uniform refinements (solve-once)");
    app.add_option("--theta", o.theta, "maximum-strategy marking fraction")->check(CLI::Range(0.0, 1.0));
    app.add_option("--max-dofs", o.max_dofs, "adaptive dof budget")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", o.out_dir, "output directory");
    app.add_option("--solver", o.solver, "nonlinear solver")->check(CLI::IsMember({"newton", "picard"}));
    app.add_option("--gauge", o.gauge, "pressure gauge")->check(CLI::IsMember({"mean-zero", "none"}));
    app.add_option("--seed", o.seed, "seed for randomized diagnostics");
    app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--export-matrix", o.export_matrix, "solve-once: write the final Jacobian in coordinate format");
    app.add_flag("--quiet", o.quiet, "suppress progress output");

    auto* converge = app.add_subcommand("converge", "uniform refinement study with error orders")->fallthrough();
    auto* adapt = app.add_subcommand("adapt", "solve-estimate-mark-refine loop")->fallthrough();
    auto* once = app.add_subcommand("solve-once", "single solve with field and indicator output")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        spb::set_num_threads(o.threads);
        fs::create_directories(o.out_dir);
        if (converge->parsed()) return cmd_converge(o);
        if (adapt->parsed()) return cmd_adapt(o);
        if (once->parsed()) return cmd_solve_once(o);
    } catch (const spb::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
