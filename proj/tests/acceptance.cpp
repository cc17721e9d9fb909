// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <work-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "form_oracle.hpp"
#include "null_case.hpp"
#include "spb/harness.hpp"

#ifndef SPB_EXE
#define SPB_EXE "spb"
#endif

using namespace spb;
namespace fs = std::filesystem;

namespace {

int failures = 0;
// criterion 7 aggregates later runs, so lines are collected and printed in order
std::map<int, std::string> lines;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::ostringstream os;
    os << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " | " << detail;
    lines[id] = os.str();
    std::cerr << "[done " << id << "] " << os.str() << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

// Sum of psi_K^2 from an indicator CSV (column 5).
double indicator_sum_sq(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    double s = 0.0;
    while (std::getline(is, line)) {
        std::stringstream ls(line);
        std::string cell;
        for (int i = 0; i < 5; ++i) std::getline(ls, cell, ',');
        const double v = std::stod(cell);
        s += v * v;
    }
    return s;
}

// Worst relative violation of psi^2 = sum psi_K^2 over the rounds of an adaptive run.
double history_consistency(const AdaptiveResult& r, const fs::path& dir) {
    double worst = 0.0;
    for (const AdaptiveRow& row : r.history) {
        char tag[8];
        std::snprintf(tag, sizeof tag, "%03d", row.round);
        const double s = indicator_sum_sq(dir / (std::string("indicators_") + tag + ".csv"));
        worst = std::max(worst, rel(s, row.psi * row.psi));
    }
    return worst;
}

double worst_consistency = 0.0;
double worst_swap = 0.0;

void check_structure(const SystemState& s, const CaseSpec& c, const EstimatorReport& rep) {
    double sum = 0.0;
    for (const auto& e : rep.cells) sum += e.psi_K * e.psi_K;
    if (rep.psi > 0.0) worst_consistency = std::max(worst_consistency, rel(sum, rep.psi * rep.psi));
    EstimatorOptions swapped;
    swapped.swap_facet_convention = true;
    const EstimatorReport other = compute_indicators(s, c.params, c.loads, c.exact ? &*c.exact : nullptr, swapped);
    for (std::size_t i = 0; i < rep.cells.size(); ++i) {
        const double a = rep.cells[i].psi_K;
        if (a > 0.0) worst_swap = std::max(worst_swap, std::abs(other.cells[i].psi_K - a) / a);
    }
}

ConvergenceResult convergence(double mu, int levels) {
    const CaseSpec c = make_case("convergence-square", {.mu = mu});
    return run_convergence(c, levels, RunOptions{});
}

struct Orders {
    double u, p, psi;
};

Orders finest_orders(const std::vector<ConvergenceRow>& rows) {
    const auto& a = rows[rows.size() - 2];
    const auto& b = rows.back();
    return {observed_order(a.err.u_1h, b.err.u_1h, a.h, b.h), observed_order(a.err.p_l2, b.err.p_l2, a.h, b.h),
            observed_order(a.err.psi_h1, b.err.psi_h1, a.h, b.h)};
}

double fd_jacobian_error(const SystemState& s, const PhysParams& prm, const LoadData& loads, int directions) {
    const Eigen::MatrixXd jac = Eigen::MatrixXd(assemble_jacobian(s, prm, loads).matrix);
    std::mt19937 rng(2024);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int k = 0; k < directions; ++k) {
        Eigen::VectorXd d(s.x.size());
        for (auto& v : d) v = nd(rng);
        d.normalize();
        const double t = 1e-6;
        SystemState sp = s, sm = s;
        sp.x += t * d;
        sm.x -= t * d;
        const Eigen::VectorXd fd = (assemble_residual(sp, prm, loads) - assemble_residual(sm, prm, loads)) / (2 * t);
        const Eigen::VectorXd jd = jac * d;
        worst = std::max(worst, (fd - jd).norm() / jd.norm());
    }
    return worst;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + SPB_EXE + "\" " + args + " --quiet > \"" + log.string() + "\" 2>&1";
    return std::system(cmd.c_str());
}

} // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "spb_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    std::cout << std::setprecision(6);

    // 1, 2: mu = 1 series
    {
        const auto t0 = std::chrono::steady_clock::now();
        const ConvergenceResult r = convergence(1.0, 6);
        const double secs = seconds_since(t0);
        if (!r.ok || r.rows.size() != 6) {
            report(1, false, "mu=1 convergence", "series failed: " + r.message);
            report(2, false, "mu=1 effectivity band", "no series");
        } else {
            const Orders o = finest_orders(r.rows);
            // reference errors for h = 0.0884 ... 0.0110
            const double ref[4][3] = {{3.5352e-3, 1.6213e-3, 5.3057e-4},
                                      {8.6322e-4, 4.0256e-4, 1.3283e-4},
                                      {2.1288e-4, 1.0046e-4, 3.3219e-5},
                                      {5.2827e-5, 2.5104e-5, 8.3056e-6}};
            double worst = 0.0;
            for (int i = 0; i < 4; ++i) {
                const ErrorNorms& e = r.rows[i + 2].err;
                worst = std::max({worst, rel(e.u_1h, ref[i][0]), rel(e.p_l2, ref[i][1]), rel(e.psi_h1, ref[i][2])});
            }
            const bool ok = std::abs(o.u - 2) <= 0.1 && std::abs(o.p - 2) <= 0.1 && std::abs(o.psi - 2) <= 0.1 &&
                            worst <= 0.1 && secs < 600;
            report(1, ok, "mu=1 orders 2.00+-0.10 and errors within 10% of the reference table",
                   "orders u/p/psi = " + fmt(o.u) + "/" + fmt(o.p) + "/" + fmt(o.psi) + ", worst deviation " +
                       fmt(100 * worst, 3) + "%, " + fmt(secs, 3) + " s");
            double lo = 1e300, hi = 0.0;
            bool band = true;
            std::string effs;
            for (std::size_t i = 0; i < r.rows.size(); ++i) {
                const double e = r.rows[i].effectivity;
                effs += (i ? " " : "") + fmt(e);
                if (i + 3 >= r.rows.size()) {
                    lo = std::min(lo, e);
                    hi = std::max(hi, e);
                    band = band && e >= 4.5 && e <= 7.0;
                }
            }
            const double spread = (hi - lo) / lo;
            report(2, band && spread < 0.05, "mu=1 effectivity in [4.5, 7] and flat within 5% over last three levels",
                   "effectivity " + effs + ", spread " + fmt(100 * spread, 3) + "%");
        }
    }

    // 3: mu = 0.01 series
    {
        const ConvergenceResult r = convergence(0.01, 6);
        if (!r.ok || r.rows.size() != 6) {
            report(3, false, "mu=0.01 robustness", "series failed: " + r.message);
        } else {
            const Orders o = finest_orders(r.rows);
            bool mono = true, band = true;
            std::string effs;
            for (std::size_t i = 0; i < r.rows.size(); ++i) {
                const double e = r.rows[i].effectivity;
                effs += (i ? " " : "") + fmt(e);
                if (i + 4 >= r.rows.size()) {
                    band = band && e >= 1.0 && e <= 20.0;
                    if (i + 4 > r.rows.size()) mono = mono && e > r.rows[i - 1].effectivity;
                }
            }
            const bool ok = o.u >= 1.9 && o.p >= 1.9 && o.psi >= 1.9 && mono && band;
            report(3, ok, "mu=0.01 orders >= 1.9, effectivity increasing over last four levels within [1, 20]",
                   "orders u/p/psi = " + fmt(o.u) + "/" + fmt(o.p) + "/" + fmt(o.psi) + ", effectivity " + effs);
        }
    }

    // 4: finite-difference Jacobian on the coarse manufactured meshes
    {
        double worst = 0.0;
        std::string detail;
        for (const char* name : {"convergence-square", "boundary-layer-triangle"}) {
            const CaseSpec c = make_case(name);
            const auto sp = make_space_triple(std::make_shared<const Mesh>(c.initial_mesh()), 1);
            SystemState s = interpolate(sp, c.exact->u, c.exact->p, c.exact->psi);
            std::mt19937 rng(11);
            std::uniform_real_distribution<double> u(-0.05, 0.05);
            for (auto& v : s.x) v += u(rng);
            const double e = fd_jacobian_error(s, c.params, c.loads, 10);
            worst = std::max(worst, e);
            detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt(e, 3);
        }
        report(4, worst <= 5e-6, "Jacobian matches central differences in 10 directions (rel <= 5e-6)", detail);
    }

    // 5: Newton vs Picard at h = 0.1768
    {
        bool ok = true;
        std::string detail;
        for (double mu : {1.0, 0.01}) {
            const CaseSpec c = make_case("convergence-square", {.mu = mu});
            const auto sp = make_space_triple(std::make_shared<const Mesh>(refine_uniform(c.initial_mesh())), 1);
            const SolveResult n = newton_solve(sp, c.params, c.loads);
            const SolveResult p = picard_solve(sp, c.params, c.loads);
            const double diff = difference_norms(n.state, p.state).total;
            double max_contraction = 0.0;
            for (std::size_t i = 1; i < p.report.contraction.size(); ++i)
                max_contraction = std::max(max_contraction, p.report.contraction[i]);
            const bool this_ok = n.report.converged && p.report.converged && diff <= 1e-8 && max_contraction < 1.0 &&
                                 p.report.contraction.size() > 1;
            ok = ok && this_ok;
            check_structure(n.state, c, compute_indicators(n.state, c.params, c.loads, &*c.exact));
            detail += std::string(detail.empty() ? "" : "; ") + "mu=" + fmt(mu) + ": diff " + fmt(diff, 3) +
                      ", Picard " + std::to_string(p.report.iterations) + " its, max contraction " +
                      fmt(max_contraction, 3);
        }
        report(5, ok, "Newton and Picard limits agree to 1e-8 with contraction < 1", detail);
    }

    // 6: polynomial null case
    {
        const CaseSpec c = testcases::null_case();
        const SolveOutcome o = solve_on_mesh(c, std::make_shared<const Mesh>(c.initial_mesh()), RunOptions{});
        check_structure(o.result.state, c, o.estimate);
        const bool ok = o.result.report.converged && o.estimate.psi <= 1e-9 && o.errors->total <= 1e-9;
        report(6, ok, "estimator and error vanish when the solution lies in the discrete space",
               "Psi = " + fmt(o.estimate.psi, 3) + ", total error = " + fmt(o.errors->total, 3));
    }

    // 8: adaptive vs uniform on the boundary-layer triangle (indicator files feed criterion 7)
    double adapt_consistency = 0.0;
    {
        const CaseSpec c = make_case("boundary-layer-triangle");
        const auto t0 = std::chrono::steady_clock::now();
        AdaptiveOptions a;
        a.max_dofs = 200000;
        a.out_dir = (work / "adaptive").string();
        const AdaptiveResult ad = run_adaptive(c, a, RunOptions{});
        const double secs = seconds_since(t0);
        AdaptiveOptions u = a;
        u.uniform = true;
        u.out_dir = (work / "uniform").string();
        const AdaptiveResult un = run_adaptive(c, u, RunOptions{});
        adapt_consistency = std::max(history_consistency(ad, a.out_dir), history_consistency(un, u.out_dir));
        const double sa = loglog_slope(ad.history, 1e4), su = loglog_slope(un.history, 1e4);
        std::ofstream(work / "adaptive.csv") << [&] {
            std::ostringstream os;
            write_adaptive_csv(os, ad.history);
            return os.str();
        }();
        const bool ok = ad.ok && un.ok && sa <= 1.2 * su && secs < 900;
        report(8, ok, "adaptive Psi-vs-dofs slope at least 20% steeper than uniform beyond 1e4 dofs",
               "adaptive slope " + fmt(sa) + " (" + std::to_string(ad.history.size()) + " rounds, " +
                   std::to_string(ad.history.back().dofs) + " dofs, " + fmt(secs, 3) + " s), uniform slope " +
                   fmt(su) + ", required <= " + fmt(1.2 * su) + "; final Psi adaptive " + fmt(ad.history.back().psi) +
                   " vs uniform " + fmt(un.history.back().psi) + " at " + std::to_string(un.history.back().dofs) +
                   " dofs");
    }

    // 9: L-shape corner capture
    {
        const CaseSpec c = make_case("nonconvex-L");
        AdaptiveOptions a;
        a.max_rounds = 6;
        a.theta = 0.5;
        a.out_dir = (work / "lshape").string();
        const AdaptiveResult r = run_adaptive(c, a, RunOptions{});
        adapt_consistency = std::max(adapt_consistency, history_consistency(r, a.out_dir));
        bool ok = r.ok && r.meshes.size() == 6;
        double frac = 0.0;
        int created = 0;
        if (ok) {
            std::set<std::pair<double, double>> initial;
            for (const Point& v : r.meshes.front()->vertices()) initial.insert({v.x(), v.y()});
            int near = 0;
            for (const Point& v : r.meshes.back()->vertices()) {
                if (initial.count({v.x(), v.y()})) continue;
                ++created;
                if (v.norm() <= 0.1) ++near;
            }
            frac = created > 0 ? static_cast<double>(near) / created : 0.0;
            ok = frac >= 0.3;
        }
        report(9, ok, "after 5 rounds at theta=0.5, >= 30% of new vertices within 0.1 of the re-entrant corner",
               fmt(100 * frac, 3) + "% of " + std::to_string(created) + " new vertices");
    }

    // 7: estimator structure over every run above plus the remaining cases
    {
        for (const char* name : {"nonconvex-C", "nonconvex-T", "pipe-obstacle"}) {
            const CaseSpec c = make_case(name);
            const SolveOutcome o = solve_on_mesh(c, std::make_shared<const Mesh>(c.initial_mesh()), RunOptions{});
            check_structure(o.result.state, c, o.estimate);
        }
        const double cons = std::max(worst_consistency, adapt_consistency);
        report(7, cons <= 1e-12 && worst_swap <= 1e-14,
               "Psi^2 equals the sum of Psi_K^2 (1e-12) and the facet convention changes no indicator (1e-14)",
               "worst consistency " + fmt(cons, 3) + ", worst swap change " + fmt(worst_swap, 3));
    }

    // 10: oracle equivalence
    {
        const auto ref = oracle::compare_forms(oracle::single_triangle({0, 0}, {1, 0}, {0, 1}), 3);
        CaseSpec c = make_case("convergence-square");
        c.h0 = 0.5;
        const auto sp = make_space_triple(std::make_shared<const Mesh>(refine_uniform(c.initial_mesh())), 1);
        BlockSystem sys = assemble_jacobian(SystemState(sp), c.params, c.loads);
        eliminate_dirichlet_columns(sys);
        sys = apply_pressure_gauge(std::move(sys), GaugeMode::MeanZero, pressure_mass_vector(*sp));
        const Eigen::VectorXd x = solve_linear(sys);
        const Eigen::VectorXd xd = Eigen::MatrixXd(sys.matrix).fullPivLu().solve(sys.rhs);
        const double dsolve = (x - xd).norm() / xd.norm();
        report(10, ref.worst <= 1e-10 && dsolve <= 1e-10 && sys.size() <= 500,
               "every form matches the dense quadrature oracle and the sparse solve matches dense LU (1e-10)",
               "worst form " + to_string(ref.worst_form) + " " + fmt(ref.worst, 3) + ", solve " + fmt(dsolve, 3) +
                   " on " + std::to_string(sys.size()) + " unknowns");
    }

    // 11: determinism across thread counts through the CLI
    {
        bool ok = true;
        std::string detail;
        const std::vector<std::pair<std::string, std::string>> runs{
            {"converge --case convergence-square --mu 1 --mu 0.01 --levels 3", "convergence_mu_1.csv"},
            {"adapt --case nonconvex-L --levels 6", "adaptive.csv"}};
        for (const auto& [args, file] : runs) {
            std::string first;
            for (int threads : {1, 2, 8}) {
                const fs::path out = work / ("det_" + std::to_string(threads));
                const int rc = run_cli(args + " --threads " + std::to_string(threads) + " --out-dir \"" +
                                           out.string() + "\"",
                                       work / ("det_" + std::to_string(threads) + ".log"));
                const std::string text = read_file(out / file);
                if (rc != 0 || text.empty()) ok = false;
                if (threads == 1) first = text;
                else if (text != first) ok = false;
            }
            detail += std::string(detail.empty() ? "" : ", ") + file + (ok ? " identical" : " differs");
        }
        report(11, ok, "CLI CSV output byte-identical for 1, 2 and 8 threads", detail);
    }

    // pipe-obstacle smoke test without a pressure gauge
    {
        const CaseSpec c = make_case("pipe-obstacle");
        NewtonConfig cfg;
        cfg.gauge = GaugeMode::None;
        const auto sp = make_space_triple(std::make_shared<const Mesh>(c.initial_mesh()), 1);
        const SolveResult r = newton_solve(sp, c.params, c.loads, cfg);
        const bool ok = r.report.converged;
        std::ostringstream os;
        os << (ok ? "PASS" : "FAIL") << " smoke: pipe-obstacle solves with gauge none | " << sp->num_dofs()
           << " dofs, " << r.report.iterations << " iterations, final residual " << fmt(r.report.residuals.back(), 3);
        lines[12] = os.str();
        if (!ok) ++failures;
    }

    for (const auto& [id, line] : lines) std::cout << line << '\n';

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " check(s) failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
