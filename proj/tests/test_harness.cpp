#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "spb/errors.hpp"
#include "spb/harness.hpp"
#include "spb/jet.hpp"

using namespace spb;

namespace {

std::vector<Point> random_points(const CaseSpec& c, int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::vector<Point> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Point p(u(rng), u(rng));
        if (c.name == "boundary-layer-triangle" && p.x() + p.y() > 0.98) continue;
        pts.push_back(p);
    }
    return pts;
}

// Second-order central differences, used to check the derivative callbacks.
double fd_laplacian(const ScalarField& f, const Point& x, double h) {
    const Point ex(h, 0.0), ey(0.0, h);
    return (f(x + ex) + f(x - ex) + f(x + ey) + f(x - ey) - 4.0 * f(x)) / (h * h);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST(Manufactured, StrongResidualVanishes) {
    for (const char* name : {"convergence-square", "boundary-layer-triangle"}) {
        const CaseSpec c = make_case(name);
        ASSERT_TRUE(c.exact);
        const ExactFields& e = *c.exact;
        const PhysParams& p = c.params;
        const ChargeLaw k = p.charge();
        for (const Point& x : random_points(c, 100, 4)) {
            const double coupling = k.value(e.psi(x)) + e.u(x).dot(e.grad_psi(x)) - c.loads.g(x);
            const Eigen::Vector2d mom =
                -p.mu * e.lap_u(x) + e.grad_p(x) + coupling * p.efield(x) - c.loads.f(x);
            EXPECT_LE(mom.norm(), 1e-10 * (1.0 + c.loads.f(x).norm())) << name;
            EXPECT_NEAR(p.eps * e.lap_psi(x), coupling, 1e-8) << name;
            EXPECT_NEAR(e.grad_u(x).trace(), 0.0, 1e-12) << name;
        }
    }
}

TEST(Manufactured, DerivativeCallbacksMatchDifferences) {
    for (const char* name : {"convergence-square", "boundary-layer-triangle"}) {
        const CaseSpec c = make_case(name);
        const ExactFields& e = *c.exact;
        const double h = 1e-4;
        for (const Point& x : random_points(c, 20, 8)) {
            for (int a = 0; a < 2; ++a) {
                const ScalarField ua = [&](const Point& y) { return e.u(y)(a); };
                const double scale = 1.0 + std::abs(e.lap_u(x)(a));
                EXPECT_NEAR(fd_laplacian(ua, x, h), e.lap_u(x)(a), 1e-4 * scale) << name;
                const Point d(a == 0 ? h : 0.0, a == 1 ? h : 0.0);
                EXPECT_NEAR((e.p(x + d) - e.p(x - d)) / (2 * h), e.grad_p(x)(a), 1e-6) << name;
                EXPECT_NEAR((e.psi(x + d) - e.psi(x - d)) / (2 * h), e.grad_psi(x)(a), 1e-7) << name;
            }
            EXPECT_NEAR(fd_laplacian(e.psi, x, h), e.lap_psi(x), 1e-5) << name;
        }
    }
}

TEST(Manufactured, SquareFieldsInClosedForm) {
    const CaseSpec c = make_case("convergence-square");
    for (const Point& x : random_points(c, 50, 2)) {
        const double X = x.x(), Y = x.y();
        const Eigen::Vector2d u = c.exact->u(x);
        EXPECT_NEAR(u(0), 2 * X * X * (1 - X) * (1 - X) * Y, 1e-14);
        EXPECT_NEAR(u(1), -2 * X * (1 - X) * (1 - 2 * X) * Y * Y, 1e-14);
        EXPECT_NEAR(c.exact->psi(x), X * (1 - X) * Y * (1 - Y), 1e-15);
    }
    // Navier datum on the top edge is u.n = u_2(x, 1)
    const Point top(0.3, 1.0);
    EXPECT_NEAR(c.loads.g_n(top, {0.0, 1.0}), -2 * 0.3 * 0.7 * 0.4, 1e-14);
}

TEST(Manufactured, ExactPressureHasZeroMean) {
    const CaseSpec c = make_case("convergence-square");
    // midpoint sum on a fine grid
    const int n = 400;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += c.exact->p(Point((i + 0.5) / n, (j + 0.5) / n));
    EXPECT_NEAR(s / (n * n), 0.0, 1e-5);
}

TEST(Manufactured, ZeroFieldsGiveZeroData) {
    const JetScalar zero = [](const Jet&, const Jet&) { return Jet(0.0); };
    PhysParams p;
    p.efield = [](const Point&) { return Eigen::Vector2d(1.0, 2.0); };
    const LoadData d = manufactured_data(fields_from_stream(zero, zero, zero), p);
    for (const Point& x : {Point(0.1, 0.2), Point(0.7, 0.4)}) {
        EXPECT_EQ(d.f(x).norm(), 0.0);
        EXPECT_EQ(d.g(x), 0.0);
        EXPECT_EQ(d.g_tau(x, {1.0, 0.0}), 0.0);
    }
}

TEST(Manufactured, IncompleteFieldsRejected) {
    ExactFields e;
    EXPECT_THROW(manufactured_data(e, PhysParams{}), UsageError);
}

TEST(Cases, NamesAndErrors) {
    for (const auto& n : case_names()) {
        const CaseSpec c = make_case(n);
        EXPECT_EQ(c.exact.has_value(), n == "convergence-square" || n == "boundary-layer-triangle") << n;
        EXPECT_TRUE(c.loads.complete()) << n;
        EXPECT_TRUE(check_mesh(c.initial_mesh()).ok()) << n;
    }
    EXPECT_THROW(make_case("square"), UsageError);
    EXPECT_EQ(make_case("convergence-square", {.mu = 0.01}).params.mu, 0.01);
}

TEST(Orders, ObservedOrder) {
    EXPECT_DOUBLE_EQ(observed_order(4.0, 1.0, 0.2, 0.1), 2.0);
    EXPECT_NEAR(observed_order(1.0, 1.0 / 27.0, 0.3, 0.1), 3.0, 1e-14);
}

TEST(Output, ConvergenceCsvRoundTrip) {
    const CaseSpec c = make_case("convergence-square");
    const ConvergenceResult res = run_convergence(c, 3, RunOptions{});
    ASSERT_TRUE(res.ok);
    std::ostringstream os;
    write_convergence_csv(os, res.rows);
    const auto rows = parse_csv(os.str());
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][0], "h");
    EXPECT_EQ(rows[1][3], "--");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double h0 = std::stod(rows[i - 1][0]), h1 = std::stod(rows[i][0]);
        for (int col : {2, 4, 6, 8}) {
            const double oc = std::log(std::stod(rows[i - 1][col]) / std::stod(rows[i][col])) / std::log(h0 / h1);
            EXPECT_NEAR(std::stod(rows[i][col + 1]), oc, 1e-12);
        }
    }
}

TEST(Output, VtkZeroStateTwoCells) {
    const auto sp = make_space_triple(std::make_shared<const Mesh>(make_rect_mesh(1, 1, {})), 1);
    std::ostringstream os;
    write_vtk(os, SystemState(sp));
    const std::string s = os.str();
    EXPECT_NE(s.find("POINTS 4 double"), std::string::npos);
    EXPECT_NE(s.find("CELLS 2 8"), std::string::npos);
    std::istringstream is(s.substr(s.find("POINT_DATA")));
    std::string tok;
    int numbers = 0;
    while (is >> tok) {
        if (tok.find_first_not_of("-0123456789.e") != std::string::npos) continue;
        if (tok == "4" || tok == "1") continue; // counts in section headers
        EXPECT_EQ(std::stod(tok), 0.0);
        ++numbers;
    }
    EXPECT_EQ(numbers, 4 * 3 + 4 + 4);
}

TEST(Adaptive, RoundsAndSnapshots) {
    const auto dir = std::filesystem::temp_directory_path() / "spb_adaptive_test";
    std::filesystem::remove_all(dir);
    AdaptiveOptions a;
    a.max_rounds = 4;
    a.out_dir = dir.string();
    const AdaptiveResult r = run_adaptive(make_case("nonconvex-L"), a, RunOptions{});
    ASSERT_TRUE(r.ok) << r.message;
    ASSERT_EQ(r.history.size(), 4u);
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        if (i > 0) EXPECT_GE(r.history[i].dofs, r.history[i - 1].dofs);
        EXPECT_TRUE(std::isnan(r.history[i].effectivity));
        char tag[8];
        std::snprintf(tag, sizeof tag, "%03zu", i);
        std::ifstream vtk(dir / (std::string("fields_") + tag + ".vtk"));
        ASSERT_TRUE(vtk) << tag;
        const std::string text((std::istreambuf_iterator<char>(vtk)), {});
        EXPECT_NE(text.find("CELLS " + std::to_string(r.history[i].cells) + " "), std::string::npos);
        EXPECT_EQ(r.meshes[i]->num_cells(), r.history[i].cells);
    }
    std::filesystem::remove_all(dir);
}

TEST(Adaptive, RejectsBadTheta) {
    AdaptiveOptions a;
    a.theta = 1.5;
    EXPECT_THROW(run_adaptive(make_case("nonconvex-L"), a, RunOptions{}), UsageError);
}

TEST(Adaptive, LoglogSlope) {
    std::vector<AdaptiveRow> rows(4);
    for (int i = 0; i < 4; ++i) {
        rows[i].dofs = 1000 << (2 * i);
        rows[i].psi = 1.0 / rows[i].dofs;
    }
    EXPECT_NEAR(loglog_slope(rows, 0.0), -1.0, 1e-12);
    EXPECT_NEAR(loglog_slope(rows, 5000.0), -1.0, 1e-12);
    EXPECT_TRUE(std::isnan(loglog_slope(rows, 1e9)));
}

TEST(Prolongation, ReproducesQuadratics) {
    const auto coarse = make_space_triple(std::make_shared<const Mesh>(make_rect_mesh(2, 2, {})), 1);
    const auto fm = std::make_shared<const Mesh>(refine_bisect(coarse->mesh(), {0, 3}));
    const auto fine = make_space_triple(fm, 1);
    const VectorField u = [](const Point& x) { return Eigen::Vector2d(x.x() * x.y(), 1.0 - x.y() * x.y()); };
    const ScalarField p = [](const Point& x) { return 2.0 * x.x() - x.y(); };
    const ScalarField psi = [](const Point& x) { return x.x() * x.x(); };
    const SystemState pc = prolongate(interpolate(coarse, u, p, psi), fine);
    EXPECT_LE((pc.x - interpolate(fine, u, p, psi).x).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(Config, KeyValueParsing) {
    std::istringstream ok("# comment\ncase = nonconvex-L\n  mu=0.5 # trailing\n\n");
    const auto m = read_config(ok);
    EXPECT_EQ(m.at("case"), "nonconvex-L");
    EXPECT_EQ(m.at("mu"), "0.5");
    std::istringstream bad("mu 0.5\n");
    EXPECT_THROW(read_config(bad), UsageError);
    EXPECT_THROW(read_config_file("/nonexistent/spb.cfg"), IoError);
}
