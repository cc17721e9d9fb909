#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <Eigen/LU>

#include "spb/errors.hpp"
#include "spb/fespace.hpp"

namespace spb {

namespace {

const std::array<Point, 3> kRefVertices{Point(0.0, 0.0), Point(1.0, 0.0), Point(0.0, 1.0)};

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

} // namespace

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 1 || degree > 3)
        throw CapabilityError("Lagrange degree " + std::to_string(degree) + " unsupported (1..3)");
    for (const auto& v : kRefVertices) nodes_.push_back(v);
    for (int le = 0; le < 3; ++le) {
        const Point& a = kRefVertices[(le + 1) % 3];
        const Point& b = kRefVertices[(le + 2) % 3];
        for (int j = 1; j < degree; ++j) nodes_.push_back(a + (static_cast<double>(j) / degree) * (b - a));
    }
    if (degree == 3) nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);

    for (int total = 0; total <= degree; ++total)
        for (int b = 0; b <= total; ++b) monomials_.emplace_back(total - b, b);

    const int n = size();
    Eigen::MatrixXd vandermonde(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            vandermonde(i, j) = ipow(nodes_[i].x(), monomials_[j].first) * ipow(nodes_[i].y(), monomials_[j].second);
    coeffs_ = vandermonde.fullPivLu().inverse();
}

Tabulation LagrangeBasis::tabulate(std::span<const Point> pts) const {
    const int nq = static_cast<int>(pts.size());
    const int n = size();
    Eigen::MatrixXd m(nq, n), mx(nq, n), my(nq, n), mxx(nq, n), mxy(nq, n), myy(nq, n);
    for (int q = 0; q < nq; ++q) {
        const double x = pts[q].x(), y = pts[q].y();
        for (int j = 0; j < n; ++j) {
            const auto [a, b] = monomials_[j];
            m(q, j) = ipow(x, a) * ipow(y, b);
            mx(q, j) = a > 0 ? a * ipow(x, a - 1) * ipow(y, b) : 0.0;
            my(q, j) = b > 0 ? b * ipow(x, a) * ipow(y, b - 1) : 0.0;
            mxx(q, j) = a > 1 ? a * (a - 1) * ipow(x, a - 2) * ipow(y, b) : 0.0;
            mxy(q, j) = (a > 0 && b > 0) ? a * b * ipow(x, a - 1) * ipow(y, b - 1) : 0.0;
            myy(q, j) = b > 1 ? b * (b - 1) * ipow(x, a) * ipow(y, b - 2) : 0.0;
        }
    }
    return {m * coeffs_, mx * coeffs_, my * coeffs_, mxx * coeffs_, mxy * coeffs_, myy * coeffs_};
}

const LagrangeBasis& lagrange_basis(int degree) {
    static const LagrangeBasis p1(1), p2(2), p3(3);
    switch (degree) {
        case 1: return p1;
        case 2: return p2;
        case 3: return p3;
        default: throw CapabilityError("Lagrange degree " + std::to_string(degree) + " unsupported (1..3)");
    }
}

Tabulation tabulate_basis(int degree, std::span<const Point> ref_points) {
    return lagrange_basis(degree).tabulate(ref_points);
}

Point edge_to_reference(int le, double t) {
    const Point& a = kRefVertices[(le + 1) % 3];
    const Point& b = kRefVertices[(le + 2) % 3];
    return a + t * (b - a);
}

const Tabulation& cell_tabulation(int degree, int quad_degree) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<Tabulation>> cache;
    const QuadratureRule& rule = quad_rule(QuadDomain::Triangle, quad_degree);
    std::lock_guard lock(mutex);
    auto& slot = cache[{degree, quad_degree}];
    if (!slot) slot = std::make_unique<Tabulation>(tabulate_basis(degree, rule.points));
    return *slot;
}

const Tabulation& edge_tabulation(int degree, int le, int quad_degree) {
    static std::mutex mutex;
    static std::map<std::array<int, 3>, std::unique_ptr<Tabulation>> cache;
    const QuadratureRule& rule = quad_rule(QuadDomain::Edge, quad_degree);
    std::lock_guard lock(mutex);
    auto& slot = cache[{degree, le, quad_degree}];
    if (!slot) {
        std::vector<Point> pts;
        for (const auto& p : rule.points) pts.push_back(edge_to_reference(le, p.x()));
        slot = std::make_unique<Tabulation>(tabulate_basis(degree, pts));
    }
    return *slot;
}

double CellMap::laplacian(double hxx, double hxy, double hyy) const {
    Eigen::Matrix2d h;
    h << hxx, hxy, hxy, hyy;
    return (jac_inv.transpose() * h * jac_inv).trace();
}

CellMap cell_map(const Mesh& m, int c) {
    const auto& k = m.cell(c);
    CellMap cm;
    cm.origin = m.vertex(k[0]);
    cm.jac.col(0) = m.vertex(k[1]) - cm.origin;
    cm.jac.col(1) = m.vertex(k[2]) - cm.origin;
    cm.det = cm.jac.determinant();
    cm.jac_inv = cm.jac.inverse();
    return cm;
}

} // namespace spb
