#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <Eigen/Eigenvalues>

#include "spb/errors.hpp"
#include "spb/fespace.hpp"

namespace spb {

namespace {

/// Golub-Welsch: nodes and weights from the symmetric Jacobi matrix.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0, std::vector<double>& x,
                  std::vector<double>& w) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jm(i, i) = diag(i);
        if (i + 1 < n) jm(i, i + 1) = jm(i + 1, i) = off(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()(i);
        w[i] = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
}

/// Gauss-Jacobi rule for the weight (1 - x) on [-1, 1].
void gauss_jacobi_10(int n, std::vector<double>& x, std::vector<double>& w) {
    constexpr double alpha = 1.0, beta = 0.0;
    Eigen::VectorXd diag(n), off(std::max(0, n - 1));
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        diag(k) = k == 0 ? (beta - alpha) / (alpha + beta + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        off(k - 1) = std::sqrt(4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) / (s * s * (s + 1.0) * (s - 1.0)));
    }
    golub_welsch(diag, off, 2.0, x, w);
}

QuadratureRule build_rule(QuadDomain domain, int degree) {
    QuadratureRule r;
    r.domain = domain;
    r.degree = degree;
    const int n = std::max(1, (degree + 2) / 2);
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    if (domain == QuadDomain::Edge) {
        for (int i = 0; i < n; ++i) {
            r.points.emplace_back(0.5 * (gx[i] + 1.0), 0.0);
            r.weights.push_back(0.5 * gw[i]);
        }
        return r;
    }
    std::vector<double> jx, jw;
    gauss_jacobi_10(n, jx, jw);
    // (s, t) in [0,1]^2 -> (s (1 - t), t); the (1 - t) Jacobian is carried by the Jacobi weight.
    for (int j = 0; j < n; ++j) {
        const double t = 0.5 * (jx[j] + 1.0);
        for (int i = 0; i < n; ++i) {
            const double s = 0.5 * (gx[i] + 1.0);
            r.points.emplace_back(s * (1.0 - t), t);
            r.weights.push_back(0.5 * gw[i] * 0.25 * jw[j]);
        }
    }
    return r;
}

} // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(std::max(0, n - 1));
    for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    golub_welsch(diag, off, 2.0, x, w);
}

const QuadratureRule& quad_rule(QuadDomain domain, int degree) {
    if (degree < 0 || degree > kMaxQuadratureDegree)
        throw CapabilityError("quadrature degree " + std::to_string(degree) + " unsupported (max " +
                              std::to_string(kMaxQuadratureDegree) + ")");
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{static_cast<int>(domain), degree}];
    if (!slot) slot = std::make_unique<QuadratureRule>(build_rule(domain, degree));
    return *slot;
}

} // namespace spb
