#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "spb/fespace.hpp"

namespace spb {

/// Truncated bivariate Taylor expansion of order 3 about a point:
/// f(x0 + dx, y0 + dy) ~ sum_{i+j<=3} c(i, j) dx^i dy^j.
/// Arithmetic propagates exact partial derivatives up to third order.
class Jet {
  public:
    static constexpr int kOrder = 3;
    static constexpr int kSize = (kOrder + 1) * (kOrder + 2) / 2;

    Jet() { c_.fill(0.0); }
    Jet(double v) { // NOLINT: implicit constants keep formulas readable
        c_.fill(0.0);
        c_[0] = v;
    }

    static Jet variable_x(double x0) {
        Jet j(x0);
        j.at(1, 0) = 1.0;
        return j;
    }
    static Jet variable_y(double y0) {
        Jet j(y0);
        j.at(0, 1) = 1.0;
        return j;
    }

    [[nodiscard]] double value() const { return c_[0]; }
    /// d^(i+j) f / dx^i dy^j at the expansion point.
    [[nodiscard]] double d(int i, int j) const { return at(i, j) * fact(i) * fact(j); }

    [[nodiscard]] double at(int i, int j) const { return c_[index(i, j)]; }
    double& at(int i, int j) { return c_[index(i, j)]; }

    friend Jet operator+(Jet a, const Jet& b) {
        for (int k = 0; k < kSize; ++k) a.c_[k] += b.c_[k];
        return a;
    }
    friend Jet operator-(Jet a, const Jet& b) {
        for (int k = 0; k < kSize; ++k) a.c_[k] -= b.c_[k];
        return a;
    }
    friend Jet operator-(Jet a) {
        for (auto& v : a.c_) v = -v;
        return a;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int i1 = 0; i1 <= kOrder; ++i1)
            for (int j1 = 0; i1 + j1 <= kOrder; ++j1) {
                const double av = a.at(i1, j1);
                if (av == 0.0) continue;
                for (int i2 = 0; i1 + j1 + i2 <= kOrder; ++i2)
                    for (int j2 = 0; i1 + j1 + i2 + j2 <= kOrder; ++j2) r.at(i1 + i2, j1 + j2) += av * b.at(i2, j2);
            }
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

    friend Jet reciprocal(const Jet& b) {
        // 1/(b0 + g) = (1/b0) sum (-g/b0)^k
        const double b0 = b.value();
        Jet g = b;
        g.c_[0] = 0.0;
        const Jet t = g * Jet(-1.0 / b0);
        return series(t, {1.0, 1.0, 1.0, 1.0}) * Jet(1.0 / b0);
    }
    friend Jet exp(const Jet& a) {
        const double e = std::exp(a.value());
        return series(tail(a), {1.0, 1.0, 0.5, 1.0 / 6.0}) * Jet(e);
    }
    friend Jet sin(const Jet& a) {
        const Jet g = tail(a);
        const Jet s = series(g, {0.0, 1.0, 0.0, -1.0 / 6.0});
        const Jet c = series(g, {1.0, 0.0, -0.5, 0.0});
        return s * Jet(std::cos(a.value())) + c * Jet(std::sin(a.value()));
    }
    friend Jet cos(const Jet& a) {
        const Jet g = tail(a);
        const Jet s = series(g, {0.0, 1.0, 0.0, -1.0 / 6.0});
        const Jet c = series(g, {1.0, 0.0, -0.5, 0.0});
        return c * Jet(std::cos(a.value())) - s * Jet(std::sin(a.value()));
    }

  private:
    static int index(int i, int j) {
        const int t = i + j;
        return t * (t + 1) / 2 + j;
    }
    static double fact(int n) { return n <= 1 ? 1.0 : (n == 2 ? 2.0 : 6.0); }
    static Jet tail(Jet a) {
        a.c_[0] = 0.0;
        return a;
    }
    /// sum_k coef[k] g^k for g without constant term (g^4 vanishes at order 3).
    static Jet series(const Jet& g, const std::array<double, 4>& coef) {
        const Jet g2 = g * g;
        const Jet g3 = g2 * g;
        Jet r(coef[0]);
        return r + g * Jet(coef[1]) + g2 * Jet(coef[2]) + g3 * Jet(coef[3]);
    }

    std::array<double, kSize> c_;
};

using JetScalar = std::function<Jet(const Jet& x, const Jet& y)>;

/// Exact fields with u = curl(stream) = (d_y s, -d_x s) and scalar p, psi,
/// all derivatives taken by Jet propagation.
ExactFields fields_from_stream(JetScalar stream, JetScalar pressure, JetScalar potential);

} // namespace spb
