#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "splinegale/error.hpp"
#include "splinegale/interval.hpp"

namespace splinegale {

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1]
    std::vector<double> weights;
};

inline constexpr int kMaxGaussNodes = 160;

namespace detail {

inline GaussRule make_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
inline const GaussRule& gauss_legendre(int n) {
    static const std::vector<GaussRule> rules = [] {
        std::vector<GaussRule> r(kMaxGaussNodes + 1);
        r[1] = {{0.0}, {2.0}};
        for (int m = 2; m <= kMaxGaussNodes; ++m) r[m] = detail::make_gauss_legendre(m);
        return r;
    }();
    if (n < 1 || n > kMaxGaussNodes)
        throw Error(ErrorCode::ParameterError, "unsupported Gauss rule size " + std::to_string(n));
    return rules[n];
}

/// Number of nodes making Gauss-Legendre exact for the given degree.
inline int gauss_nodes_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

template <class F>
double gauss_integrate(F&& f, double a, double b, int n) {
    const GaussRule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

struct QuadratureOptions {
    double rel_tol = 1e-10;
    int max_depth = 40;
    int nodes = 12;
};

namespace detail {

template <class F>
double adapt(F& f, double a, double b, double whole, double tol, int depth, const QuadratureOptions& opt) {
    const double m = 0.5 * (a + b);
    const double left = gauss_integrate(f, a, m, opt.nodes);
    const double right = gauss_integrate(f, m, b, opt.nodes);
    const double err = std::abs(left + right - whole);
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
    if (err <= tol || err <= floor) return left + right;
    if (depth >= opt.max_depth)
        throw Error(ErrorCode::QuadratureNonConvergence,
                    "no convergence on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    return adapt(f, a, m, left, 0.5 * tol, depth + 1, opt) + adapt(f, m, b, right, 0.5 * tol, depth + 1, opt);
}

}  // namespace detail

/// Adaptive Gauss quadrature over a list of segments, with a tolerance
/// relative to the integral of |f|. Segment endpoints should sit at the
/// non-smooth points of f.
template <class F>
double adaptive_integrate(F&& f, std::span<const Interval> segments, const QuadratureOptions& opt = {}) {
    std::vector<double> coarse(segments.size());
    double scale = 0.0;
    double total_length = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        coarse[i] = gauss_integrate(f, s.lo, s.hi, opt.nodes);
        scale += gauss_integrate([&f](double x) { return std::abs(f(x)); }, s.lo, s.hi, opt.nodes);
        total_length += s.length();
    }
    if (scale == 0.0 || total_length <= 0.0) return 0.0;
    const double tol = opt.rel_tol * scale;
    double sum = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.hi > s.lo)) continue;
        sum += detail::adapt(f, s.lo, s.hi, coarse[i], tol * s.length() / total_length, 0, opt);
    }
    return sum;
}

}  // namespace splinegale
