#pragma once

// A single polynomial piece on an interval, stored in the scaled local
// variable u = (x - mid) / half in [-1, 1]. Root isolation works by
// recursive sign bisection on the monotone segments delimited by the
// critical points (themselves roots of the derivative).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "splinegale/interval.hpp"
#include "splinegale/quadrature.hpp"

namespace splinegale {

inline double horner(std::span<const double> c, double u) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
    return v;
}

/// Index of the highest nonzero coefficient (0 for the zero polynomial).
inline std::size_t effective_degree(std::span<const double> c) {
    std::size_t d = c.size();
    while (d > 1 && c[d - 1] == 0.0) --d;
    return d == 0 ? 0 : d - 1;
}

inline std::vector<double> derivative_coeffs(std::span<const double> c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

namespace detail {

inline double bisect_root(std::span<const double> c, double a, double b, double fa) {
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) return m;
        const double fm = horner(c, m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Roots of the polynomial with coefficients `c` strictly inside (lo, hi)
/// where it changes sign, plus exact zeros at critical points; sorted.
inline std::vector<double> local_roots(std::span<const double> c, double lo, double hi) {
    const std::size_t d = effective_degree(c);
    std::vector<double> roots;
    if (d == 0) return roots;
    if (d == 1) {
        const double r = -c[0] / c[1];
        if (r > lo && r < hi) roots.push_back(r);
        return roots;
    }
    const std::vector<double> dc = derivative_coeffs(c.first(d + 1));
    std::vector<double> pts{lo};
    for (double r : local_roots(dc, lo, hi)) pts.push_back(r);
    pts.push_back(hi);
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = horner(c, pts[i]);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (i > 0 && vals[i] == 0.0) roots.push_back(pts[i]);
        const double fa = vals[i], fb = vals[i + 1];
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))
            roots.push_back(detail::bisect_root(c, pts[i], pts[i + 1], fa));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

/// Compose c(alpha + beta * v), returning coefficients in v.
inline std::vector<double> compose_affine(std::span<const double> c, double alpha, double beta) {
    std::vector<double> out{0.0};
    for (std::size_t i = c.size(); i-- > 0;) {
        std::vector<double> next(out.size() + 1, 0.0);
        for (std::size_t j = 0; j < out.size(); ++j) {
            next[j] += alpha * out[j];
            next[j + 1] += beta * out[j];
        }
        next[0] += c[i];
        out = std::move(next);
    }
    out.resize(std::max<std::size_t>(c.size(), 1));
    return out;
}

inline std::vector<double> multiply_coeffs(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {0.0};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline std::vector<double> add_coeffs(std::span<const double> a, std::span<const double> b, double sa = 1.0,
                                      double sb = 1.0) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += sa * a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += sb * b[i];
    return out;
}

struct Extremum {
    double value = 0.0;
    double location = 0.0;
};

struct Polynomial {
    Interval domain{0.0, 1.0};
    std::vector<double> coeffs{0.0};

    double to_local(double x) const { return (x - domain.mid()) / domain.half(); }
    double to_global(double u) const { return domain.mid() + domain.half() * u; }

    double operator()(double x) const { return horner(coeffs, to_local(x)); }

    std::size_t degree() const { return effective_degree(coeffs); }

    /// Same polynomial re-expressed in the local variable of `sub`.
    Polynomial on(const Interval& sub) const {
        const double alpha = (sub.mid() - domain.mid()) / domain.half();
        const double beta = sub.half() / domain.half();
        return {sub, compose_affine(coeffs, alpha, beta)};
    }

    /// Integral over [a, b] (inside the domain), exact by Gauss-Legendre.
    double integrate(double a, double b) const {
        const int n = gauss_nodes_for_degree(static_cast<int>(coeffs.size()) - 1);
        return gauss_integrate([this](double x) { return (*this)(x); }, a, b, n);
    }
    double integrate() const { return integrate(domain.lo, domain.hi); }

    /// Sign-change roots in the open interval (a, b), in x coordinates.
    std::vector<double> roots(double a, double b) const {
        std::vector<double> out;
        for (double u : local_roots(coeffs, to_local(a), to_local(b))) {
            const double x = to_global(u);
            if (x > a && x < b) out.push_back(x);
        }
        return out;
    }
    std::vector<double> roots() const { return roots(domain.lo, domain.hi); }

    /// Interior critical points in (a, b).
    std::vector<double> critical_points(double a, double b) const {
        std::vector<double> out;
        const auto dc = derivative_coeffs(coeffs);
        for (double u : local_roots(dc, to_local(a), to_local(b))) {
            const double x = to_global(u);
            if (x > a && x < b) out.push_back(x);
        }
        return out;
    }

    template <class Better>
    Extremum extremum(double a, double b, Better better) const {
        Extremum best{(*this)(a), a};
        auto consider = [&](double x) {
            const double v = (*this)(x);
            if (better(v, best.value)) best = {v, x};
        };
        consider(b);
        for (double x : critical_points(a, b)) consider(x);
        return best;
    }

    Extremum max_on(double a, double b) const {
        return extremum(a, b, [](double v, double best) { return v > best; });
    }
    Extremum min_on(double a, double b) const {
        return extremum(a, b, [](double v, double best) { return v < best; });
    }
    Extremum max_abs_on(double a, double b) const {
        auto best = extremum(a, b, [](double v, double best) { return std::abs(v) > std::abs(best); });
        best.value = std::abs(best.value);
        return best;
    }
    double sup_abs() const { return max_abs_on(domain.lo, domain.hi).value; }

    /// Exact integral of |p| over [a, b] (split at sign changes).
    double abs_integral(double a, double b) const {
        std::vector<double> pts{a};
        for (double r : roots(a, b)) pts.push_back(r);
        pts.push_back(b);
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += std::abs(integrate(pts[i], pts[i + 1]));
        return sum;
    }
    double abs_integral() const { return abs_integral(domain.lo, domain.hi); }
};

/// {x in [a, b] : p(x) >= threshold}, using the roots of p - threshold.
inline IntervalUnion superlevel_set(const Polynomial& p, double a, double b, double threshold) {
    Polynomial shifted = p;
    shifted.coeffs[0] -= threshold;
    std::vector<double> pts{a};
    for (double r : shifted.roots(a, b)) pts.push_back(r);
    pts.push_back(b);
    std::vector<Interval> parts;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double m = 0.5 * (pts[i] + pts[i + 1]);
        if (p(m) >= threshold) parts.push_back({pts[i], pts[i + 1]});
    }
    return IntervalUnion(std::move(parts));
}

/// {x in [a, b] : |p(x)| >= threshold}, or |p(x)| > threshold when `strict`
/// (the two differ when p is constant at the threshold).
inline IntervalUnion abs_superlevel_set(const Polynomial& p, double a, double b, double threshold,
                                        bool strict = false) {
    Polynomial upper = p, lower = p;
    upper.coeffs[0] -= threshold;
    lower.coeffs[0] += threshold;
    std::vector<double> pts{a};
    for (double r : upper.roots(a, b)) pts.push_back(r);
    for (double r : lower.roots(a, b)) pts.push_back(r);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    std::vector<Interval> parts;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i + 1] > pts[i])) continue;
        const double m = 0.5 * (pts[i] + pts[i + 1]);
        const double v = std::abs(p(m));
        if (strict ? v > threshold : v >= threshold) parts.push_back({pts[i], pts[i + 1]});
    }
    return IntervalUnion(std::move(parts));
}

}  // namespace splinegale
