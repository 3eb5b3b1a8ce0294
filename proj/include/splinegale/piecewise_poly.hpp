#pragma once

// Piecewise polynomials on [0,1]: exact arithmetic, integrals, L_p and
// L_p(l_q) norms, sup norms and level sets, and the Remez-inequality checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "splinegale/error.hpp"
#include "splinegale/interval.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/polynomial.hpp"
#include "splinegale/quadrature.hpp"

namespace splinegale {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMaxDegree = 64;
inline constexpr int kSupSamplesPerPiece = 512;

class PiecewisePolynomial {
public:
    PiecewisePolynomial() : pieces_{{0.0}} {}

    PiecewisePolynomial(Partition grid, std::vector<std::vector<double>> pieces)
        : grid_(std::move(grid)), pieces_(std::move(pieces)) {
        if (pieces_.size() != grid_.atom_count())
            throw Error(ErrorCode::ParameterError, "piece count must equal atom count");
        for (auto& c : pieces_)
            if (c.empty()) c.push_back(0.0);
    }

    static PiecewisePolynomial constant(double c) { return {Partition(), {{c}}}; }

    /// Global monomial expansion sum_i a_i x^i, on the given grid.
    static PiecewisePolynomial from_monomials(std::span<const double> a, const Partition& grid = Partition()) {
        std::vector<std::vector<double>> pieces;
        for (std::size_t i = 0; i < grid.atom_count(); ++i) {
            const Interval atom = grid.atom(i);
            pieces.push_back(compose_affine(a, atom.mid(), atom.half()));
        }
        return {grid, std::move(pieces)};
    }

    /// Degree-0 function taking values[i] on atom i.
    static PiecewisePolynomial step(const Partition& grid, std::span<const double> values) {
        std::vector<std::vector<double>> pieces;
        for (double v : values) pieces.push_back({v});
        return {grid, std::move(pieces)};
    }

    /// Indicator of [a, b) as a degree-0 piecewise polynomial.
    static PiecewisePolynomial indicator(double a, double b) {
        std::vector<double> bp{0.0};
        if (a > 0.0) bp.push_back(a);
        if (b < 1.0) bp.push_back(b);
        bp.push_back(1.0);
        Partition grid(bp, 0.0);
        std::vector<double> values;
        for (std::size_t i = 0; i < grid.atom_count(); ++i)
            values.push_back(grid.atom(i).lo >= a && grid.atom(i).hi <= b ? 1.0 : 0.0);
        return step(grid, values);
    }

    const Partition& grid() const { return grid_; }
    const std::vector<std::vector<double>>& pieces() const { return pieces_; }
    std::size_t piece_count() const { return pieces_.size(); }

    Polynomial piece(std::size_t i) const { return {grid_.atom(i), pieces_[i]}; }

    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& c : pieces_) d = std::max(d, effective_degree(c));
        return d;
    }

    double operator()(double x) const {
        const std::size_t i = grid_.locate(x);
        return piece(i)(x);
    }

    /// Re-express on a refinement of the current grid.
    PiecewisePolynomial on_grid(const Partition& finer) const {
        if (finer == grid_) return *this;
        if (!is_refinement(finer, grid_))
            throw Error(ErrorCode::NotARefinement, "target grid does not refine the polynomial's grid");
        std::vector<std::vector<double>> out;
        out.reserve(finer.atom_count());
        for (std::size_t i = 0; i < finer.atom_count(); ++i) {
            const Interval cell = finer.atom(i);
            out.push_back(piece(grid_.locate(cell.mid())).on(cell).coeffs);
        }
        return {finer, std::move(out)};
    }

    PiecewisePolynomial& operator*=(double s) {
        for (auto& c : pieces_)
            for (double& v : c) v *= s;
        return *this;
    }

private:
    Partition grid_;
    std::vector<std::vector<double>> pieces_;
};

namespace detail {

template <class Combine>
PiecewisePolynomial combine(const PiecewisePolynomial& a, const PiecewisePolynomial& b, Combine op) {
    const Partition grid = a.grid() == b.grid() ? a.grid() : common_refinement(a.grid(), b.grid());
    const auto ea = a.on_grid(grid);
    const auto eb = b.on_grid(grid);
    std::vector<std::vector<double>> pieces(grid.atom_count());
    for (std::size_t i = 0; i < grid.atom_count(); ++i) pieces[i] = op(ea.pieces()[i], eb.pieces()[i]);
    return {grid, std::move(pieces)};
}

}  // namespace detail

inline PiecewisePolynomial add(const PiecewisePolynomial& a, const PiecewisePolynomial& b, double sa = 1.0,
                               double sb = 1.0) {
    return detail::combine(a, b, [&](const auto& x, const auto& y) { return add_coeffs(x, y, sa, sb); });
}

inline PiecewisePolynomial multiply(const PiecewisePolynomial& a, const PiecewisePolynomial& b,
                                    std::size_t max_degree = kMaxDegree) {
    if (a.degree() + b.degree() > max_degree)
        throw Error(ErrorCode::DegreeOverflow, "product degree " + std::to_string(a.degree() + b.degree()) +
                                                   " exceeds cap " + std::to_string(max_degree));
    return detail::combine(a, b, [](const auto& x, const auto& y) {
        std::vector<double> out = multiply_coeffs(x, y);
        out.resize(effective_degree(out) + 1);
        return out;
    });
}

inline PiecewisePolynomial scale(PiecewisePolynomial a, double s) {
    a *= s;
    return a;
}

inline PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b) { return add(a, b); }
inline PiecewisePolynomial operator-(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    return add(a, b, 1.0, -1.0);
}
inline PiecewisePolynomial operator*(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    return multiply(a, b);
}
inline PiecewisePolynomial operator*(double s, PiecewisePolynomial a) { return scale(std::move(a), s); }

inline PiecewisePolynomial square(const PiecewisePolynomial& a) { return multiply(a, a); }

/// Sum of squares of a sequence, on the common refinement of their grids.
inline PiecewisePolynomial sum_of_squares(std::span<const PiecewisePolynomial> fs) {
    PiecewisePolynomial total = PiecewisePolynomial::constant(0.0);
    for (const auto& f : fs) total = total + square(f);
    return total;
}

/// Exact integral, per piece by Gauss-Legendre with ceil((d+1)/2) nodes.
inline double integrate(const PiecewisePolynomial& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f.piece_count(); ++i) sum += f.piece(i).integrate();
    return sum;
}

namespace detail {

/// Calls visit(piece, a, b) for every piece overlapping `window` with positive length.
template <class Visit>
void for_each_overlap(const PiecewisePolynomial& f, const Interval& window, Visit visit) {
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Interval atom = f.grid().atom(i);
        const double a = std::max(atom.lo, window.lo);
        const double b = std::min(atom.hi, window.hi);
        if (b > a) visit(f.piece(i), a, b);
    }
}

}  // namespace detail

inline double integrate_on(const PiecewisePolynomial& f, const Interval& window) {
    double sum = 0.0;
    detail::for_each_overlap(f, window, [&](const Polynomial& p, double a, double b) { sum += p.integrate(a, b); });
    return sum;
}

inline double abs_integral_on(const PiecewisePolynomial& f, const Interval& window) {
    double sum = 0.0;
    detail::for_each_overlap(f, window,
                             [&](const Polynomial& p, double a, double b) { sum += p.abs_integral(a, b); });
    return sum;
}

inline double abs_integral(const PiecewisePolynomial& f) { return abs_integral_on(f, {0.0, 1.0}); }

/// Dense-sampling lower bound of sup |p| on [a, b].
inline double sampled_sup_abs(const Polynomial& p, double a, double b, int samples = kSupSamplesPerPiece) {
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double x = a + (b - a) * (static_cast<double>(s) + 0.5) / samples;
        best = std::max(best, std::abs(p(x)));
    }
    return best;
}

/// Essential sup of |f| over `window`: analytic per-piece maximum from
/// endpoints and critical points, cross-checked against dense sampling.
inline Extremum sup_norm_with_location(const PiecewisePolynomial& f, const Interval& window) {
    Extremum best{0.0, window.lo};
    bool any = false;
    detail::for_each_overlap(f, window, [&](const Polynomial& p, double a, double b) {
        const Extremum e = p.max_abs_on(a, b);
        const double sampled = sampled_sup_abs(p, a, b);
        if (sampled > e.value * (1.0 + 1e-9) + 1e-300)
            throw Error(ErrorCode::SamplingDisagreement, "analytic sup " + std::to_string(e.value) +
                                                             " below sampled value " + std::to_string(sampled));
        if (!any || e.value > best.value) best = e;
        any = true;
    });
    if (!any) best = {std::abs(f(window.lo)), window.lo};
    return best;
}

inline double sup_norm_on(const PiecewisePolynomial& f, const Interval& window) {
    return sup_norm_with_location(f, window).value;
}

inline double sup_norm(const PiecewisePolynomial& f) { return sup_norm_on(f, {0.0, 1.0}); }

inline double sup_norm_on(const PiecewisePolynomial& f, const IntervalUnion& set) {
    double best = 0.0;
    for (const auto& part : set.parts()) best = std::max(best, sup_norm_on(f, part));
    return best;
}

/// Minimum of f (not |f|) over [0,1] with its location.
inline Extremum min_value(const PiecewisePolynomial& f) {
    Extremum best{kInf, 0.0};
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Polynomial p = f.piece(i);
        const Extremum e = p.min_on(p.domain.lo, p.domain.hi);
        if (e.value < best.value) best = e;
    }
    return best;
}

inline Extremum max_value(const PiecewisePolynomial& f) {
    Extremum best{-kInf, 0.0};
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Polynomial p = f.piece(i);
        const Extremum e = p.max_on(p.domain.lo, p.domain.hi);
        if (e.value > best.value) best = e;
    }
    return best;
}

inline bool is_even_integer(double p) { return std::isfinite(p) && p == std::floor(p) && std::fmod(p, 2.0) == 0.0; }

/// Segments of `window` on which every listed function is a single
/// polynomial without sign changes.
inline std::vector<Interval> smooth_segments(std::span<const PiecewisePolynomial> fs, const Interval& window) {
    std::vector<double> pts{window.lo, window.hi};
    for (const auto& f : fs) {
        for (double t : f.grid().breakpoints())
            if (t > window.lo && t < window.hi) pts.push_back(t);
        detail::for_each_overlap(f, window, [&](const Polynomial& p, double a, double b) {
            for (double r : p.roots(a, b)) pts.push_back(r);
        });
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (pts[i + 1] > pts[i]) out.push_back({pts[i], pts[i + 1]});
    return out;
}

/// ||f||_{L_p(window)} for p in [1, inf]. Exact for p = 1, even p and p = inf;
/// adaptive quadrature of |f|^p otherwise.
inline double lp_norm_on(const PiecewisePolynomial& f, const Interval& window, double p,
                         const QuadratureOptions& opt = {}) {
    if (!(p >= 1.0)) throw Error(ErrorCode::ParameterError, "L_p norm needs p >= 1");
    if (std::isinf(p)) return sup_norm_on(f, window);
    if (p == 1.0) return abs_integral_on(f, window);
    double sum = 0.0;
    const int exact_nodes = gauss_nodes_for_degree(static_cast<int>(f.degree() * static_cast<std::size_t>(p)));
    if (is_even_integer(p) && exact_nodes <= kMaxGaussNodes) {
        detail::for_each_overlap(f, window, [&](const Polynomial& poly, double a, double b) {
            sum += gauss_integrate([&](double x) { return std::pow(poly(x), p); }, a, b, exact_nodes);
        });
    } else {
        const PiecewisePolynomial single[] = {f};
        const auto segments = smooth_segments(single, window);
        sum = adaptive_integrate([&](double x) { return std::pow(std::abs(f(x)), p); }, segments, opt);
    }
    return std::pow(sum, 1.0 / p);
}

inline double lp_norm(const PiecewisePolynomial& f, double p, const QuadratureOptions& opt = {}) {
    return lp_norm_on(f, {0.0, 1.0}, p, opt);
}

/// {x in window : f(x) >= threshold} via per-piece root isolation.
inline IntervalUnion superlevel_set(const PiecewisePolynomial& f, double threshold,
                                    const Interval& window = {0.0, 1.0}) {
    IntervalUnion out;
    detail::for_each_overlap(f, window, [&](const Polynomial& p, double a, double b) {
        out = out.united(superlevel_set(p, a, b, threshold));
    });
    return out;
}

/// {x in window : |f(x)| >= threshold}; with `strict`, |f(x)| > threshold.
inline IntervalUnion abs_superlevel_set(const PiecewisePolynomial& f, double threshold,
                                        const Interval& window = {0.0, 1.0}, bool strict = false) {
    IntervalUnion out;
    detail::for_each_overlap(f, window, [&](const Polynomial& p, double a, double b) {
        out = out.united(abs_superlevel_set(p, a, b, threshold, strict));
    });
    return out;
}

/// Pointwise max_n |f_n| as an exact piecewise polynomial: each atom of the
/// common grid is cut at every crossing |f_n| = |f_m| and sign change.
inline PiecewisePolynomial max_abs_envelope(std::span<const PiecewisePolynomial> fs) {
    if (fs.empty()) return PiecewisePolynomial::constant(0.0);
    Partition grid = fs[0].grid();
    for (const auto& f : fs) grid = common_refinement(grid, f.grid());
    std::vector<PiecewisePolynomial> aligned;
    for (const auto& f : fs) aligned.push_back(f.on_grid(grid));

    std::vector<double> breakpoints{0.0};
    std::vector<std::vector<double>> pieces;
    for (std::size_t c = 0; c < grid.atom_count(); ++c) {
        const Interval cell = grid.atom(c);
        std::vector<double> cuts{cell.lo, cell.hi};
        for (std::size_t n = 0; n < aligned.size(); ++n) {
            const Polynomial pn = aligned[n].piece(c);
            for (double r : pn.roots()) cuts.push_back(r);
            for (std::size_t m = n + 1; m < aligned.size(); ++m) {
                const Polynomial pm = aligned[m].piece(c);
                const Polynomial diff{cell, add_coeffs(pn.coeffs, pm.coeffs, 1.0, -1.0)};
                const Polynomial sum{cell, add_coeffs(pn.coeffs, pm.coeffs)};
                for (double r : diff.roots()) cuts.push_back(r);
                for (double r : sum.roots()) cuts.push_back(r);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const Interval seg{cuts[s], cuts[s + 1]};
            if (!(seg.hi > seg.lo) || !(seg.hi > breakpoints.back())) continue;
            const double m = seg.mid();
            std::size_t best = 0;
            double best_val = -1.0;
            for (std::size_t n = 0; n < aligned.size(); ++n) {
                const double v = std::abs(aligned[n].piece(c)(m));
                if (v > best_val) best_val = v, best = n;
            }
            Polynomial chosen = aligned[best].piece(c).on(seg);
            if (aligned[best].piece(c)(m) < 0.0)
                for (double& v : chosen.coeffs) v = -v;
            breakpoints.push_back(seg.hi);
            pieces.push_back(std::move(chosen.coeffs));
        }
    }
    breakpoints.back() = 1.0;
    return {Partition(std::move(breakpoints), 0.0), std::move(pieces)};
}

namespace detail {

/// Golden-section refinement of a maximum of `f` inside [a, b].
template <class F>
double golden_max(F& f, double a, double b, double best) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

/// Sup of a continuous function on each segment: dense samples plus
/// golden-section refinement around the best sample.
template <class F>
double sampled_sup(F&& f, std::span<const Interval> segments, int samples = 64) {
    double best = 0.0;
    for (const auto& seg : segments) {
        double seg_best = std::max(f(seg.lo), f(seg.hi));
        int arg = -1;
        for (int s = 0; s <= samples; ++s) {
            const double x = seg.lo + seg.length() * s / samples;
            const double v = f(x);
            if (v >= seg_best) seg_best = v, arg = s;
        }
        if (arg >= 0) {
            const double lo = seg.lo + seg.length() * std::max(arg - 1, 0) / samples;
            const double hi = seg.lo + seg.length() * std::min(arg + 1, samples) / samples;
            seg_best = golden_max(f, lo, hi, seg_best);
        }
        best = std::max(best, seg_best);
    }
    return best;
}

}  // namespace detail

/// ||(f_n)||_{L_p(l_q)} for p, q in [1, inf].
inline double lplq_norm(std::span<const PiecewisePolynomial> fs, double p, double q,
                        const QuadratureOptions& opt = {}) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw Error(ErrorCode::ParameterError, "L_p(l_q) norm needs p, q >= 1");
    if (fs.empty()) return 0.0;
    if (std::isinf(q) && std::isinf(p)) {
        double best = 0.0;
        for (const auto& f : fs) best = std::max(best, sup_norm(f));
        return best;
    }
    if (std::isinf(q)) return lp_norm(max_abs_envelope(fs), p, opt);

    auto inner = [&](double x) {
        double s = 0.0;
        for (const auto& f : fs) s += std::pow(std::abs(f(x)), q);
        return s;
    };
    if (std::isinf(p)) {
        if (is_even_integer(q)) {
            std::size_t deg = 0;
            for (const auto& f : fs) deg = std::max(deg, f.degree());
            if (deg * static_cast<std::size_t>(q) <= kMaxDegree) {
                PiecewisePolynomial total = PiecewisePolynomial::constant(0.0);
                for (const auto& f : fs) {
                    PiecewisePolynomial power = PiecewisePolynomial::constant(1.0);
                    for (int e = 0; e < static_cast<int>(q); ++e) power = power * f;
                    total = total + power;
                }
                return std::pow(sup_norm(total), 1.0 / q);
            }
        }
        const auto segments = smooth_segments(fs, {0.0, 1.0});
        return std::pow(detail::sampled_sup(inner, segments), 1.0 / q);
    }
    if (q == 2.0 && is_even_integer(p)) {
        Partition grid = fs[0].grid();
        std::size_t deg = 0;
        for (const auto& f : fs) grid = common_refinement(grid, f.grid()), deg = std::max(deg, f.degree());
        const int nodes = gauss_nodes_for_degree(static_cast<int>(deg * static_cast<std::size_t>(p)));
        if (nodes <= kMaxGaussNodes) {
            double sum = 0.0;
            for (std::size_t i = 0; i < grid.atom_count(); ++i) {
                const Interval cell = grid.atom(i);
                sum += gauss_integrate([&](double x) { return std::pow(inner(x), p / 2.0); }, cell.lo, cell.hi,
                                       nodes);
            }
            return std::pow(sum, 1.0 / p);
        }
    }
    const auto segments = smooth_segments(fs, {0.0, 1.0});
    const double sum = adaptive_integrate([&](double x) { return std::pow(inner(x), p / q); }, segments, opt);
    return std::pow(sum, 1.0 / p);
}

inline double conjugate_exponent(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

struct HolderCheck {
    double pairing = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline HolderCheck holder_pairing_check(std::span<const PiecewisePolynomial> fs,
                                        std::span<const PiecewisePolynomial> gs, double p, double q,
                                        const QuadratureOptions& opt = {}) {
    if (fs.size() != gs.size()) throw Error(ErrorCode::ParameterError, "sequences must have equal length");
    if (!(p >= 1.0 && q >= 1.0) || std::isinf(p) || std::isinf(q))
        throw Error(ErrorCode::ParameterError, "Hoelder pairing needs 1 <= p, q < inf");
    HolderCheck out;
    for (std::size_t n = 0; n < fs.size(); ++n) out.pairing += integrate(fs[n] * gs[n]);
    out.bound = lplq_norm(fs, p, q, opt) * lplq_norm(gs, conjugate_exponent(p), conjugate_exponent(q), opt);
    out.pass = std::abs(out.pairing) <= out.bound * (1.0 + 1e-9);
    return out;
}

// ---------------------------------------------------------------------------
// Remez inequality for a single polynomial piece.

struct RemezBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// ||p||_{L_inf(V)} <= (4|V|/|E|)^{k-1} ||p||_{L_inf(E)} for order-k p.
inline RemezBound remez_bound_check(const Polynomial& p, const Interval& v, const IntervalUnion& e, int k) {
    if (k < 1) throw Error(ErrorCode::ParameterError, "order must be positive");
    if (p.degree() + 1 > static_cast<std::size_t>(k))
        throw Error(ErrorCode::ParameterError, "polynomial order exceeds k");
    const IntervalUnion inside = e.intersect(v);
    if (!(inside.measure() > 0.0)) throw Error(ErrorCode::EmptySet, "E has zero measure");
    RemezBound out;
    out.lhs = p.max_abs_on(v.lo, v.hi).value;
    double sup_e = 0.0;
    for (const auto& part : inside.parts()) sup_e = std::max(sup_e, p.max_abs_on(part.lo, part.hi).value);
    out.rhs = std::pow(4.0 * v.length() / inside.measure(), k - 1) * sup_e;
    out.pass = out.lhs <= out.rhs * (1.0 + 1e-10);
    return out;
}

struct RemezLevel {
    IntervalUnion set;
    double threshold = 0.0;
    double measure = 0.0;
    bool pass = false;
};

/// Measure of {x in V : |p(x)| >= 8^{-(k-1)} ||p||_{L_inf(V)}}; at least |V|/2.
inline RemezLevel remez_level_measure(const Polynomial& p, const Interval& v, int k) {
    if (k < 1) throw Error(ErrorCode::ParameterError, "order must be positive");
    if (p.degree() + 1 > static_cast<std::size_t>(k))
        throw Error(ErrorCode::ParameterError, "polynomial order exceeds k");
    RemezLevel out;
    const double sup = p.max_abs_on(v.lo, v.hi).value;
    out.threshold = std::pow(8.0, -(k - 1)) * sup;
    out.set = abs_superlevel_set(p, v.lo, v.hi, out.threshold);
    out.measure = out.set.measure();
    out.pass = out.measure >= v.length() / 2.0 - 1e-12;
    return out;
}

}  // namespace splinegale
