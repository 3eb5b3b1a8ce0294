#pragma once

// Martingale differences of spline projections, square functions, and the
// inequality checks built on them (Burkholder, Stein, Lepingle, duality,
// H1/BMO pairing, Doob).
//
// Levels are 0-based: P_n projects onto S_k(filtration.level(n)) and
// Delta_n = P_n f - P_{n-1} f with P_{-1} = 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "splinegale/adapted.hpp"
#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/g_construction.hpp"
#include "splinegale/kernel_ops.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/projection.hpp"
#include "splinegale/random.hpp"

namespace splinegale {

struct DeltaSequence {
    Filtration filtration;
    int k = 1;
    std::vector<Spline> projections;  // P_n f on level n
    std::vector<Spline> deltas;       // Delta_n f on level n
    std::vector<PiecewisePolynomial> delta_functions;

    std::size_t size() const { return deltas.size(); }
};

inline DeltaSequence make_deltas(const Filtration& filtration, int k, const PiecewisePolynomial& f,
                                 std::span<const Projector> projectors = {}) {
    std::vector<Projector> own;
    if (projectors.empty()) {
        own = level_projectors(filtration, k);
        projectors = own;
    }
    DeltaSequence ds{filtration, k, {}, {}, {}};
    for (std::size_t n = 0; n < filtration.size(); ++n) {
        Spline pn = projectors[n].project(f);
        std::vector<double> c = pn.coeffs;
        if (n > 0) {
            const Spline prev = refine_coeffs(ds.projections[n - 1], filtration.level(n));
            for (std::size_t i = 0; i < c.size(); ++i) c[i] -= prev.coeffs[i];
        }
        Spline delta(pn.basis, std::move(c));
        ds.delta_functions.push_back(to_piecewise(delta));
        ds.deltas.push_back(std::move(delta));
        ds.projections.push_back(std::move(pn));
    }
    return ds;
}

struct SquareFunction {
    PiecewisePolynomial q;                 // sum_n Delta_n^2
    std::vector<PiecewisePolynomial> partial;  // S_n^2 = sum_{l <= n} Delta_l^2
    std::vector<PiecewisePolynomial> deltas;

    double operator()(double x) const { return std::sqrt(std::max(0.0, q(x))); }

    double lp_norm(double p, const QuadratureOptions& opt = {}) const { return lplq_norm(deltas, p, 2.0, opt); }
};

inline SquareFunction square_function(const DeltaSequence& ds) {
    SquareFunction s;
    s.deltas = ds.delta_functions;
    s.partial = running_square_sums(s.deltas);
    s.q = s.partial.empty() ? PiecewisePolynomial::constant(0.0) : s.partial.back();
    return s;
}

/// Relative gap between ||Sf||_2^2 and ||P_N f||_2^2.
inline double parseval_defect(const DeltaSequence& ds) {
    const double s2 = integrate(square_function(ds).q);
    const double p2 = integrate(square(to_piecewise(ds.projections.back())));
    const double scale = std::max(std::abs(p2), 1e-300);
    return std::abs(s2 - p2) / scale;
}

/// max_{l != n} |<Delta_l f, Delta_n g>| / (||Delta_l f||_2 ||Delta_n g||_2), over nonzero pairs.
inline double orthogonality_defect(const DeltaSequence& df, const DeltaSequence& dg) {
    double worst = 0.0;
    std::vector<double> nf, ng;
    for (const auto& d : df.delta_functions) nf.push_back(std::sqrt(integrate(square(d))));
    for (const auto& d : dg.delta_functions) ng.push_back(std::sqrt(integrate(square(d))));
    for (std::size_t l = 0; l < df.size(); ++l)
        for (std::size_t n = 0; n < dg.size(); ++n) {
            if (l == n || nf[l] == 0.0 || ng[n] == 0.0) continue;
            const double ip = integrate(df.delta_functions[l] * dg.delta_functions[n]);
            worst = std::max(worst, std::abs(ip) / (nf[l] * ng[n]));
        }
    return worst;
}

struct NormRatio {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

inline NormRatio make_ratio(double lhs, double rhs) {
    return {lhs, rhs, rhs > 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : kInf)};
}

/// ||Sf||_p against ||P_N f||_p.
inline NormRatio burkholder_ratio(const DeltaSequence& ds, double p, const QuadratureOptions& opt = {}) {
    return make_ratio(square_function(ds).lp_norm(p, opt), lp_norm(to_piecewise(ds.projections.back()), p, opt));
}

struct SignReport {
    double square_l1 = 0.0;     // ||Sf||_1
    double best_signed = 0.0;   // max over examined sign patterns of ||sum eps_n Delta_n||_1
    double ratio = 0.0;         // best_signed / square_l1
    std::vector<int> best_signs;
    std::uint64_t patterns = 0;
    bool exhaustive = false;
};

inline constexpr std::size_t kMaxExhaustiveSigns = 14;

/// Estimate of sup_eps ||sum eps_n Delta_n f||_1. The sign of the first
/// term is fixed (the norm is even); up to 2^14 patterns are enumerated,
/// beyond that a greedy pattern and `trials` random patterns are used.
inline SignReport sign_randomized_ratio(const DeltaSequence& ds, std::size_t trials, std::uint64_t seed) {
    SignReport out;
    const std::size_t n = ds.size();
    out.square_l1 = square_function(ds).lp_norm(1.0);
    if (n == 0) return out;
    const Partition& finest = ds.filtration.level(n - 1);
    std::vector<std::vector<double>> lifted;
    for (const auto& d : ds.deltas) lifted.push_back(refine_coeffs(d, finest).coeffs);
    const BSplineBasis basis(finest, ds.k);
    auto evaluate = [&](const std::vector<int>& eps) {
        std::vector<double> c(basis.dim(), 0.0);
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += eps[l] * lifted[l][i];
        ++out.patterns;
        return abs_integral(to_piecewise(Spline(basis, std::move(c))));
    };
    auto consider = [&](const std::vector<int>& eps) {
        const double v = evaluate(eps);
        if (v > out.best_signed || out.best_signs.empty()) out.best_signed = v, out.best_signs = eps;
    };
    std::vector<int> eps(n, 1);
    if (n - 1 <= kMaxExhaustiveSigns) {
        out.exhaustive = true;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
            for (std::size_t l = 1; l < n; ++l) eps[l] = (mask >> (l - 1)) & 1U ? -1 : 1;
            consider(eps);
        }
    } else {
        // Greedy: fix signs one level at a time, maximizing the partial L1 norm.
        std::vector<int> greedy(n, 0);
        greedy[0] = 1;
        for (std::size_t l = 1; l < n; ++l) {
            greedy[l] = 1;
            const double plus = evaluate(greedy);
            greedy[l] = -1;
            const double minus = evaluate(greedy);
            greedy[l] = plus >= minus ? 1 : -1;
        }
        consider(greedy);
        Rng rng(seed);
        for (std::size_t t = 0; t < trials; ++t) {
            for (std::size_t l = 1; l < n; ++l) eps[l] = (rng.next() >> 63) ? -1 : 1;
            consider(eps);
        }
    }
    out.ratio = out.square_l1 > 0.0 ? out.best_signed / out.square_l1 : 0.0;
    return out;
}

enum class SteinMode { P, T };

inline bool stein_admissible(double p, double r) {
    return (1.0 <= r && r <= p && std::isfinite(p)) || (1.0 < p && p <= r);
}

/// ||(P_n f_n)||_{L_p(l_r)} (or T_n f_n) against ||(f_n)||_{L_p(l_r)}, f_n arbitrary.
inline NormRatio stein_check(std::span<const PiecewisePolynomial> fs, const Filtration& filtration, int k, double p,
                             double r, SteinMode mode, double q = 0.5, const QuadratureOptions& opt = {}) {
    if (!stein_admissible(p, r))
        throw Error(ErrorCode::ParameterError, "(p, r) outside 1 <= r <= p < inf or 1 < p <= r <= inf");
    if (fs.size() > filtration.size()) throw Error(ErrorCode::ParameterError, "more functions than levels");
    std::vector<PiecewisePolynomial> images;
    for (std::size_t n = 0; n < fs.size(); ++n) {
        if (mode == SteinMode::P) {
            images.push_back(to_piecewise(Projector(filtration.level(n), k).project(fs[n])));
        } else {
            images.push_back(apply_T(build_T(filtration.level(n), k, q), fs[n]));
        }
    }
    return make_ratio(lplq_norm(images, p, r, opt), lplq_norm(fs, p, r, opt));
}

/// ||(P'_{n-1} f_n)||_{L1(l2)} against ||(f_n)||_{L1(l2)} with P' of order
/// k'; P'_{-1} projects onto the order-k' splines on the trivial partition.
inline NormRatio lepingle_check(const AdaptedSequence& fs, int kprime, const QuadratureOptions& opt = {}) {
    const auto functions = fs.functions();
    std::vector<PiecewisePolynomial> predicted;
    for (std::size_t n = 0; n < functions.size(); ++n) {
        const Projector prev(n == 0 ? Partition() : fs.filtration.level(n - 1), kprime);
        predicted.push_back(to_piecewise(prev.project(functions[n])));
    }
    return make_ratio(lplq_norm(predicted, 1.0, 2.0, opt), lplq_norm(functions, 1.0, 2.0, opt));
}

struct DualityReport {
    double lhs = 0.0;          // sum_n int |f_n h_n|
    double rhs = 0.0;          // int X_N^{1/2} * sup_n ||P_n(sum_{l>=n} h_l^2)||_inf^{1/2}
    double ratio = 0.0;
    double sigma1 = 0.0;       // sum_n int f_n^2 / g_n
    double sigma2 = 0.0;       // sum_n int g_n h_n^2
    double sigma1_bound = 0.0; // 2 int X_N^{1/2}
    bool sigma1_pass = false;
    bool cauchy_schwarz_pass = false;  // lhs <= sqrt(sigma1 sigma2)
};

/// Levels 0 .. last of `fs` and `hs` (equal lengths).
inline DualityReport main_duality_check(const AdaptedSequence& fs, std::span<const PiecewisePolynomial> hs,
                                        const QuadratureOptions& opt = {}) {
    if (hs.size() != fs.size()) throw Error(ErrorCode::ParameterError, "f and h sequences differ in length");
    const std::size_t levels = fs.size();
    const auto functions = fs.functions();
    const GSequence gs = build_g(fs, levels - 1);
    DualityReport out;
    for (std::size_t n = 0; n < levels; ++n) out.lhs += abs_integral(functions[n] * hs[n]);
    const double mean_root = lplq_norm(functions, 1.0, 2.0, opt);
    double sup_tail = 0.0;
    PiecewisePolynomial tail = PiecewisePolynomial::constant(0.0);
    for (std::size_t n = levels; n-- > 0;) {
        tail = tail + square(hs[n]);
        const Projector pr(fs.filtration.level(n), fs.k);
        sup_tail = std::max(sup_tail, sup_norm(to_piecewise(pr.project(tail))));
    }
    out.rhs = mean_root * std::sqrt(sup_tail);
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : (out.lhs == 0.0 ? 0.0 : kInf);
    for (std::size_t n = 0; n < levels; ++n) {
        const PiecewisePolynomial g = to_piecewise(gs.g[n]);
        const PiecewisePolynomial& f = functions[n];
        const PiecewisePolynomial both[] = {f, g};
        const auto segments = smooth_segments(both, {0.0, 1.0});
        out.sigma1 += adaptive_integrate(
            [&](double x) {
                const double gv = g(x);
                const double fv = f(x);
                return gv > 0.0 ? fv * fv / gv : 0.0;
            },
            segments, opt);
        out.sigma2 += integrate(g * square(hs[n]));
    }
    out.sigma1_bound = 2.0 * mean_root;
    out.sigma1_pass = out.sigma1 <= out.sigma1_bound * (1.0 + 1e-9) + 1e-300;
    out.cauchy_schwarz_pass = out.lhs <= std::sqrt(out.sigma1 * out.sigma2) * (1.0 + 1e-9) + 1e-300;
    return out;
}

/// ||f||_{H_{1,k}} at finite depth: int S_N(f).
inline double h1_norm(const PiecewisePolynomial& f, const Filtration& filtration, int k,
                      const QuadratureOptions& opt = {}) {
    return square_function(make_deltas(filtration, k, f)).lp_norm(1.0, opt);
}

/// max_n sup_x (sum_{l >= n} T_n((Delta_l h)^2))(x), square-rooted.
inline double bmo_norm(const PiecewisePolynomial& h, const Filtration& filtration, int k, double q) {
    const DeltaSequence ds = make_deltas(filtration, k, h);
    double best = 0.0;
    for (std::size_t n = 0; n < filtration.size(); ++n) {
        const KernelOperator t = build_T(filtration.level(n), k, q);
        std::vector<double> acc(t.partition.atom_count(), 0.0);
        for (std::size_t l = n; l < ds.size(); ++l) {
            const auto v = apply_T_values(t, atom_integrals(square(ds.delta_functions[l]), t.partition));
            for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += v[a];
        }
        for (double v : acc) best = std::max(best, v);
    }
    return std::sqrt(best);
}

struct PairingReport {
    double pairing = 0.0;  // int (P_N f)(P_N h)
    double h1 = 0.0;
    double bmo = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    bool division_by_zero = false;
    bool consistent = true;  // with a zero bound the pairing must vanish
};

inline PairingReport pairing_check(const PiecewisePolynomial& f, const PiecewisePolynomial& h,
                                   const Filtration& filtration, int k, double q, const QuadratureOptions& opt = {}) {
    PairingReport out;
    const Projector pn(filtration.finest(), k);
    out.pairing = integrate(to_piecewise(pn.project(f)) * to_piecewise(pn.project(h)));
    out.h1 = h1_norm(f, filtration, k, opt);
    out.bmo = bmo_norm(h, filtration, k, q);
    out.bound = out.h1 * out.bmo;
    if (out.bound == 0.0) {
        out.division_by_zero = true;
        out.consistent = std::abs(out.pairing) <= 1e-12;
    } else {
        out.ratio = std::abs(out.pairing) / out.bound;
    }
    return out;
}

struct DoobReport {
    std::vector<double> lambdas;
    std::vector<double> level_measures;  // |{sup_n |f_n| > lambda}|
    std::vector<double> weak_ratios;     // lambda |{...}| / sup_n ||f_n||_1
    double max_weak_ratio = 0.0;
    double maximal_lp = 0.0;             // ||sup_n |f_n| ||_p
    double sup_lp = 0.0;                 // sup_n ||f_n||_p
    double lp_ratio = 0.0;
};

inline DoobReport doob_checks(const MartingaleSplineSequence& ms, double p, std::span<const double> lambdas,
                              const QuadratureOptions& opt = {}) {
    if (!(p > 1.0)) throw Error(ErrorCode::ParameterError, "Doob's L_p inequality needs p > 1");
    std::vector<PiecewisePolynomial> fs;
    for (const auto& s : ms.members) fs.push_back(to_piecewise(s));
    const PiecewisePolynomial envelope = max_abs_envelope(fs);
    DoobReport out;
    double sup_l1 = 0.0;
    for (const auto& f : fs) {
        sup_l1 = std::max(sup_l1, abs_integral(f));
        out.sup_lp = std::max(out.sup_lp, lp_norm(f, p, opt));
    }
    for (double lambda : lambdas) {
        if (!(lambda > 0.0)) throw Error(ErrorCode::ParameterError, "lambda must be positive");
        const double measure = abs_superlevel_set(envelope, lambda, {0.0, 1.0}, true).measure();
        out.lambdas.push_back(lambda);
        out.level_measures.push_back(measure);
        const double ratio = sup_l1 > 0.0 ? lambda * measure / sup_l1 : 0.0;
        out.weak_ratios.push_back(ratio);
        out.max_weak_ratio = std::max(out.max_weak_ratio, ratio);
    }
    out.maximal_lp = lp_norm(envelope, p, opt);
    out.lp_ratio = out.sup_lp > 0.0 ? out.maximal_lp / out.sup_lp : 0.0;
    return out;
}

}  // namespace splinegale
