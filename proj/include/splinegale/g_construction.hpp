#pragma once

// The majorants g_n of X_n^{1/2} = (sum_{l<=n} f_l^2)^{1/2}, built from
// local sup norms of X_l over coarser supports, and the greedy disjoint
// selection phi used in the duality argument.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "splinegale/adapted.hpp"
#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/interval.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/random.hpp"

namespace splinegale {

struct GSequence {
    int k = 1;
    std::vector<Spline> g;                     // g_n on level n
    std::vector<PiecewisePolynomial> x;        // X_n
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> argmax;  // smallest (l, r) attaining a_{n,j}
    std::vector<std::pair<std::size_t, std::size_t>> silent_levels;  // (n, l): no E_{l,r} contains any E_{n,j}
    std::vector<double> mean_g;                // E g_n
    std::vector<double> mean_sqrt_x;           // E X_n^{1/2}
};

/// a_{n,j} = max_{l <= n} max_{r : E_{l,r} contains E_{n,j}} ||X_l||_{L_inf(E_{l,r})}^{1/2},
/// g_n = sum_j a_{n,j} N_{n,j}, for n = 0 .. upto.
inline GSequence build_g(const AdaptedSequence& fs, std::size_t upto) {
    if (upto >= fs.size()) throw Error(ErrorCode::IndexOutOfRange, "level beyond the adapted sequence");
    const auto functions = fs.functions();
    GSequence out;
    out.k = fs.k;
    const std::vector<PiecewisePolynomial> prefix(functions.begin(), functions.begin() + static_cast<long>(upto) + 1);
    out.x = running_square_sums(prefix);

    std::vector<BSplineBasis> bases;
    std::vector<std::vector<double>> local_sup(upto + 1);  // s_{l,r}
    for (std::size_t l = 0; l <= upto; ++l) {
        bases.emplace_back(fs.filtration.level(l), fs.k);
        for (std::size_t r = 0; r < bases[l].dim(); ++r)
            local_sup[l].push_back(std::sqrt(sup_norm_on(out.x[l], bases[l].support(r))));
    }

    for (std::size_t n = 0; n <= upto; ++n) {
        const auto& bn = bases[n];
        std::vector<double> a(bn.dim(), 0.0);
        std::vector<std::pair<std::size_t, std::size_t>> arg(bn.dim(), {n, 0});
        std::vector<bool> level_used(n + 1, false);
        for (std::size_t j = 0; j < bn.dim(); ++j) {
            const Interval ej = bn.support(j);
            bool found = false;
            for (std::size_t l = 0; l <= n; ++l)
                for (std::size_t r = 0; r < bases[l].dim(); ++r) {
                    if (!bases[l].support(r).contains(ej)) continue;
                    level_used[l] = true;
                    if (!found || local_sup[l][r] > a[j]) {
                        a[j] = local_sup[l][r];
                        arg[j] = {l, r};
                        found = true;
                    }
                }
        }
        for (std::size_t l = 0; l <= n; ++l)
            if (!level_used[l]) out.silent_levels.emplace_back(n, l);
        out.g.emplace_back(bn, std::move(a));
        out.argmax.push_back(std::move(arg));
        out.mean_g.push_back(integrate(to_piecewise(out.g.back())));
        const std::span<const PiecewisePolynomial> head(prefix.data(), n + 1);
        out.mean_sqrt_x.push_back(lplq_norm(head, 1.0, 2.0));
    }
    return out;
}

struct GVerification {
    double min_increment = kInf;  // min over n of inf (g_{n+1} - g_n)
    double min_majorant = kInf;   // min over n of inf (g_n^2 - X_n), relative to max(1, sup X_n)
    std::vector<double> ratios;   // E g_n / E X_n^{1/2}
    double max_ratio = 0.0;
};

/// Checks g_n <= g_{n+1} and X_n^{1/2} <= g_n exactly (coefficients after
/// knot insertion, then per-piece minima) and on a uniform grid.
inline GVerification verify_g(const GSequence& gs, double tol = 1e-10, int grid_points = 1000) {
    GVerification out;
    const std::size_t levels = gs.g.size();
    for (std::size_t n = 0; n + 1 < levels; ++n) {
        const Spline lifted = refine_coeffs(gs.g[n], gs.g[n + 1].basis.partition());
        double min_coeff = kInf;
        for (std::size_t i = 0; i < lifted.coeffs.size(); ++i)
            min_coeff = std::min(min_coeff, gs.g[n + 1].coeffs[i] - lifted.coeffs[i]);
        double inc = min_coeff;
        if (min_coeff < 0.0) {
            const auto diff = to_piecewise(gs.g[n + 1]) - to_piecewise(gs.g[n]);
            const Extremum e = min_value(diff);
            inc = e.value;
            if (inc < -tol)
                throw Error(ErrorCode::PropertyViolation, "g_" + std::to_string(n + 1) + " < g_" + std::to_string(n) +
                                                              " at x = " + std::to_string(e.location));
        }
        out.min_increment = std::min(out.min_increment, inc);
    }
    for (std::size_t n = 0; n < levels; ++n) {
        const PiecewisePolynomial gp = to_piecewise(gs.g[n]);
        const double scale = std::max(1.0, max_value(gs.x[n]).value);
        const Extremum e = min_value(square(gp) - gs.x[n]);
        out.min_majorant = std::min(out.min_majorant, e.value / scale);
        if (e.value < -tol * scale)
            throw Error(ErrorCode::PropertyViolation,
                        "X_" + std::to_string(n) + "^(1/2) > g_" + std::to_string(n) + " at x = " + std::to_string(e.location));
        for (int s = 0; s <= grid_points; ++s) {
            const double xv = static_cast<double>(s) / grid_points;
            const double gv = gp(xv);
            if (gv * gv - gs.x[n](xv) < -tol * scale)
                throw Error(ErrorCode::PropertyViolation, "majorant fails on the grid at x = " + std::to_string(xv));
            if (n + 1 < levels && gs.g[n + 1](xv) - gv < -tol)
                throw Error(ErrorCode::PropertyViolation, "monotonicity fails on the grid at x = " + std::to_string(xv));
        }
        const double ratio = gs.mean_sqrt_x[n] > 0.0 ? gs.mean_g[n] / gs.mean_sqrt_x[n] : 1.0;
        out.ratios.push_back(ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    return out;
}

/// {t in window : f(t) >= threshold}.
inline IntervalUnion level_set(const PiecewisePolynomial& f, double threshold, const Interval& window = {0.0, 1.0}) {
    return superlevel_set(f, threshold, window);
}

struct PhiInstance {
    std::vector<Interval> a;        // A_j
    std::vector<int> level;         // l(j)
    std::vector<Interval> d;        // D_j, an atom of level l(j)
    std::vector<IntervalUnion> b;   // B_j inside D_j
    double c1 = 1.0;

    std::size_t size() const { return a.size(); }
};

/// c1 * sum_{i : l(i) >= l(j), D_i inside D_j} |A_i| for each j.
inline std::vector<double> phi_demand(const PhiInstance& inst) {
    std::vector<double> out(inst.size(), 0.0);
    for (std::size_t j = 0; j < inst.size(); ++j)
        for (std::size_t i = 0; i < inst.size(); ++i)
            if (inst.level[i] >= inst.level[j] && inst.d[j].contains(inst.d[i])) out[j] += inst.a[i].length();
    for (double& v : out) v *= inst.c1;
    return out;
}

inline void validate_phi_instance(const PhiInstance& inst, double rel_tol = 1e-12) {
    const std::size_t n = inst.size();
    if (inst.level.size() != n || inst.d.size() != n || inst.b.size() != n)
        throw Error(ErrorCode::InstanceInvalid, "instance arrays differ in length");
    if (!(inst.c1 > 0.0)) throw Error(ErrorCode::InstanceInvalid, "c1 must be positive");
    for (std::size_t j = 0; j < n; ++j) {
        if (!inst.b[j].subset_of(IntervalUnion{inst.d[j]}, 1e-14))
            throw Error(ErrorCode::InstanceInvalid, "B_" + std::to_string(j) + " leaves D_" + std::to_string(j));
        for (std::size_t i = 0; i < n; ++i)
            if (inst.level[i] >= inst.level[j] && !inst.d[j].contains(inst.d[i]) &&
                overlap_length(inst.d[i], inst.d[j]) > 0.0)
                throw Error(ErrorCode::InstanceInvalid, "host atoms are not nested");
    }
    const auto demand = phi_demand(inst);
    for (std::size_t j = 0; j < n; ++j)
        if (inst.b[j].measure() < demand[j] * (1.0 - rel_tol))
            throw Error(ErrorCode::InstanceInvalid, "|B_" + std::to_string(j) + "| = " +
                                                        std::to_string(inst.b[j].measure()) + " below c1 * demand " +
                                                        std::to_string(demand[j]));
}

/// phi(j) = leftmost part of B_j minus earlier choices with measure c1 |A_j|,
/// processing j by nonincreasing level (stable in j).
inline std::vector<IntervalUnion> greedy_phi(const PhiInstance& inst) {
    validate_phi_instance(inst);
    std::vector<std::size_t> order(inst.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return inst.level[x] > inst.level[y]; });
    std::vector<IntervalUnion> phi(inst.size());
    IntervalUnion used;
    for (std::size_t j : order) {
        const double want = inst.c1 * inst.a[j].length();
        const IntervalUnion free = inst.b[j].minus(used);
        if (free.measure() < want * (1.0 - 1e-12))
            throw Error(ErrorCode::InternalExhaustion, "only " + std::to_string(free.measure()) + " left for " +
                                                           std::to_string(want) + " at j = " + std::to_string(j));
        phi[j] = free.leftmost(want);
        used = used.united(phi[j]);
    }
    return phi;
}

struct PhiVerification {
    double max_measure_error = 0.0;  // max_j | |phi(j)| - c1 |A_j| |
    double max_escape = 0.0;         // max_j |phi(j) \ B_j|
    double max_overlap = 0.0;        // max_{i<j} |phi(i) cap phi(j)|
    bool pass = false;
};

inline PhiVerification verify_phi(const PhiInstance& inst, const std::vector<IntervalUnion>& phi) {
    PhiVerification out;
    for (std::size_t j = 0; j < inst.size(); ++j) {
        out.max_measure_error = std::max(out.max_measure_error, std::abs(phi[j].measure() - inst.c1 * inst.a[j].length()));
        out.max_escape = std::max(out.max_escape, phi[j].minus(inst.b[j]).measure());
        for (std::size_t i = 0; i < j; ++i)
            out.max_overlap = std::max(out.max_overlap, phi[i].intersect(phi[j]).measure());
    }
    out.pass = out.max_measure_error <= 1e-12 && out.max_escape <= 1e-12 && out.max_overlap <= 1e-12;
    return out;
}

/// Random valid instance over a random dyadic-style filtration: A_j and B_j
/// inside a host atom D_j; c1 is a random fraction (sometimes exactly 1) of
/// the largest admissible value.
inline PhiInstance random_phi_instance(Rng& rng, std::size_t count = 6, int levels = 5) {
    std::vector<Partition> parts{Partition()};
    for (int l = 1; l < levels; ++l) {
        const Partition& last = parts.back();
        Partition next = last;
        const std::size_t splits = 1 + rng.index(2);
        for (std::size_t s = 0; s < splits; ++s)
            next = split_atom(next, rng.index(next.atom_count()), rng.uniform(0.25, 0.75));
        parts.push_back(std::move(next));
    }
    const Partition& finest = parts.back();
    PhiInstance inst;
    for (std::size_t j = 0; j < count; ++j) {
        const int l = static_cast<int>(rng.index(parts.size()));
        const Interval host = parts[static_cast<std::size_t>(l)].atom(rng.index(parts[static_cast<std::size_t>(l)].atom_count()));
        std::vector<Interval> inside;
        for (std::size_t mu = 0; mu < finest.atom_count(); ++mu)
            if (host.contains(finest.atom(mu))) inside.push_back(finest.atom(mu));
        inst.a.push_back(inside[rng.index(inside.size())]);
        inst.level.push_back(l);
        inst.d.push_back(host);
        std::vector<Interval> pieces;
        const std::size_t count_b = 1 + rng.index(3);
        for (std::size_t s = 0; s < count_b; ++s) {
            const double u = rng.uniform(), v = rng.uniform();
            pieces.push_back({host.lo + host.length() * std::min(u, v), host.lo + host.length() * std::max(u, v)});
        }
        IntervalUnion bj(std::move(pieces));
        if (bj.measure() == 0.0) bj = IntervalUnion{host};
        inst.b.push_back(std::move(bj));
    }
    inst.c1 = 1.0;
    const auto demand = phi_demand(inst);
    double c_max = kInf;
    for (std::size_t j = 0; j < inst.size(); ++j) c_max = std::min(c_max, inst.b[j].measure() / demand[j]);
    inst.c1 = rng.index(4) == 0 ? c_max : c_max * rng.uniform(0.1, 1.0);
    return inst;
}

}  // namespace splinegale
