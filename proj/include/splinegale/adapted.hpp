#pragma once

// Sequences (f_n) with f_n in S_k(F_n). Levels are 0-based throughout the
// library: members[n] lives on filtration.level(n).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/projection.hpp"

namespace splinegale {

struct AdaptedSequence {
    Filtration filtration;
    int k = 1;
    std::vector<Spline> members;

    std::size_t size() const { return members.size(); }

    std::vector<PiecewisePolynomial> functions() const {
        std::vector<PiecewisePolynomial> out;
        out.reserve(members.size());
        for (const auto& s : members) out.push_back(to_piecewise(s));
        return out;
    }
};

inline AdaptedSequence adapted_from_splines(const Filtration& filtration, int k, std::vector<Spline> members) {
    if (members.size() > filtration.size())
        throw Error(ErrorCode::NotAdapted, "more members than filtration levels");
    for (std::size_t n = 0; n < members.size(); ++n)
        if (members[n].basis.order() != k || !(members[n].basis.partition() == filtration.level(n)))
            throw Error(ErrorCode::NotAdapted, "member " + std::to_string(n) + " is not in S_k(F_n)");
    return {filtration, k, std::move(members)};
}

/// Membership by project-and-compare: f_n must equal its projection onto
/// S_k(F_n) up to 1e-10 relative in sup norm.
inline AdaptedSequence adapted_from_functions(const Filtration& filtration, int k,
                                              std::span<const PiecewisePolynomial> fs, double tol = 1e-10) {
    if (fs.size() > filtration.size()) throw Error(ErrorCode::NotAdapted, "more members than filtration levels");
    AdaptedSequence out{filtration, k, {}};
    for (std::size_t n = 0; n < fs.size(); ++n) {
        const Projector pr(filtration.level(n), k);
        Spline s = pr.project(fs[n]);
        const double diff = sup_norm(fs[n] - to_piecewise(s));
        if (diff > tol * std::max(1.0, sup_norm(fs[n])))
            throw Error(ErrorCode::NotAdapted, "member " + std::to_string(n) + " differs from its projection by " +
                                                   std::to_string(diff));
        out.members.push_back(std::move(s));
    }
    return out;
}

/// Running sums X_n = sum_{l <= n} f_l^2.
inline std::vector<PiecewisePolynomial> running_square_sums(std::span<const PiecewisePolynomial> fs) {
    std::vector<PiecewisePolynomial> out;
    PiecewisePolynomial x = PiecewisePolynomial::constant(0.0);
    for (const auto& f : fs) {
        x = x + square(f);
        out.push_back(x);
    }
    return out;
}

}  // namespace splinegale
