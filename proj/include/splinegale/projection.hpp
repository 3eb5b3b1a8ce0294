#pragma once

// Orthogonal projection onto S_k(F) by the normal equations with a banded
// Cholesky factor; the dual matrix A = G^{-1}; geometric decay diagnostics;
// the L1 operator norm; k-martingale spline sequences.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "splinegale/banded.hpp"
#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/quadrature.hpp"

namespace splinegale {

class Projector {
public:
    Projector() : Projector(BSplineBasis()) {}

    explicit Projector(BSplineBasis basis) : basis_(std::move(basis)), gram_(gram(basis_)), chol_(gram_) {}

    Projector(const Partition& p, int k) : Projector(BSplineBasis(p, k)) {}

    const BSplineBasis& basis() const { return basis_; }
    const BandedSymmetric& gram_matrix() const { return gram_; }
    const BandedCholesky& factor() const { return chol_; }

    /// (<f, N_i>)_i, exact: Gauss-Legendre on every cell of the common
    /// refinement of f's grid and the basis partition.
    std::vector<double> moments(const PiecewisePolynomial& f) const {
        const Partition& bp = basis_.partition();
        const Partition cells = f.grid() == bp ? bp : common_refinement(f.grid(), bp);
        const int nodes = gauss_nodes_for_degree(static_cast<int>(f.degree()) + basis_.order() - 1);
        const GaussRule& rule = gauss_legendre(nodes);
        std::vector<double> b(basis_.dim(), 0.0);
        for (std::size_t c = 0; c < cells.atom_count(); ++c) {
            const Interval cell = cells.atom(c);
            const Polynomial piece = f.piece(f.grid().locate(cell.mid()));
            for (int q = 0; q < nodes; ++q) {
                const double x = cell.mid() + cell.half() * rule.nodes[q];
                const double w = rule.weights[q] * cell.half() * piece(x);
                const auto nz = basis_.eval_nonzero(x);
                for (std::size_t r = 0; r < nz.values.size(); ++r) b[nz.first + r] += w * nz.values[r];
            }
        }
        return b;
    }

    Spline project(const PiecewisePolynomial& f) const { return {basis_, chol_.solve(moments(f))}; }

    Spline project(const Spline& s) const {
        if (s.basis == basis_) return s;
        return project(to_piecewise(s));
    }

    /// max_i |(G c - b)_i| / max_i |b_i| for the normal equations of f.
    double normal_residual(const PiecewisePolynomial& f, const Spline& s) const {
        const auto b = moments(f);
        const auto gc = gram_.multiply(s.coeffs);
        double res = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            res = std::max(res, std::abs(gc[i] - b[i]));
            scale = std::max(scale, std::abs(b[i]));
        }
        return scale == 0.0 ? res : res / scale;
    }

    DenseMatrix dual_matrix() const { return chol_.inverse(); }

private:
    BSplineBasis basis_;
    BandedSymmetric gram_;
    BandedCholesky chol_;
};

inline DenseMatrix dual_matrix(const Projector& pr) { return pr.dual_matrix(); }

/// Smallest interval containing E_i and E_j.
inline Interval support_hull(const BSplineBasis& b, std::size_t i, std::size_t j) {
    return hull(b.support(i), b.support(j));
}

struct DecayFit {
    double c_hat = 0.0;       // C_0 = max_i |a_ii| |E_i|
    double q_hat = 0.0;       // max_{i != j} (|a_ij| |E_ij| / C_0)^{1/|i-j|}
    bool decays = true;       // q_hat < 1
    DenseMatrix slack;        // C_0 q_hat^{|i-j|} / |E_ij| - |a_ij|, nonnegative by construction
};

inline DecayFit decay_fit(const Projector& pr) {
    const auto a = pr.dual_matrix();
    const auto& b = pr.basis();
    const std::size_t n = b.dim();
    DecayFit out;
    for (std::size_t i = 0; i < n; ++i) out.c_hat = std::max(out.c_hat, std::abs(a(i, i)) * b.support(i).length());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = static_cast<double>(i > j ? i - j : j - i);
            const double v = std::abs(a(i, j)) * support_hull(b, i, j).length() / out.c_hat;
            out.q_hat = std::max(out.q_hat, std::pow(v, 1.0 / d));
        }
    out.decays = out.q_hat < 1.0;
    out.slack = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = static_cast<double>(i > j ? i - j : j - i);
            out.slack(i, j) = out.c_hat * std::pow(out.q_hat, d) / support_hull(b, i, j).length() - std::abs(a(i, j));
        }
    return out;
}

struct L1OperatorNorm {
    double value = 0.0;        // sup over t of ||K(., t)||_1, located by search
    double location = 0.0;     // the maximizing t
    double upper_bound = 0.0;  // max_i ||sum_j a_ij N_j||_1
};

/// ||P : L1 -> L1|| = sup_t integral |K(x, t)| dx with
/// K(x, t) = sum_i N_i(t) K_i(x) and K_i = sum_j a_ij N_j.
///
/// For t in one atom, K(., t) is a convex combination of k consecutive
/// K_i, so each evaluation is an exact L1 norm of a spline. The sup over t
/// is located by Chebyshev-Lobatto sampling per atom with golden-section
/// refinement; for k <= 2 the map t -> ||K(., t)||_1 is convex per atom and
/// the endpoint values give the exact maximum.
inline L1OperatorNorm l1_opnorm(const Projector& pr, int samples_per_atom = 33) {
    const auto a = pr.dual_matrix();
    const auto& b = pr.basis();
    const std::size_t n = b.dim();
    L1OperatorNorm out;

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(a.row(i).begin(), a.row(i).end());
        out.upper_bound = std::max(out.upper_bound, abs_integral(to_piecewise(Spline(b, std::move(row)))));
    }

    auto column_norm = [&](double t) {
        const auto nz = b.eval_nonzero(t);
        std::vector<double> c(n, 0.0);
        for (std::size_t r = 0; r < nz.values.size(); ++r) {
            const double w = nz.values[r];
            if (w == 0.0) continue;
            const auto row = a.row(nz.first + r);
            for (std::size_t j = 0; j < n; ++j) c[j] += w * row[j];
        }
        return abs_integral(to_piecewise(Spline(b, std::move(c))));
    };

    for (std::size_t mu = 0; mu < b.atom_count(); ++mu) {
        const Interval atom = b.partition().atom(mu);
        // The closed right endpoint belongs to the next atom's polynomial; approach it from inside.
        const double hi = std::nextafter(atom.hi, atom.lo);
        const int count = b.order() <= 2 ? 2 : samples_per_atom;
        std::vector<double> ts(static_cast<std::size_t>(count));
        for (int s = 0; s < count; ++s) {
            const double u = -std::cos(std::numbers::pi * s / (count - 1));
            ts[static_cast<std::size_t>(s)] = std::clamp(atom.mid() + atom.half() * u, atom.lo, hi);
        }
        std::vector<double> vals(ts.size());
        std::size_t arg = 0;
        for (std::size_t s = 0; s < ts.size(); ++s) {
            vals[s] = column_norm(ts[s]);
            if (vals[s] > vals[arg]) arg = s;
        }
        double best = vals[arg], where = ts[arg];
        if (b.order() > 2) {
            double lo = ts[arg == 0 ? 0 : arg - 1];
            double up = ts[std::min(arg + 1, ts.size() - 1)];
            const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = up - ratio * (up - lo), x2 = lo + ratio * (up - lo);
            double f1 = column_norm(x1), f2 = column_norm(x2);
            for (int it = 0; it < 60 && up - lo > 1e-14; ++it) {
                if (f1 < f2) {
                    lo = x1, x1 = x2, f1 = f2;
                    x2 = lo + ratio * (up - lo);
                    f2 = column_norm(x2);
                } else {
                    up = x2, x2 = x1, f2 = f1;
                    x1 = up - ratio * (up - lo);
                    f1 = column_norm(x1);
                }
                if (f1 > best) best = f1, where = x1;
                if (f2 > best) best = f2, where = x2;
            }
        }
        if (best > out.value) out.value = best, out.location = where;
    }
    return out;
}

/// f_n = P_n(terminal) along a filtration.
struct MartingaleSplineSequence {
    Filtration filtration;
    int k = 1;
    Spline terminal;
    std::vector<Spline> members;
    std::vector<double> consistency_residuals;  // max |P_n f_{n+1} - f_n| per n < N

    double max_residual() const {
        double m = 0.0;
        for (double r : consistency_residuals) m = std::max(m, r);
        return m;
    }
};

inline std::vector<Projector> level_projectors(const Filtration& f, int k) {
    std::vector<Projector> out;
    out.reserve(f.size());
    for (const auto& level : f.levels()) out.emplace_back(level, k);
    return out;
}

inline MartingaleSplineSequence make_martingale(const Filtration& filtration, int k, const Spline& terminal) {
    if (terminal.basis.order() != k) throw Error(ErrorCode::ParameterError, "terminal spline has the wrong order");
    if (!is_refinement(filtration.finest(), terminal.basis.partition()))
        throw Error(ErrorCode::NotARefinement, "terminal spline does not live on the finest level");
    MartingaleSplineSequence ms;
    ms.filtration = filtration;
    ms.k = k;
    ms.terminal = refine_coeffs(terminal, filtration.finest());
    const auto projectors = level_projectors(filtration, k);
    const PiecewisePolynomial pp = to_piecewise(ms.terminal);
    for (const auto& pr : projectors) ms.members.push_back(pr.project(pp));
    for (std::size_t n = 0; n + 1 < ms.members.size(); ++n) {
        const Spline back = projectors[n].project(ms.members[n + 1]);
        double r = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < back.coeffs.size(); ++i) {
            r = std::max(r, std::abs(back.coeffs[i] - ms.members[n].coeffs[i]));
            scale = std::max(scale, std::abs(ms.members[n].coeffs[i]));
        }
        ms.consistency_residuals.push_back(r / scale);
    }
    const double tol = 1e-10;
    if (ms.max_residual() > tol)
        throw Error(ErrorCode::PropertyViolation,
                    "martingale consistency residual " + std::to_string(ms.max_residual()));
    return ms;
}

}  // namespace splinegale
