#pragma once

// The positive operators T_{F,q,k} with kernel
//   K(x, t) = sum_{i,j} q^{|i-j|} / |E_ij| 1_{E_i}(t) 1_{E_j}(x),
// stored as a symmetric matrix of cell values over atom x atom.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "splinegale/banded.hpp"
#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/projection.hpp"

namespace splinegale {

struct KernelOperator {
    Partition partition;
    int k = 1;
    double q = 0.5;
    DenseMatrix cells;           // cells(alpha, beta): kernel value for x in atom alpha, t in atom beta
    std::vector<double> row_mass;  // K_x on each atom

    double lower_bound() const { return static_cast<double>(k); }
    double upper_bound() const { return 2.0 * (k + 1) / (1.0 - q); }

    /// Smallest of K_x - k and 2(k+1)/(1-q) - K_x over all atoms.
    double bound_slack() const {
        double s = kInf;
        for (double m : row_mass) s = std::min({s, m - lower_bound(), upper_bound() - m});
        return s;
    }
};

inline KernelOperator build_T(const Partition& p, int k, double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::ParameterError, "kernel decay base must lie in (0,1)");
    const BSplineBasis b(p, k);
    const std::size_t m = p.atom_count();
    const std::size_t kk = static_cast<std::size_t>(k);
    KernelOperator t{p, k, q, DenseMatrix(m, m), std::vector<double>(m, 0.0)};
    // Atom mu lies in E_i exactly for i in [mu, mu + k - 1].
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = a; c < m; ++c) {
            double v = 0.0;
            for (std::size_t j = a; j < a + kk; ++j)
                for (std::size_t i = c; i < c + kk; ++i) {
                    const double d = static_cast<double>(i > j ? i - j : j - i);
                    v += std::pow(q, d) / support_hull(b, i, j).length();
                }
            t.cells(a, c) = v;
            t.cells(c, a) = v;
        }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = 0; c < m; ++c) t.row_mass[a] += t.cells(a, c) * p.atom(c).length();
    const double slack = t.bound_slack();
    if (slack < -1e-12)
        throw Error(ErrorCode::BoundViolation, "kernel mass bound violated by " + std::to_string(-slack));
    return t;
}

/// Integrals of f over the atoms of `p`.
inline std::vector<double> atom_integrals(const PiecewisePolynomial& f, const Partition& p) {
    std::vector<double> out(p.atom_count());
    for (std::size_t a = 0; a < p.atom_count(); ++a) out[a] = integrate_on(f, p.atom(a));
    return out;
}

inline std::vector<double> atom_abs_integrals(const PiecewisePolynomial& f, const Partition& p) {
    std::vector<double> out(p.atom_count());
    for (std::size_t a = 0; a < p.atom_count(); ++a) out[a] = abs_integral_on(f, p.atom(a));
    return out;
}

/// T applied to a function given by its atom integrals; values per atom.
inline std::vector<double> apply_T_values(const KernelOperator& t, std::span<const double> integrals) {
    const std::size_t m = t.partition.atom_count();
    std::vector<double> out(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = 0; c < m; ++c) out[a] += t.cells(a, c) * integrals[c];
    return out;
}

inline PiecewisePolynomial apply_T(const KernelOperator& t, const PiecewisePolynomial& f) {
    return PiecewisePolynomial::step(t.partition, apply_T_values(t, atom_integrals(f, t.partition)));
}

/// T|f| without forming |f|.
inline std::vector<double> apply_T_abs_values(const KernelOperator& t, const PiecewisePolynomial& f) {
    return apply_T_values(t, atom_abs_integrals(f, t.partition));
}

enum class ConvexPhi { Square, Abs, ExpCapped };

inline constexpr double kExpCap = 50.0;

/// e^y up to y = 50, continued linearly (C^1, convex) beyond.
inline double exp_capped(double y) {
    if (y <= kExpCap) return std::exp(y);
    return std::exp(kExpCap) * (1.0 + (y - kExpCap));
}

inline double apply_phi(ConvexPhi phi, double y) {
    switch (phi) {
        case ConvexPhi::Square: return y * y;
        case ConvexPhi::Abs: return std::abs(y);
        case ConvexPhi::ExpCapped: return exp_capped(y);
    }
    return y;
}

inline std::string to_string(ConvexPhi phi) {
    switch (phi) {
        case ConvexPhi::Square: return "square";
        case ConvexPhi::Abs: return "abs";
        case ConvexPhi::ExpCapped: return "exp-capped";
    }
    return "?";
}

/// Integral of phi(scale * f) over one interval.
inline double phi_integral(ConvexPhi phi, const PiecewisePolynomial& f, double scale, const Interval& window,
                           const QuadratureOptions& opt) {
    switch (phi) {
        case ConvexPhi::Square: return scale * scale * integrate_on(square(f), window);
        case ConvexPhi::Abs: return std::abs(scale) * abs_integral_on(f, window);
        case ConvexPhi::ExpCapped: {
            const PiecewisePolynomial shifted = add(f, PiecewisePolynomial::constant(kExpCap / scale), 1.0, -1.0);
            const PiecewisePolynomial both[] = {f, shifted};
            const auto segments = smooth_segments(both, window);
            return adaptive_integrate([&](double x) { return exp_capped(scale * f(x)); }, segments, opt);
        }
    }
    return 0.0;
}

struct JensenReport {
    double max_violation = -kInf;           // max over atoms of LHS - RHS
    double max_relative_violation = -kInf;  // the same divided by max(1, |RHS|)
    bool pass = false;
};

/// phi(Tf(x)) <= K_x^{-1} T(phi(K_x f))(x) per atom. With `frozen` the
/// inner K_x is the constant of the outer atom; otherwise the inner factor
/// is the function t -> K_t.
inline JensenReport jensen_check(const KernelOperator& t, const PiecewisePolynomial& f, ConvexPhi phi,
                                 bool frozen = true, const QuadratureOptions& opt = {}) {
    const std::size_t m = t.partition.atom_count();
    const auto tf = apply_T_values(t, atom_integrals(f, t.partition));
    JensenReport out;
    for (std::size_t a = 0; a < m; ++a) {
        const double kx = t.row_mass[a];
        double inner = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            const double scale = frozen ? kx : t.row_mass[c];
            inner += t.cells(a, c) * phi_integral(phi, f, scale, t.partition.atom(c), opt);
        }
        const double rhs = inner / kx;
        const double lhs = apply_phi(phi, tf[a]);
        out.max_violation = std::max(out.max_violation, lhs - rhs);
        out.max_relative_violation = std::max(out.max_relative_violation, (lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    out.pass = out.max_relative_violation <= 1e-10;
    return out;
}

/// Lower bound of the Hardy-Littlewood maximal function from intervals
/// whose endpoints come from a candidate set (breakpoints of f, a uniform
/// grid, and the point itself).
class MaximalEstimator {
public:
    explicit MaximalEstimator(const PiecewisePolynomial& f, int grid_size = 256) : f_(f) {
        for (double b : f.grid().breakpoints()) candidates_.push_back(b);
        for (int i = 0; i <= grid_size; ++i) candidates_.push_back(static_cast<double>(i) / grid_size);
        std::sort(candidates_.begin(), candidates_.end());
        candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
        cumulative_.assign(candidates_.size(), 0.0);
        for (std::size_t i = 1; i < candidates_.size(); ++i)
            cumulative_[i] = cumulative_[i - 1] + abs_integral_on(f, {candidates_[i - 1], candidates_[i]});
    }

    double operator()(double x) const {
        const auto it = std::lower_bound(candidates_.begin(), candidates_.end(), x);
        const std::size_t split = static_cast<std::size_t>(it - candidates_.begin());
        // Cumulative integral at x itself.
        double fx = 0.0;
        if (it != candidates_.end() && *it == x) {
            fx = cumulative_[split];
        } else {
            fx = cumulative_[split - 1] + abs_integral_on(f_, {candidates_[split - 1], x});
        }
        std::vector<std::pair<double, double>> left, right;  // (point, cumulative)
        for (std::size_t i = 0; i < split; ++i) left.emplace_back(candidates_[i], cumulative_[i]);
        left.emplace_back(x, fx);
        right.emplace_back(x, fx);
        for (std::size_t i = split; i < candidates_.size(); ++i)
            if (candidates_[i] > x) right.emplace_back(candidates_[i], cumulative_[i]);
        double best = 0.0;
        for (const auto& [a, fa] : left)
            for (const auto& [b, fb] : right)
                if (b > a) best = std::max(best, (fb - fa) / (b - a));
        return best;
    }

private:
    PiecewisePolynomial f_;
    std::vector<double> candidates_;
    std::vector<double> cumulative_;
};

inline double maximal_lower(const PiecewisePolynomial& f, double x, int grid_size = 256) {
    return MaximalEstimator(f, grid_size)(x);
}

struct DominationReport {
    double c1_hat = 0.0;  // max over atoms of sup|Pf| / T|f|
    double c2_hat = 0.0;  // max over samples of T|f| / (lower bound of Mf); an upper estimate of C_2
};

inline DominationReport domination_check(const Projector& pr, const KernelOperator& t, const PiecewisePolynomial& f,
                                         int samples = 64, int grid_size = 256) {
    if (!(pr.basis().partition() == t.partition) || pr.basis().order() != t.k)
        throw Error(ErrorCode::ParameterError, "projector and kernel must share partition and order");
    if (abs_integral(f) == 0.0) throw Error(ErrorCode::ZeroFunction, "f vanishes identically");
    const PiecewisePolynomial pf = to_piecewise(pr.project(f));
    const auto tabs = apply_T_abs_values(t, f);
    DominationReport out;
    for (std::size_t a = 0; a < t.partition.atom_count(); ++a)
        out.c1_hat = std::max(out.c1_hat, sup_norm_on(pf, t.partition.atom(a)) / tabs[a]);
    const MaximalEstimator mf(f, grid_size);
    std::vector<double> xs;
    for (std::size_t a = 0; a < t.partition.atom_count(); ++a) xs.push_back(t.partition.atom(a).mid());
    for (int s = 0; s < samples; ++s) xs.push_back((s + 0.5) / samples);
    for (double x : xs) {
        const double m = mf(x);
        const double tv = tabs[t.partition.locate(x)];
        if (m > 0.0) out.c2_hat = std::max(out.c2_hat, tv / m);
        else if (tv > 0.0) out.c2_hat = kInf;
    }
    return out;
}

struct TowerReport {
    double c_hat = 0.0;
    double gamma = 1.0;
    std::vector<double> st_values;  // STf per coarse atom
    std::vector<double> dominant;   // T_{G,q,k}|f| per coarse atom
};

/// |S T f| <= C gamma_k(G)^k T_{G,q,k}|f| with S = T_{G,sigma,k} and
/// T = T_{F,tau,k'}; the composition is evaluated by exact cell sums.
inline TowerReport tower_check(const Partition& coarse, const Partition& fine, int k, int kprime, double sigma,
                               double tau, double q, const PiecewisePolynomial& f) {
    if (!(q > std::max(sigma, tau)))
        throw Error(ErrorCode::ParameterError, "tower check needs q > max(sigma, tau)");
    if (!is_refinement(fine, coarse)) throw Error(ErrorCode::NotARefinement, "fine must refine coarse");
    const KernelOperator s = build_T(coarse, k, sigma);
    const KernelOperator t = build_T(fine, kprime, tau);
    const KernelOperator r = build_T(coarse, k, q);
    const auto tf = apply_T_values(t, atom_integrals(f, fine));
    std::vector<double> coarse_integrals(coarse.atom_count(), 0.0);
    for (std::size_t b = 0; b < fine.atom_count(); ++b)
        coarse_integrals[coarse.locate(fine.atom(b).mid())] += tf[b] * fine.atom(b).length();
    TowerReport out;
    out.st_values = apply_T_values(s, coarse_integrals);
    out.dominant = apply_T_abs_values(r, f);
    out.gamma = gamma_k(coarse, k);
    const double factor = std::pow(out.gamma, k);
    for (std::size_t a = 0; a < coarse.atom_count(); ++a) {
        if (out.dominant[a] > 0.0)
            out.c_hat = std::max(out.c_hat, std::abs(out.st_values[a]) / (factor * out.dominant[a]));
        else if (out.st_values[a] != 0.0)
            out.c_hat = kInf;
    }
    return out;
}

/// Minimal C with int K_S(x,t) K_T(t,s) dt <= C gamma^k K_{G,q,k}(x,s) on
/// every (coarse atom, fine atom) cell.
inline double kernel_product_check(const KernelOperator& s, const KernelOperator& t, double q) {
    if (!is_refinement(t.partition, s.partition))
        throw Error(ErrorCode::NotARefinement, "inner kernel must live on a refinement");
    const KernelOperator r = build_T(s.partition, s.k, q);
    const double factor = std::pow(gamma_k(s.partition, s.k), s.k);
    const Partition& fine = t.partition;
    std::vector<std::size_t> parent(fine.atom_count());
    for (std::size_t c = 0; c < fine.atom_count(); ++c) parent[c] = s.partition.locate(fine.atom(c).mid());
    double c_min = 0.0;
    for (std::size_t a = 0; a < s.partition.atom_count(); ++a)
        for (std::size_t b = 0; b < fine.atom_count(); ++b) {
            double lhs = 0.0;
            for (std::size_t c = 0; c < fine.atom_count(); ++c)
                lhs += s.cells(a, parent[c]) * t.cells(c, b) * fine.atom(c).length();
            c_min = std::max(c_min, lhs / (factor * r.cells(a, parent[b])));
        }
    return c_min;
}

/// Default decay base for T: the fitted q_hat rounded up to 0.5, 0.7 or
/// 0.9; above 0.9 the midpoint between q_hat and 1 (capped at 0.99).
inline double default_q(const Partition& p, int k) {
    const double q_hat = decay_fit(Projector(p, k)).q_hat;
    for (double q : {0.5, 0.7, 0.9})
        if (q_hat <= q) return q;
    return std::min(0.99, 0.5 * (1.0 + q_hat));
}

struct ToolLepingleReport {
    double lhs_p = 0.0;  // || sum_{l >= n} P_n((P'_{l-1} f_l)^2) ||_p
    double lhs_t = 0.0;  // the same with T_n
    double rhs = 0.0;    // gamma_k(F_n)^k || sum_{l >= n} f_l^2 ||_p
    double ratio_p = 0.0;
    double ratio_t = 0.0;
    double ratio_pt = 0.0;
};

/// Levels are 0-based: fs[l] belongs to level l and P'_{l-1} for l = 0 is
/// the order-k' projection onto the trivial partition.
inline ToolLepingleReport tool_lepingle_check(const Filtration& filtration, int k, int kprime, std::size_t n,
                                              std::span<const PiecewisePolynomial> fs, double p, double q,
                                              const QuadratureOptions& opt = {}) {
    if (fs.size() > filtration.size()) throw Error(ErrorCode::ParameterError, "more functions than levels");
    if (n >= fs.size()) throw Error(ErrorCode::IndexOutOfRange, "start level beyond the sequence");
    const Projector pn(filtration.level(n), k);
    const KernelOperator tn = build_T(filtration.level(n), k, q);
    PiecewisePolynomial sum_p = PiecewisePolynomial::constant(0.0);
    std::vector<double> sum_t(filtration.level(n).atom_count(), 0.0);
    PiecewisePolynomial sum_f = PiecewisePolynomial::constant(0.0);
    for (std::size_t l = n; l < fs.size(); ++l) {
        const Projector prev(l == 0 ? Partition() : filtration.level(l - 1), kprime);
        const PiecewisePolynomial u = square(to_piecewise(prev.project(fs[l])));
        sum_p = sum_p + to_piecewise(pn.project(u));
        const auto tu = apply_T_values(tn, atom_integrals(u, tn.partition));
        for (std::size_t a = 0; a < sum_t.size(); ++a) sum_t[a] += tu[a];
        sum_f = sum_f + square(fs[l]);
    }
    ToolLepingleReport out;
    out.lhs_p = lp_norm(sum_p, p, opt);
    out.lhs_t = lp_norm(PiecewisePolynomial::step(tn.partition, sum_t), p, opt);
    out.rhs = std::pow(gamma_k(filtration.level(n), k), k) * lp_norm(sum_f, p, opt);
    if (out.rhs > 0.0) {
        out.ratio_p = out.lhs_p / out.rhs;
        out.ratio_t = out.lhs_t / out.rhs;
    }
    if (out.lhs_t > 0.0) out.ratio_pt = out.lhs_p / out.lhs_t;
    return out;
}

}  // namespace splinegale
