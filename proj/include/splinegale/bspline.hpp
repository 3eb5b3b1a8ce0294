#pragma once

// Order-k B-spline bases of S_k(F): knots with multiplicity k at 0 and 1 and
// simple interior knots, so that dim = m + k - 1 and N_i is supported on
// E_i = [tau_i, tau_{i+k}].

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "splinegale/banded.hpp"
#include "splinegale/error.hpp"
#include "splinegale/interval.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/polynomial.hpp"
#include "splinegale/quadrature.hpp"

namespace splinegale {

struct NonzeroValues {
    std::size_t first = 0;       // index of the first possibly nonzero B-spline
    std::vector<double> values;  // k values for first .. first + k - 1
};

class BSplineBasis {
public:
    BSplineBasis() : BSplineBasis(Partition(), 1) {}

    BSplineBasis(Partition partition, int k) : partition_(std::move(partition)), k_(k) {
        if (k < 1) throw Error(ErrorCode::ParameterError, "spline order must be at least 1");
        const auto t = partition_.breakpoints();
        knots_.assign(static_cast<std::size_t>(k - 1), 0.0);
        knots_.insert(knots_.end(), t.begin(), t.end());
        knots_.insert(knots_.end(), static_cast<std::size_t>(k - 1), 1.0);
    }

    int order() const { return k_; }
    const Partition& partition() const { return partition_; }
    std::span<const double> knots() const { return knots_; }
    std::size_t atom_count() const { return partition_.atom_count(); }
    std::size_t dim() const { return partition_.atom_count() + static_cast<std::size_t>(k_) - 1; }

    Interval support(std::size_t i) const { return {knots_[i], knots_[i + static_cast<std::size_t>(k_)]}; }

    /// Atoms covered by E_i: indices max(0, i-k+1) .. min(i, m-1).
    std::pair<std::size_t, std::size_t> support_atoms(std::size_t i) const {
        const std::size_t k = static_cast<std::size_t>(k_);
        const std::size_t lo = i + 1 >= k ? i + 1 - k : 0;
        const std::size_t hi = std::min(i, atom_count() - 1);
        return {lo, hi};
    }

    /// The <= k nonzero values at x by the de Boor-Cox recursion.
    NonzeroValues eval_nonzero(double x) const {
        const std::size_t k = static_cast<std::size_t>(k_);
        const std::size_t mu = partition_.locate(x);
        const std::size_t s = mu + k - 1;
        std::vector<double> n(k, 0.0), left(k, 0.0), right(k, 0.0);
        n[0] = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            left[j] = x - knots_[s + 1 - j];
            right[j] = knots_[s + j] - x;
            double saved = 0.0;
            for (std::size_t r = 0; r < j; ++r) {
                const double temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        return {mu, std::move(n)};
    }

    double eval(std::size_t i, double x) const {
        const auto nz = eval_nonzero(x);
        if (i < nz.first || i >= nz.first + nz.values.size()) return 0.0;
        return nz.values[i - nz.first];
    }

    /// B-splines mu .. mu+k-1 restricted to atom mu, as polynomials in the
    /// atom's local variable (same recursion with polynomial arithmetic).
    std::vector<Polynomial> local_polynomials(std::size_t mu) const {
        const std::size_t k = static_cast<std::size_t>(k_);
        const Interval atom = partition_.atom(mu);
        const double mid = atom.mid(), half = atom.half();
        const std::size_t s = mu + k - 1;
        std::vector<std::vector<double>> n(k, std::vector<double>{0.0});
        std::vector<std::vector<double>> left(k), right(k);
        n[0] = {1.0};
        for (std::size_t j = 1; j < k; ++j) {
            left[j] = {mid - knots_[s + 1 - j], half};
            right[j] = {knots_[s + j] - mid, -half};
            std::vector<double> saved{0.0};
            for (std::size_t r = 0; r < j; ++r) {
                const double denom = knots_[s + r + 1] - knots_[s + 1 - j + r];
                std::vector<double> temp = n[r];
                for (double& v : temp) v /= denom;
                n[r] = add_coeffs(saved, multiply_coeffs(right[r + 1], temp));
                saved = multiply_coeffs(left[j - r], temp);
            }
            n[j] = saved;
        }
        std::vector<Polynomial> out;
        out.reserve(k);
        for (auto& c : n) {
            c.resize(k, 0.0);
            out.push_back({atom, std::move(c)});
        }
        return out;
    }

    friend bool operator==(const BSplineBasis& a, const BSplineBasis& b) {
        return a.k_ == b.k_ && a.partition_ == b.partition_;
    }

private:
    Partition partition_;
    int k_ = 1;
    std::vector<double> knots_;
};

inline BSplineBasis build_basis(const Partition& p, int k) { return BSplineBasis(p, k); }

struct Spline {
    BSplineBasis basis;
    std::vector<double> coeffs;

    Spline() : coeffs(1, 0.0) {}
    Spline(BSplineBasis b, std::vector<double> c) : basis(std::move(b)), coeffs(std::move(c)) {
        if (coeffs.size() != basis.dim())
            throw Error(ErrorCode::ParameterError, "coefficient count " + std::to_string(coeffs.size()) +
                                                       " differs from basis dimension " +
                                                       std::to_string(basis.dim()));
    }

    double operator()(double x) const {
        const auto nz = basis.eval_nonzero(x);
        double v = 0.0;
        for (std::size_t r = 0; r < nz.values.size(); ++r) v += coeffs[nz.first + r] * nz.values[r];
        return v;
    }
};

inline PiecewisePolynomial to_piecewise(const Spline& s) {
    const auto& b = s.basis;
    std::vector<std::vector<double>> pieces(b.atom_count());
    for (std::size_t mu = 0; mu < b.atom_count(); ++mu) {
        const auto local = b.local_polynomials(mu);
        std::vector<double> c(static_cast<std::size_t>(b.order()), 0.0);
        for (std::size_t r = 0; r < local.size(); ++r) c = add_coeffs(c, local[r].coeffs, 1.0, s.coeffs[mu + r]);
        pieces[mu] = std::move(c);
    }
    return {b.partition(), std::move(pieces)};
}

/// Gram matrix of the basis, bandwidth k - 1, by k-point Gauss-Legendre per atom.
inline BandedSymmetric gram(const BSplineBasis& b) {
    const std::size_t k = static_cast<std::size_t>(b.order());
    BandedSymmetric g(b.dim(), k - 1);
    const GaussRule& rule = gauss_legendre(static_cast<int>(k));
    for (std::size_t mu = 0; mu < b.atom_count(); ++mu) {
        const Interval atom = b.partition().atom(mu);
        for (std::size_t q = 0; q < k; ++q) {
            const double x = atom.mid() + atom.half() * rule.nodes[q];
            const double w = rule.weights[q] * atom.half();
            const auto nz = b.eval_nonzero(x);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c <= r; ++c)
                    g.at(nz.first + r, nz.first + c) += w * nz.values[r] * nz.values[c];
        }
    }
    return g;
}

/// Coefficients of s in the basis of order k over `fine`, by inserting the
/// missing knots one at a time (Boehm).
inline Spline refine_coeffs(const Spline& s, const Partition& fine) {
    const auto& coarse = s.basis.partition();
    if (!is_refinement(fine, coarse))
        throw Error(ErrorCode::NotARefinement, "target partition does not refine the spline's partition");
    if (fine == coarse) return s;
    const std::size_t k = static_cast<std::size_t>(s.basis.order());
    std::vector<double> knots(s.basis.knots().begin(), s.basis.knots().end());
    std::vector<double> c = s.coeffs;
    const auto have = coarse.breakpoints();
    for (double x : fine.breakpoints()) {
        if (std::binary_search(have.begin(), have.end(), x)) continue;
        const std::size_t span =
            static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), x) - knots.begin()) - 1;
        std::vector<double> next(c.size() + 1);
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (i + k <= span + 1) {
                next[i] = c[i];
            } else if (i > span) {
                next[i] = c[i - 1];
            } else {
                const double alpha = (x - knots[i]) / (knots[i + k - 1] - knots[i]);
                next[i] = alpha * c[i] + (1.0 - alpha) * c[i - 1];
            }
        }
        knots.insert(knots.begin() + static_cast<std::ptrdiff_t>(span) + 1, x);
        c = std::move(next);
    }
    return {BSplineBasis(fine, s.basis.order()), std::move(c)};
}

/// k-regularity: max over consecutive supports of max(|E_i|/|E_{i+1}|, |E_{i+1}|/|E_i|).
inline double gamma_k(const Partition& p, int k) {
    const BSplineBasis b(p, k);
    double g = 1.0;
    for (std::size_t i = 0; i + 1 < b.dim(); ++i) {
        const double a = b.support(i).length(), c = b.support(i + 1).length();
        g = std::max({g, a / c, c / a});
    }
    return g;
}

/// Leftmost atom of maximal length inside E_j.
inline Interval maximal_atom(const BSplineBasis& b, std::size_t j) {
    const auto [lo, hi] = b.support_atoms(j);
    std::size_t best = lo;
    for (std::size_t mu = lo + 1; mu <= hi; ++mu)
        if (b.partition().atom(mu).length() > b.partition().atom(best).length()) best = mu;
    return b.partition().atom(best);
}

struct StabilityReport {
    double coefficient_ratio = 0.0;  // max_j |a_j| |J_j|^{1/p} / ||g||_{L_p(J_j)}
    double norm_ratio = 0.0;         // ||g||_p / ||(a_j |E_j|^{1/p})||_{l_p}
    double inverse_norm_ratio = 0.0;
};

inline StabilityReport stability_check(const Spline& s, double p, const QuadratureOptions& opt = {}) {
    if (!(p >= 1.0)) throw Error(ErrorCode::ParameterError, "stability check needs p >= 1");
    const PiecewisePolynomial g = to_piecewise(s);
    const auto& b = s.basis;
    StabilityReport out;
    double seq = 0.0;
    for (std::size_t j = 0; j < b.dim(); ++j) {
        const Interval jj = maximal_atom(b, j);
        const double local = lp_norm_on(g, jj, p, opt);
        const double scaled = std::abs(s.coeffs[j]) * (std::isinf(p) ? 1.0 : std::pow(jj.length(), 1.0 / p));
        if (local > 0.0) out.coefficient_ratio = std::max(out.coefficient_ratio, scaled / local);
        const double term = std::abs(s.coeffs[j]) * (std::isinf(p) ? 1.0 : std::pow(b.support(j).length(), 1.0 / p));
        seq = std::isinf(p) ? std::max(seq, term) : seq + std::pow(term, p);
    }
    if (!std::isinf(p)) seq = std::pow(seq, 1.0 / p);
    const double norm = lp_norm(g, p, opt);
    if (seq > 0.0 && norm > 0.0) {
        out.norm_ratio = norm / seq;
        out.inverse_norm_ratio = seq / norm;
    }
    return out;
}

/// ||g||_{L_inf(A)} / max over j with |E_j cap A| > 0 of ||g||_{L_inf(J_j)}.
inline double stab_estimate(const Spline& s, const IntervalUnion& a) {
    const PiecewisePolynomial g = to_piecewise(s);
    const double num = sup_norm_on(g, a);
    double den = 0.0;
    for (std::size_t j = 0; j < s.basis.dim(); ++j)
        if (a.intersect(s.basis.support(j)).measure() > 0.0)
            den = std::max(den, sup_norm_on(g, maximal_atom(s.basis, j)));
    if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
    return num / den;
}

}  // namespace splinegale
