#pragma once

// Interval sigma-algebras on [0,1] as finite partitions, and filtrations as
// nested sequences of them.
//
// Atoms are half-open [t_i, t_{i+1}) with the last atom closed at 1.
// Breakpoints are stored exactly as created; refinement is decided by
// identity of stored values, never by a tolerance.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splinegale/error.hpp"
#include "splinegale/interval.hpp"

namespace splinegale {

inline constexpr double kDefaultMinAtom = 1e-9;

class Partition {
public:
    /// The trivial partition {0, 1}.
    Partition() : breakpoints_{0.0, 1.0} {}

    /// `min_gap` is the smallest admissible atom length; pass 0 to only
    /// require strictly increasing breakpoints (used for common refinements).
    explicit Partition(std::vector<double> breakpoints, double min_gap = kDefaultMinAtom)
        : breakpoints_(std::move(breakpoints)) {
        if (breakpoints_.size() < 2)
            throw Error(ErrorCode::InvalidPartition, "need at least the breakpoints 0 and 1");
        if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
            throw Error(ErrorCode::InvalidPartition, "breakpoints must start at 0 and end at 1");
        for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
            const double gap = breakpoints_[i + 1] - breakpoints_[i];
            if (!(gap > 0.0))
                throw Error(ErrorCode::InvalidPartition, "breakpoints must be strictly increasing");
            if (gap < min_gap)
                throw Error(ErrorCode::AtomTooSmall,
                            "atom " + std::to_string(i) + " has length " + std::to_string(gap));
        }
    }

    std::span<const double> breakpoints() const { return breakpoints_; }
    std::size_t atom_count() const { return breakpoints_.size() - 1; }

    Interval atom(std::size_t i) const { return {breakpoints_[i], breakpoints_[i + 1]}; }

    /// Index of the atom containing x (half-open convention, last atom closed).
    std::size_t locate(double x) const {
        if (x <= 0.0) return 0;
        if (x >= 1.0) return atom_count() - 1;
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    }

    double min_atom_length() const {
        double m = 1.0;
        for (std::size_t i = 0; i < atom_count(); ++i) m = std::min(m, atom(i).length());
        return m;
    }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<double> breakpoints_;
};

inline std::vector<Interval> atoms(const Partition& p) {
    std::vector<Interval> out;
    out.reserve(p.atom_count());
    for (std::size_t i = 0; i < p.atom_count(); ++i) out.push_back(p.atom(i));
    return out;
}

/// True iff every breakpoint of `coarse` occurs (exactly) in `fine`.
inline bool is_refinement(const Partition& fine, const Partition& coarse) {
    const auto f = fine.breakpoints();
    const auto c = coarse.breakpoints();
    std::size_t i = 0;
    for (double t : c) {
        while (i < f.size() && f[i] < t) ++i;
        if (i == f.size() || f[i] != t) return false;
    }
    return true;
}

/// Insert one breakpoint at t_i + rel_pos * (t_{i+1} - t_i).
inline Partition split_atom(const Partition& p, std::size_t atom_index, double rel_pos,
                            double min_gap = kDefaultMinAtom) {
    if (atom_index >= p.atom_count())
        throw Error(ErrorCode::IndexOutOfRange, "atom index " + std::to_string(atom_index));
    if (!(rel_pos > 0.0 && rel_pos < 1.0))
        throw Error(ErrorCode::ParameterError, "relative split position must lie in (0,1)");
    const Interval a = p.atom(atom_index);
    const double t = a.lo + rel_pos * a.length();
    if (t - a.lo < min_gap || a.hi - t < min_gap)
        throw Error(ErrorCode::AtomTooSmall, "split would create an atom below the minimum length");
    std::vector<double> bp(p.breakpoints().begin(), p.breakpoints().end());
    bp.insert(bp.begin() + static_cast<std::ptrdiff_t>(atom_index) + 1, t);
    return Partition(std::move(bp), min_gap);
}

/// Union of the breakpoint sets; only strict monotonicity is enforced.
inline Partition common_refinement(const Partition& a, const Partition& b) {
    std::vector<double> merged;
    const auto x = a.breakpoints();
    const auto y = b.breakpoints();
    merged.reserve(x.size() + y.size());
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(merged));
    return Partition(std::move(merged), 0.0);
}

class Filtration {
public:
    Filtration() = default;

    explicit Filtration(std::vector<Partition> levels, bool elementary = false)
        : levels_(std::move(levels)), elementary_(elementary) {
        if (levels_.empty()) throw Error(ErrorCode::InvalidPartition, "filtration needs at least one level");
        for (std::size_t n = 0; n + 1 < levels_.size(); ++n) {
            if (!is_refinement(levels_[n + 1], levels_[n]))
                throw Error(ErrorCode::NotARefinement, "level " + std::to_string(n + 1) +
                                                           " does not refine level " + std::to_string(n));
            if (elementary_ && levels_[n + 1].atom_count() != levels_[n].atom_count() + 1)
                throw Error(ErrorCode::InvalidPartition,
                            "elementary filtration must split exactly one atom per level");
        }
    }

    std::size_t size() const { return levels_.size(); }
    const Partition& level(std::size_t n) const { return levels_.at(n); }
    const Partition& finest() const { return levels_.back(); }
    const std::vector<Partition>& levels() const { return levels_; }
    bool elementary() const { return elementary_; }

private:
    std::vector<Partition> levels_;
    bool elementary_ = false;
};

}  // namespace splinegale
