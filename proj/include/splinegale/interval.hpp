#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "splinegale/error.hpp"

namespace splinegale {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    double half() const { return 0.5 * (hi - lo); }

    bool contains(double x) const { return lo <= x && x <= hi; }
    /// Closure inclusion: `other` lies inside this interval.
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Smallest interval containing both arguments.
inline Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline double overlap_length(const Interval& a, const Interval& b) {
    return std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
}

/// Finite union of closed intervals, kept sorted, disjoint and with touching
/// parts merged. Zero-length parts are dropped (they carry no measure).
class IntervalUnion {
public:
    IntervalUnion() = default;

    explicit IntervalUnion(std::vector<Interval> parts) : parts_(std::move(parts)) { normalize(); }

    IntervalUnion(std::initializer_list<Interval> parts) : parts_(parts) { normalize(); }

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }

    double measure() const {
        double m = 0.0;
        for (const auto& p : parts_) m += p.length();
        return m;
    }

    bool contains_point(double x) const {
        return std::any_of(parts_.begin(), parts_.end(), [x](const Interval& p) { return p.contains(x); });
    }

    IntervalUnion intersect(const Interval& window) const {
        std::vector<Interval> out;
        for (const auto& p : parts_) {
            const double lo = std::max(p.lo, window.lo);
            const double hi = std::min(p.hi, window.hi);
            if (hi > lo) out.push_back({lo, hi});
        }
        return IntervalUnion(std::move(out));
    }

    IntervalUnion intersect(const IntervalUnion& other) const {
        std::vector<Interval> out;
        std::size_t i = 0, j = 0;
        while (i < parts_.size() && j < other.parts_.size()) {
            const auto& a = parts_[i];
            const auto& b = other.parts_[j];
            const double lo = std::max(a.lo, b.lo);
            const double hi = std::min(a.hi, b.hi);
            if (hi > lo) out.push_back({lo, hi});
            if (a.hi < b.hi)
                ++i;
            else
                ++j;
        }
        return IntervalUnion(std::move(out));
    }

    IntervalUnion united(const IntervalUnion& other) const {
        std::vector<Interval> all = parts_;
        all.insert(all.end(), other.parts_.begin(), other.parts_.end());
        return IntervalUnion(std::move(all));
    }

    /// Set difference (closure of this \ other).
    IntervalUnion minus(const IntervalUnion& other) const {
        std::vector<Interval> out;
        for (const auto& p : parts_) {
            double cursor = p.lo;
            for (const auto& cut : other.parts_) {
                if (cut.hi <= cursor) continue;
                if (cut.lo >= p.hi) break;
                if (cut.lo > cursor) out.push_back({cursor, cut.lo});
                cursor = std::max(cursor, cut.hi);
                if (cursor >= p.hi) break;
            }
            if (cursor < p.hi) out.push_back({cursor, p.hi});
        }
        return IntervalUnion(std::move(out));
    }

    /// Leftmost sub-union of the requested measure; takes everything if the
    /// union is smaller than `amount`.
    IntervalUnion leftmost(double amount) const {
        std::vector<Interval> out;
        double remaining = amount;
        for (const auto& p : parts_) {
            if (remaining <= 0.0) break;
            if (p.length() <= remaining) {
                out.push_back(p);
                remaining -= p.length();
            } else {
                out.push_back({p.lo, p.lo + remaining});
                remaining = 0.0;
            }
        }
        return IntervalUnion(std::move(out));
    }

    /// Subset test up to `tol` of uncovered measure.
    bool subset_of(const IntervalUnion& other, double tol = 0.0) const {
        return minus(other).measure() <= tol;
    }

private:
    void normalize() {
        std::erase_if(parts_, [](const Interval& p) { return !(p.hi > p.lo); });
        std::sort(parts_.begin(), parts_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::vector<Interval> merged;
        for (const auto& p : parts_) {
            if (!merged.empty() && p.lo <= merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, p.hi);
            else
                merged.push_back(p);
        }
        parts_ = std::move(merged);
    }

    std::vector<Interval> parts_;
};

}  // namespace splinegale
