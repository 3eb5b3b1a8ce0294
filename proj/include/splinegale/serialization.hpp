#pragma once

// JSON encodings (nlohmann::json ADL hooks).
//   Partition           [t_0, ..., t_m]
//   Filtration          [[...], [...], ...]
//   PiecewisePolynomial {"grid": [...], "pieces": [[...], ...]}
//   BSplineBasis        {"k": k, "breakpoints": [...]}
//   Spline              {"basis": {...}, "coeffs": [...]}

#include <json.hpp>

#include "splinegale/bspline.hpp"
#include "splinegale/g_construction.hpp"
#include "splinegale/interval.hpp"
#include "splinegale/partition.hpp"
#include "splinegale/piecewise_poly.hpp"

namespace splinegale {

using json = nlohmann::json;

inline void to_json(json& j, const Interval& i) { j = json::array({i.lo, i.hi}); }
inline void from_json(const json& j, Interval& i) {
    i.lo = j.at(0).get<double>();
    i.hi = j.at(1).get<double>();
}

inline void to_json(json& j, const IntervalUnion& u) { j = u.parts(); }
inline void from_json(const json& j, IntervalUnion& u) { u = IntervalUnion(j.get<std::vector<Interval>>()); }

inline void to_json(json& j, const Partition& p) {
    j = std::vector<double>(p.breakpoints().begin(), p.breakpoints().end());
}
inline void from_json(const json& j, Partition& p) { p = Partition(j.get<std::vector<double>>()); }

inline void to_json(json& j, const Filtration& f) { j = f.levels(); }
inline void from_json(const json& j, Filtration& f) {
    std::vector<Partition> levels;
    for (const auto& level : j) levels.push_back(level.get<Partition>());
    bool elementary = true;
    for (std::size_t n = 0; n + 1 < levels.size(); ++n)
        elementary = elementary && levels[n + 1].atom_count() == levels[n].atom_count() + 1;
    f = Filtration(std::move(levels), elementary);
}

inline void to_json(json& j, const PiecewisePolynomial& f) {
    j = json{{"grid", std::vector<double>(f.grid().breakpoints().begin(), f.grid().breakpoints().end())},
             {"pieces", f.pieces()}};
}
inline void from_json(const json& j, PiecewisePolynomial& f) {
    f = PiecewisePolynomial(Partition(j.at("grid").get<std::vector<double>>(), 0.0),
                            j.at("pieces").get<std::vector<std::vector<double>>>());
}

inline void to_json(json& j, const BSplineBasis& b) { j = json{{"k", b.order()}, {"breakpoints", b.partition()}}; }
inline void from_json(const json& j, BSplineBasis& b) {
    b = BSplineBasis(j.at("breakpoints").get<Partition>(), j.at("k").get<int>());
}

inline void to_json(json& j, const Spline& s) { j = json{{"basis", s.basis}, {"coeffs", s.coeffs}}; }
inline void from_json(const json& j, Spline& s) {
    s = Spline(j.at("basis").get<BSplineBasis>(), j.at("coeffs").get<std::vector<double>>());
}

inline void to_json(json& j, const PhiInstance& inst) {
    j = json{{"a", inst.a}, {"level", inst.level}, {"d", inst.d}, {"b", inst.b}, {"c1", inst.c1}};
}
inline void from_json(const json& j, PhiInstance& inst) {
    inst.a = j.at("a").get<std::vector<Interval>>();
    inst.level = j.at("level").get<std::vector<int>>();
    inst.d = j.at("d").get<std::vector<Interval>>();
    inst.b = j.at("b").get<std::vector<IntervalUnion>>();
    inst.c1 = j.at("c1").get<double>();
}

}  // namespace splinegale
