#pragma once

// Config-driven experiment runner: random filtrations and adapted
// sequences, dispatch of the named check over independent seeded trials,
// and JSON / CSV reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "splinegale/adapted.hpp"
#include "splinegale/bspline.hpp"
#include "splinegale/error.hpp"
#include "splinegale/g_construction.hpp"
#include "splinegale/kernel_ops.hpp"
#include "splinegale/martingale.hpp"
#include "splinegale/piecewise_poly.hpp"
#include "splinegale/projection.hpp"
#include "splinegale/random.hpp"
#include "splinegale/serialization.hpp"

namespace splinegale {

inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{
        "shadrin", "doob",     "stein",  "lepingle",   "tower",     "jensen", "domination", "duality",   "h1bmo",
        "g_props", "phi",      "remez",  "burkholder", "stability", "decay",  "kernel",     "parseval",  "orthogonality"};
    return names;
}

/// Checks whose every trial must pass (a theorem with an explicit constant).
inline bool is_hard_bound(const std::string& check) {
    static const std::set<std::string> hard{"remez", "kernel", "duality", "parseval", "g_props", "phi",
                                            "orthogonality", "jensen"};
    return hard.count(check) > 0;
}

struct ExperimentConfig {
    int schema = 1;
    std::string check = "lepingle";
    std::uint64_t master_seed = 0;
    int k = 1;
    int kprime = 1;
    int levels = 8;
    double gamma_max = 4.0;
    bool elementary = true;
    bool dyadic = false;
    double rel_min = 0.25;
    double rel_max = 0.75;
    int trials = 10;
    double p = 2.0;
    double r = 2.0;
    std::optional<double> q;
    double sigma = 0.5;
    double tau = 0.5;
    std::string mode = "P";
    std::string phi = "square";
    bool jensen_frozen = true;
    double tol_quad = 1e-10;
    int grid_size = 256;
    std::string output = ".";
    int threads = 1;
    std::string axis;
    std::vector<double> axis_values;

    QuadratureOptions quadrature() const {
        QuadratureOptions opt;
        opt.rel_tol = tol_quad;
        return opt;
    }
};

namespace detail {

inline double exponent_from_json(const json& v, const std::string& key) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return kInf;
        throw Error(ErrorCode::InvalidConfig, key + ": expected a number or \"inf\"");
    }
    return v.get<double>();
}

inline json exponent_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

inline void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
    using detail::require;
    require(c.schema == 1, "unsupported schema version " + std::to_string(c.schema));
    require(std::find(known_checks().begin(), known_checks().end(), c.check) != known_checks().end(),
            "unknown check '" + c.check + "'");
    require(c.k >= 1 && c.k <= 8, "k must lie in [1, 8]");
    require(c.kprime >= 1 && c.kprime <= 8, "kprime must lie in [1, 8]");
    require(c.levels >= 1 && c.levels <= 64, "levels must lie in [1, 64]");
    require(c.gamma_max >= 1.0, "gamma_max must be at least 1");
    require(c.rel_min > 0.0 && c.rel_min <= c.rel_max && c.rel_max < 1.0, "need 0 < rel_min <= rel_max < 1");
    require(c.trials >= 1 && c.trials <= 1000000, "trials must lie in [1, 1e6]");
    require(c.p >= 1.0, "p must be >= 1");
    require(c.r >= 1.0, "r must be >= 1");
    require(!c.q || (*c.q > 0.0 && *c.q < 1.0), "q must lie in (0, 1)");
    require(c.sigma > 0.0 && c.sigma < 1.0 && c.tau > 0.0 && c.tau < 1.0, "sigma and tau must lie in (0, 1)");
    require(c.mode == "P" || c.mode == "T", "mode must be \"P\" or \"T\"");
    require(c.phi == "square" || c.phi == "abs" || c.phi == "exp-capped", "phi must be square, abs or exp-capped");
    require(c.tol_quad > 0.0 && c.tol_quad < 1e-2, "tol_quad must lie in (0, 1e-2)");
    require(c.grid_size >= 1 && c.grid_size <= 100000, "grid_size must lie in [1, 1e5]");
    require(c.threads >= 1 && c.threads <= 256, "threads must lie in [1, 256]");
    require(c.axis.empty() || c.axis == "k" || c.axis == "gamma_max" || c.axis == "levels" || c.axis == "p",
            "axis must be one of k, gamma_max, levels, p");
}

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    ExperimentConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "schema") c.schema = v.get<int>();
            else if (key == "check") c.check = v.get<std::string>();
            else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
            else if (key == "k") c.k = v.get<int>();
            else if (key == "kprime") c.kprime = v.get<int>();
            else if (key == "levels") c.levels = v.get<int>();
            else if (key == "gamma_max") c.gamma_max = v.get<double>();
            else if (key == "elementary") c.elementary = v.get<bool>();
            else if (key == "dyadic") c.dyadic = v.get<bool>();
            else if (key == "rel_min") c.rel_min = v.get<double>();
            else if (key == "rel_max") c.rel_max = v.get<double>();
            else if (key == "trials") c.trials = v.get<int>();
            else if (key == "p") c.p = detail::exponent_from_json(v, key);
            else if (key == "r") c.r = detail::exponent_from_json(v, key);
            else if (key == "q") c.q = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            else if (key == "sigma") c.sigma = v.get<double>();
            else if (key == "tau") c.tau = v.get<double>();
            else if (key == "mode") c.mode = v.get<std::string>();
            else if (key == "phi") c.phi = v.get<std::string>();
            else if (key == "jensen_frozen") c.jensen_frozen = v.get<bool>();
            else if (key == "tol_quad") c.tol_quad = v.get<double>();
            else if (key == "grid_size") c.grid_size = v.get<int>();
            else if (key == "output") c.output = v.get<std::string>();
            else if (key == "threads") c.threads = v.get<int>();
            else if (key == "axis") c.axis = v.get<std::string>();
            else if (key == "axis_values") {
                c.axis_values.clear();
                for (const auto& x : v) c.axis_values.push_back(detail::exponent_from_json(x, key));
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline json config_to_json(const ExperimentConfig& c) {
    json j{{"schema", c.schema},         {"check", c.check},
           {"master_seed", c.master_seed}, {"k", c.k},
           {"kprime", c.kprime},         {"levels", c.levels},
           {"gamma_max", c.gamma_max},   {"elementary", c.elementary},
           {"dyadic", c.dyadic},         {"rel_min", c.rel_min},
           {"rel_max", c.rel_max},       {"trials", c.trials},
           {"p", detail::exponent_to_json(c.p)}, {"r", detail::exponent_to_json(c.r)},
           {"sigma", c.sigma},           {"tau", c.tau},
           {"mode", c.mode},             {"phi", c.phi},
           {"jensen_frozen", c.jensen_frozen}, {"tol_quad", c.tol_quad},
           {"grid_size", c.grid_size},   {"output", c.output}};
    j["q"] = c.q ? json(*c.q) : json(nullptr);
    if (!c.axis.empty()) {
        j["axis"] = c.axis;
        json values = json::array();
        for (double v : c.axis_values) values.push_back(detail::exponent_to_json(v));
        j["axis_values"] = values;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Instance generation.

struct GeneratedFiltration {
    Filtration filtration;
    std::vector<double> gammas;  // gamma_k per level
};

/// Repeated split_atom at uniform relative positions in [rel_min, rel_max],
/// resampling (at most 100 times) any split that pushes gamma_k above
/// gamma_max. In dyadic mode the leftmost longest atom is halved and no
/// resampling takes place.
inline GeneratedFiltration gen_filtration(const ExperimentConfig& cfg, Rng& rng) {
    constexpr int kMaxAttempts = 100;
    std::vector<Partition> levels{Partition()};
    std::vector<double> gammas{gamma_k(levels[0], cfg.k)};
    for (int n = 1; n < cfg.levels; ++n) {
        const Partition& prev = levels.back();
        if (cfg.dyadic) {
            std::size_t widest = 0;
            for (std::size_t a = 1; a < prev.atom_count(); ++a)
                if (prev.atom(a).length() > prev.atom(widest).length()) widest = a;
            levels.push_back(split_atom(prev, widest, 0.5));
            gammas.push_back(gamma_k(levels.back(), cfg.k));
            continue;
        }
        const std::size_t splits = cfg.elementary ? 1 : 1 + rng.index(2);
        Partition next = prev;
        for (std::size_t s = 0; s < splits; ++s) {
            bool accepted = false;
            for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
                const std::size_t atom = rng.index(next.atom_count());
                const double rel = rng.uniform(cfg.rel_min, cfg.rel_max);
                Partition candidate = split_atom(next, atom, rel);
                if (gamma_k(candidate, cfg.k) <= cfg.gamma_max) {
                    next = std::move(candidate);
                    accepted = true;
                }
            }
            if (!accepted)
                throw Error(ErrorCode::GenerationExhausted,
                            "no admissible split at level " + std::to_string(n) + " after 100 attempts");
        }
        gammas.push_back(gamma_k(next, cfg.k));
        levels.push_back(std::move(next));
    }
    return {Filtration(std::move(levels), cfg.elementary || cfg.dyadic), std::move(gammas)};
}

/// I.i.d. standard normal coefficients, normalized to unit L2 norm.
inline Spline random_spline(const BSplineBasis& basis, Rng& rng) {
    std::vector<double> c(basis.dim());
    for (double& v : c) v = rng.normal();
    const auto gc = gram(basis).multiply(c);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) norm2 += c[i] * gc[i];
    if (norm2 > 0.0)
        for (double& v : c) v /= std::sqrt(norm2);
    return {basis, std::move(c)};
}

inline AdaptedSequence gen_adapted(const ExperimentConfig& cfg, const Filtration& filtration, Rng& rng) {
    std::vector<Spline> members;
    for (const auto& level : filtration.levels()) members.push_back(random_spline(BSplineBasis(level, cfg.k), rng));
    return adapted_from_splines(filtration, cfg.k, std::move(members));
}

/// Random polynomial of order k with coefficients in the atom's local variable.
inline Polynomial random_polynomial(const Interval& domain, int k, Rng& rng) {
    std::vector<double> c(static_cast<std::size_t>(k));
    for (double& v : c) v = rng.normal();
    return {domain, std::move(c)};
}

// ---------------------------------------------------------------------------
// Trials.

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    int k = 1;
    int kprime = 1;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    std::size_t level_count = 0;
    double lhs = std::numeric_limits<double>::quiet_NaN();
    double rhs = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    std::optional<bool> pass;
    std::string error;
    json extra = json::object();
    double wall_ms = 0.0;
};

namespace detail {

inline double chosen_q(const ExperimentConfig& cfg, const Partition& p) { return cfg.q ? *cfg.q : default_q(p, cfg.k); }

inline void set_ratio(TrialResult& t, double lhs, double rhs) {
    t.lhs = lhs;
    t.rhs = rhs;
    t.ratio = rhs > 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : kInf);
}

inline GeneratedFiltration filtration_for(const ExperimentConfig& cfg, Rng& rng, TrialResult& t) {
    auto g = gen_filtration(cfg, rng);
    t.gamma = g.gammas.back();
    t.level_count = g.filtration.size();
    return g;
}

inline void run_trial_body(const ExperimentConfig& cfg, Rng& rng, TrialResult& t) {
    const QuadratureOptions opt = cfg.quadrature();
    const std::string& check = cfg.check;

    if (check == "remez") {
        const double lo = rng.uniform(0.0, 0.5), hi = rng.uniform(lo + 0.1, 1.0);
        const Interval v{lo, hi};
        const Polynomial poly = random_polynomial(v, cfg.k, rng);
        std::vector<Interval> parts;
        const std::size_t count = 1 + rng.index(3);
        for (std::size_t s = 0; s < count; ++s) {
            const double a = rng.uniform(lo, hi), b = rng.uniform(lo, hi);
            parts.push_back({std::min(a, b), std::max(a, b)});
        }
        IntervalUnion e(std::move(parts));
        if (e.measure() <= 0.0) e = IntervalUnion{v};
        const auto bound = remez_bound_check(poly, v, e, cfg.k);
        const auto level = remez_level_measure(poly, v, cfg.k);
        set_ratio(t, bound.lhs, bound.rhs);
        t.extra["level_fraction"] = level.measure / v.length();
        t.extra["e_fraction"] = e.measure() / v.length();
        t.pass = bound.pass && level.pass;
        return;
    }
    if (check == "phi") {
        const PhiInstance inst = random_phi_instance(rng, 2 + rng.index(8), 2 + static_cast<int>(rng.index(5)));
        const auto phi = greedy_phi(inst);
        const auto v = verify_phi(inst, phi);
        set_ratio(t, v.max_measure_error, 1e-12);
        t.extra["instance_size"] = inst.size();
        t.extra["c1"] = inst.c1;
        t.extra["max_escape"] = v.max_escape;
        t.extra["max_overlap"] = v.max_overlap;
        t.pass = v.pass;
        return;
    }

    const auto gen = filtration_for(cfg, rng, t);
    const Filtration& filt = gen.filtration;
    const Partition& finest = filt.finest();
    const BSplineBasis fine_basis(finest, cfg.k);

    if (check == "shadrin") {
        double best = 0.0, upper = 0.0;
        for (const auto& level : filt.levels()) {
            const auto norm = l1_opnorm(Projector(level, cfg.k));
            best = std::max(best, norm.value);
            upper = std::max(upper, norm.upper_bound);
        }
        set_ratio(t, best, 1.0);
        t.extra["row_bound"] = upper;
        if (cfg.k == 1) t.pass = std::abs(best - 1.0) <= 1e-10;
    } else if (check == "doob") {
        const auto ms = make_martingale(filt, cfg.k, random_spline(fine_basis, rng));
        std::vector<double> lambdas;
        std::vector<PiecewisePolynomial> fs;
        for (const auto& s : ms.members) fs.push_back(to_piecewise(s));
        const double top = sup_norm(max_abs_envelope(fs));
        for (int i = 1; i <= 8; ++i) lambdas.push_back(top * i / 8.0);
        const double p = std::isinf(cfg.p) || cfg.p <= 1.0 ? 2.0 : cfg.p;
        const auto rep = doob_checks(ms, p, lambdas, opt);
        set_ratio(t, rep.maximal_lp, rep.sup_lp);
        t.extra["max_weak_ratio"] = rep.max_weak_ratio;
        t.extra["p"] = p;
        if (cfg.k == 1) t.pass = rep.lp_ratio <= p / (p - 1.0) + 1e-9 && rep.max_weak_ratio <= 1.0 + 1e-9;
    } else if (check == "stein") {
        std::vector<PiecewisePolynomial> fs;
        for (std::size_t n = 0; n < filt.size(); ++n) fs.push_back(to_piecewise(random_spline(fine_basis, rng)));
        const SteinMode mode = cfg.mode == "T" ? SteinMode::T : SteinMode::P;
        const double q = mode == SteinMode::T ? chosen_q(cfg, finest) : 0.5;
        const auto rep = stein_check(fs, filt, cfg.k, cfg.p, cfg.r, mode, q, opt);
        set_ratio(t, rep.lhs, rep.rhs);
        if (mode == SteinMode::T) t.extra["q"] = q;
        if (cfg.k == 1 && mode == SteinMode::P && cfg.p == cfg.r && (cfg.p == 1.0 || cfg.p == 2.0))
            t.pass = rep.ratio <= 1.0 + 1e-9;
    } else if (check == "lepingle") {
        const auto fs = gen_adapted(cfg, filt, rng);
        const auto rep = lepingle_check(fs, cfg.kprime, opt);
        set_ratio(t, rep.lhs, rep.rhs);
        if (cfg.k == 1 && cfg.kprime == 1) t.pass = rep.ratio <= 2.0 + 1e-8;
    } else if (check == "tower") {
        const Partition& coarse = filt.level(filt.size() / 2);
        const double q = cfg.q ? *cfg.q : std::max(cfg.sigma, cfg.tau) + 0.5 * (1.0 - std::max(cfg.sigma, cfg.tau));
        const auto f = to_piecewise(random_spline(BSplineBasis(finest, cfg.kprime), rng));
        const auto rep = tower_check(coarse, finest, cfg.k, cfg.kprime, cfg.sigma, cfg.tau, q, f);
        const double kernel_c =
            kernel_product_check(build_T(coarse, cfg.k, cfg.sigma), build_T(finest, cfg.kprime, cfg.tau), q);
        double lhs = 0.0;
        for (double v : rep.st_values) lhs = std::max(lhs, std::abs(v));
        t.lhs = lhs;
        t.rhs = lhs / rep.c_hat;
        t.ratio = rep.c_hat;
        t.extra["q"] = q;
        t.extra["kernel_product_c"] = kernel_c;
        t.extra["coarse_gamma"] = rep.gamma;
    } else if (check == "jensen") {
        const double q = chosen_q(cfg, finest);
        const KernelOperator op = build_T(finest, cfg.k, q);
        const auto f = to_piecewise(random_spline(fine_basis, rng));
        const ConvexPhi phi = cfg.phi == "abs" ? ConvexPhi::Abs
                              : cfg.phi == "exp-capped" ? ConvexPhi::ExpCapped
                                                        : ConvexPhi::Square;
        const auto rep = jensen_check(op, f, phi, cfg.jensen_frozen, opt);
        t.lhs = rep.max_violation;
        t.rhs = 0.0;
        t.ratio = rep.max_relative_violation;
        t.extra["q"] = q;
        if (cfg.jensen_frozen) t.pass = rep.pass;
    } else if (check == "domination") {
        const double q = chosen_q(cfg, finest);
        const Projector pr(fine_basis);
        const KernelOperator op = build_T(finest, cfg.k, q);
        const auto f = to_piecewise(random_spline(BSplineBasis(finest, cfg.k + 1), rng));
        const auto rep = domination_check(pr, op, f, 64, cfg.grid_size);
        set_ratio(t, rep.c1_hat, 1.0);
        t.extra["c2_hat_upper_estimate"] = rep.c2_hat;
        t.extra["q"] = q;
    } else if (check == "duality") {
        const auto fs = gen_adapted(cfg, filt, rng);
        std::vector<PiecewisePolynomial> hs;
        for (std::size_t n = 0; n < filt.size(); ++n) hs.push_back(to_piecewise(random_spline(fine_basis, rng)));
        const auto rep = main_duality_check(fs, hs, opt);
        set_ratio(t, rep.lhs, rep.rhs);
        t.extra["sigma1"] = rep.sigma1;
        t.extra["sigma2"] = rep.sigma2;
        t.extra["sigma1_bound"] = rep.sigma1_bound;
        t.extra["cauchy_schwarz"] = rep.cauchy_schwarz_pass;
        t.pass = rep.sigma1_pass;
    } else if (check == "h1bmo") {
        const double q = chosen_q(cfg, finest);
        const auto f = to_piecewise(random_spline(fine_basis, rng));
        const auto h = to_piecewise(random_spline(fine_basis, rng));
        const auto rep = pairing_check(f, h, filt, cfg.k, q, opt);
        t.lhs = std::abs(rep.pairing);
        t.rhs = rep.bound;
        t.ratio = rep.ratio;
        t.extra["h1"] = rep.h1;
        t.extra["bmo"] = rep.bmo;
        t.extra["q"] = q;
        if (rep.division_by_zero) t.extra["division_by_zero"] = true;
    } else if (check == "g_props") {
        const auto fs = gen_adapted(cfg, filt, rng);
        const auto gs = build_g(fs, fs.size() - 1);
        const auto rep = verify_g(gs);
        set_ratio(t, gs.mean_g.back(), gs.mean_sqrt_x.back());
        t.ratio = rep.max_ratio;
        t.extra["min_increment"] = rep.min_increment;
        t.extra["min_majorant"] = rep.min_majorant;
        t.extra["silent_levels"] = gs.silent_levels.size();
        t.pass = true;
    } else if (check == "burkholder") {
        const auto f = to_piecewise(random_spline(fine_basis, rng));
        const auto ds = make_deltas(filt, cfg.k, f);
        const double p = std::isinf(cfg.p) ? 2.0 : cfg.p;
        const auto rep = burkholder_ratio(ds, p, opt);
        set_ratio(t, rep.lhs, rep.rhs);
        const auto signs = sign_randomized_ratio(ds, 64, rng.next());
        t.extra["sign_ratio"] = signs.ratio;
        t.extra["sign_patterns"] = signs.patterns;
        t.extra["sign_exhaustive"] = signs.exhaustive;
        if (p == 2.0) t.pass = std::abs(rep.ratio - 1.0) <= 1e-9;
    } else if (check == "stability") {
        const Spline s = random_spline(fine_basis, rng);
        const auto rep = stability_check(s, cfg.p, opt);
        t.lhs = rep.coefficient_ratio;
        t.rhs = rep.norm_ratio;
        t.ratio = std::max({rep.coefficient_ratio, rep.norm_ratio, rep.inverse_norm_ratio});
        t.extra["inverse_norm_ratio"] = rep.inverse_norm_ratio;
        std::vector<Interval> parts;
        for (int s2 = 0; s2 < 2; ++s2) {
            const double a = rng.uniform(), b = rng.uniform();
            parts.push_back({std::min(a, b), std::max(a, b)});
        }
        IntervalUnion area(std::move(parts));
        if (area.measure() > 0.0) t.extra["stab_estimate"] = stab_estimate(s, area);
    } else if (check == "decay") {
        const auto fit = decay_fit(Projector(fine_basis));
        t.lhs = fit.q_hat;
        t.rhs = 1.0;
        t.ratio = fit.q_hat;
        t.extra["c_hat"] = fit.c_hat;
        t.extra["decays"] = fit.decays;
    } else if (check == "kernel") {
        static constexpr double kQs[] = {0.5, 0.7, 0.9};
        const double q = cfg.q ? *cfg.q : kQs[t.trial % 3];
        const KernelOperator op = build_T(finest, cfg.k, q);
        double lo = kInf, hi = 0.0;
        for (double m : op.row_mass) lo = std::min(lo, m), hi = std::max(hi, m);
        t.lhs = lo;
        t.rhs = hi;
        t.ratio = op.bound_slack();
        t.extra["q"] = q;
        t.pass = op.bound_slack() >= -1e-12;
    } else if (check == "parseval") {
        const auto f = to_piecewise(random_spline(fine_basis, rng));
        const auto ds = make_deltas(filt, cfg.k, f);
        const double s2 = std::sqrt(integrate(square_function(ds).q));
        const double p2 = lp_norm(to_piecewise(ds.projections.back()), 2.0);
        set_ratio(t, s2, p2);
        t.pass = parseval_defect(ds) <= 1e-9;
    } else if (check == "orthogonality") {
        const auto f = to_piecewise(random_spline(fine_basis, rng));
        const auto g = to_piecewise(random_spline(fine_basis, rng));
        const auto projectors = level_projectors(filt, cfg.k);
        const double defect = orthogonality_defect(make_deltas(filt, cfg.k, f, projectors),
                                                   make_deltas(filt, cfg.k, g, projectors));
        t.lhs = defect;
        t.rhs = 1e-10;
        t.ratio = defect / 1e-10;
        t.pass = defect <= 1e-10;
    }
}

}  // namespace detail

inline TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial, std::uint64_t axis_index = 0) {
    TrialResult t;
    t.trial = trial;
    t.seed = trial_seed(cfg.master_seed, trial, axis_index);
    t.k = cfg.k;
    t.kprime = cfg.kprime;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(t.seed);
    try {
        detail::run_trial_body(cfg, rng, t);
    } catch (const std::exception& e) {
        t.error = e.what();
        if (is_hard_bound(cfg.check)) t.pass = false;
    }
    t.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return t;
}

struct CheckReport {
    ExperimentConfig config;
    std::uint64_t axis_index = 0;
    std::vector<TrialResult> trials;

    std::size_t errors() const {
        return static_cast<std::size_t>(
            std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return !t.error.empty(); }));
    }
    std::size_t failures() const {
        return static_cast<std::size_t>(
            std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return t.pass == false; }));
    }
    /// True when no trial failed a hard bound and no trial raised an error.
    bool ok() const { return errors() == 0 && failures() == 0; }
};

/// Runs cfg.trials independent trials; results are ordered by trial index
/// regardless of the number of worker threads.
inline CheckReport run_check(const ExperimentConfig& cfg, std::uint64_t axis_index = 0) {
    validate(cfg);
    CheckReport rep{cfg, axis_index, std::vector<TrialResult>(static_cast<std::size_t>(cfg.trials))};
    const std::size_t n = rep.trials.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) rep.trials[i] = run_trial(cfg, i, axis_index);
        return rep;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) rep.trials[i] = run_trial(cfg, i, axis_index);
        });
    for (auto& th : pool) th.join();
    return rep;
}

// ---------------------------------------------------------------------------
// Output.

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace detail

inline json trial_to_json(const TrialResult& t) {
    json j{{"trial", t.trial},
           {"seed", t.seed},
           {"k", t.k},
           {"kprime", t.kprime},
           {"gamma", detail::number_or_null(t.gamma)},
           {"level_count", t.level_count},
           {"lhs", detail::number_or_null(t.lhs)},
           {"rhs", detail::number_or_null(t.rhs)},
           {"ratio", detail::number_or_null(t.ratio)}};
    j["pass"] = t.pass ? json(*t.pass) : json(nullptr);
    if (!t.error.empty()) j["error"] = t.error;
    if (!t.extra.empty()) j["extra"] = t.extra;
    return j;
}

inline json summary_json(const CheckReport& rep) {
    std::vector<double> ratios;
    double max_ratio = -kInf;
    for (const auto& t : rep.trials)
        if (!std::isnan(t.ratio)) {
            ratios.push_back(t.ratio);
            max_ratio = std::max(max_ratio, t.ratio);
        }
    json s{{"trials", rep.trials.size()},
           {"errors", rep.errors()},
           {"failures", rep.failures()},
           {"hard_bound", is_hard_bound(rep.config.check)},
           {"max_ratio", detail::number_or_null(max_ratio)},
           {"median_ratio", detail::number_or_null(detail::median(ratios))}};
    const bool any_pass_flag =
        std::any_of(rep.trials.begin(), rep.trials.end(), [](const TrialResult& t) { return t.pass.has_value(); });
    s["all_pass"] = any_pass_flag ? json(rep.ok()) : json(nullptr);
    return s;
}

/// Deterministic report: no timing fields, so identical configs give
/// byte-identical output.
inline json report_to_json(const CheckReport& rep) {
    json trials = json::array();
    for (const auto& t : rep.trials) trials.push_back(trial_to_json(t));
    return json{{"schema", 1},
                {"check", rep.config.check},
                {"config", config_to_json(rep.config)},
                {"axis_index", rep.axis_index},
                {"seed_rule", "splitmix64 chain over (master_seed, trial_index, axis_index)"},
                {"summary", summary_json(rep)},
                {"trials", trials}};
}

inline const char* kCsvHeader = "check,seed,k,kprime,gamma,level_count,lhs,rhs,ratio,pass,wall_ms";

inline std::string csv_row(const std::string& check, const TrialResult& t) {
    using detail::csv_number;
    std::string row = check + "," + std::to_string(t.seed) + "," + std::to_string(t.k) + "," +
                      std::to_string(t.kprime) + "," + csv_number(t.gamma) + "," + std::to_string(t.level_count) +
                      "," + csv_number(t.lhs) + "," + csv_number(t.rhs) + "," + csv_number(t.ratio) + ",";
    row += t.pass ? (*t.pass ? "true" : "false") : "";
    row += "," + csv_number(t.wall_ms);
    return row;
}

inline std::string report_to_csv(const CheckReport& rep) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& t : rep.trials) out += csv_row(rep.config.check, t) + "\n";
    return out;
}

struct SweepReport {
    ExperimentConfig config;
    std::vector<double> values;
    std::vector<CheckReport> runs;

    bool ok() const {
        return std::all_of(runs.begin(), runs.end(), [](const CheckReport& r) { return r.ok(); });
    }
};

inline ExperimentConfig with_axis_value(ExperimentConfig cfg, double value) {
    if (cfg.axis == "k") cfg.k = static_cast<int>(value);
    else if (cfg.axis == "gamma_max") cfg.gamma_max = value;
    else if (cfg.axis == "levels") cfg.levels = static_cast<int>(value);
    else if (cfg.axis == "p") cfg.p = value;
    cfg.axis.clear();
    cfg.axis_values.clear();
    return cfg;
}

inline SweepReport sweep(const ExperimentConfig& cfg) {
    if (cfg.axis.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs an axis");
    if (cfg.axis_values.empty()) throw Error(ErrorCode::InvalidConfig, "sweep axis has no values");
    SweepReport out{cfg, cfg.axis_values, {}};
    for (std::size_t a = 0; a < cfg.axis_values.size(); ++a) {
        const ExperimentConfig point = with_axis_value(cfg, cfg.axis_values[a]);
        validate(point);
        out.runs.push_back(run_check(point, a));
    }
    return out;
}

inline json sweep_to_json(const SweepReport& s) {
    json points = json::array();
    for (std::size_t a = 0; a < s.runs.size(); ++a)
        points.push_back(json{{"axis_value", detail::exponent_to_json(s.values[a])},
                              {"summary", summary_json(s.runs[a])}});
    json runs = json::array();
    for (const auto& r : s.runs) runs.push_back(report_to_json(r));
    return json{{"schema", 1},
                {"check", s.config.check},
                {"axis", s.config.axis},
                {"config", config_to_json(s.config)},
                {"points", points},
                {"runs", runs}};
}

inline std::string sweep_to_csv(const SweepReport& s) {
    std::string out = std::string("axis,axis_value,") + kCsvHeader + "\n";
    for (std::size_t a = 0; a < s.runs.size(); ++a)
        for (const auto& t : s.runs[a].trials)
            out += s.config.axis + "," + detail::csv_number(s.values[a]) + "," + csv_row(s.config.check, t) + "\n";
    return out;
}

}  // namespace splinegale
