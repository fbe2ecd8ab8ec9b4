#pragma once

// Laplace-Stieltjes transforms and probability generating functions as
// evaluatable numerator/denominator pairs, plus the closed-form catalog
// (exponential, Erlang, hyperexponential, M/D/1 sojourn and queue length).
//
// Catalog entries with a removable point keep it factored out of both the
// numerator and the denominator, so every zero of the stored denominator is a
// genuine pole candidate. The M/D/1 sojourn transform, for example, is held
// as (1-rho)e^{-s} over (s - rho + rho e^{-s})/s, with a series branch for
// the denominator near s = 0.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "tailspectra/common.hpp"
#include "tailspectra/expression.hpp"

namespace tailspectra {

inline constexpr double kPoleGuard = 1e-13;       // |denominator| guard for PoleHit
inline constexpr double kSeriesBranchRadius = 1e-4;

using ComplexFn = std::function<Complex(Complex)>;

struct TransformSpec {
    std::string id = "custom";
    ParamMap params;
    ComplexFn numerator;
    ComplexFn denominator;
    std::pair<double, double> search_bracket{-1.0, -1e-6};
    std::optional<double> known_sigma0;
    // Retained for round-tripping custom specs through JSON.
    std::optional<Expr> numerator_ast;
    std::optional<Expr> denominator_ast;

    Complex num(Complex s) const { return numerator(s); }
    Complex den(Complex s) const { return denominator(s); }
};

struct PgfSpec {
    std::string id;
    ParamMap params;
    ComplexFn numerator;
    ComplexFn denominator;
    std::pair<double, double> radius_bracket{1.0 + 1e-6, 50.0};

    Complex num(Complex z) const { return numerator(z); }
    Complex den(Complex z) const { return denominator(z); }
};

/// phi(s) = numerator(s)/denominator(s); throws PoleHit within the guard
/// radius of a denominator zero.
inline Complex eval_transform(const TransformSpec& spec, Complex s) {
    Complex d = spec.den(s);
    if (std::abs(d) < kPoleGuard)
        throw PoleHit("transform evaluated at or too near a pole (|denominator| < guard)");
    return spec.num(s) / d;
}

/// f(z) for a PGF spec, same guard semantics.
inline Complex eval_pgf(const PgfSpec& pgf, Complex z) {
    Complex d = pgf.den(z);
    if (std::abs(d) < kPoleGuard)
        throw PoleHit("generating function evaluated at or too near a pole");
    return pgf.num(z) / d;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

inline TransformSpec make_exponential(double mu) {
    if (!(mu > 0)) throw BadParam("exponential: rate mu must be positive");
    TransformSpec t;
    t.id = "exponential";
    t.params = {{"mu", mu}};
    t.numerator = [mu](Complex) { return Complex(mu, 0.0); };
    t.denominator = [mu](Complex s) { return s + mu; };
    t.search_bracket = {-2.0 * mu, -0.5 * mu};
    t.known_sigma0 = -mu;
    return t;
}

inline TransformSpec make_erlang(int k, double mu) {
    if (k < 1) throw BadParam("erlang: shape k must be a positive integer");
    if (!(mu > 0)) throw BadParam("erlang: rate mu must be positive");
    TransformSpec t;
    t.id = "erlang";
    t.params = {{"k", static_cast<double>(k)}, {"mu", mu}};
    t.numerator = [mu, k](Complex) { return Complex(std::pow(mu, k), 0.0); };
    t.denominator = [mu, k](Complex s) { return std::pow(s + mu, k); };
    t.search_bracket = {-2.0 * mu, -0.5 * mu};
    t.known_sigma0 = -mu;
    return t;
}

inline TransformSpec make_hyperexponential(double p, double mu1, double mu2) {
    if (!(p >= 0.0 && p <= 1.0)) throw BadParam("hyperexponential: p must lie in [0,1]");
    if (!(mu1 > 0) || !(mu2 > 0)) throw BadParam("hyperexponential: rates must be positive");
    TransformSpec t;
    t.id = "hyperexponential";
    t.params = {{"p", p}, {"mu1", mu1}, {"mu2", mu2}};
    // Degenerate mixtures collapse to a single phase so the vanished phase's
    // denominator factor does not masquerade as a pole.
    if (p == 1.0) {
        t.numerator = [mu1](Complex) { return Complex(mu1, 0.0); };
        t.denominator = [mu1](Complex s) { return s + mu1; };
        t.known_sigma0 = -mu1;
        t.search_bracket = {-2.0 * mu1, -0.5 * mu1};
        return t;
    }
    if (p == 0.0) {
        t.numerator = [mu2](Complex) { return Complex(mu2, 0.0); };
        t.denominator = [mu2](Complex s) { return s + mu2; };
        t.known_sigma0 = -mu2;
        t.search_bracket = {-2.0 * mu2, -0.5 * mu2};
        return t;
    }
    t.numerator = [p, mu1, mu2](Complex s) {
        return p * mu1 * (s + mu2) + (1.0 - p) * mu2 * (s + mu1);
    };
    t.denominator = [mu1, mu2](Complex s) { return (s + mu1) * (s + mu2); };
    double mn = std::min(mu1, mu2);
    t.known_sigma0 = -mn;
    t.search_bracket = {-2.0 * mn, -0.5 * mn};
    return t;
}

/// M/D/1 sojourn-time transform (unit service), traffic intensity rho.
/// Stored factored: numerator (1-rho)e^{-s}, denominator
/// (s - rho + rho e^{-s})/s with a 6-term series branch for |s| < 1e-4.
inline TransformSpec make_md1_sojourn(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw BadParam("md1_sojourn: rho must lie in (0,1)");
    TransformSpec t;
    t.id = "md1_sojourn";
    t.params = {{"rho", rho}};
    t.numerator = [rho](Complex s) { return (1.0 - rho) * std::exp(-s); };
    t.denominator = [rho](Complex s) {
        if (std::abs(s) < kSeriesBranchRadius) {
            // (s - rho + rho e^{-s})/s = (1-rho) + rho(s/2 - s^2/6 + ...)
            Complex acc(0.0, 0.0);
            const double c[6] = {1.0 / 2, -1.0 / 6, 1.0 / 24, -1.0 / 120, 1.0 / 720, -1.0 / 5040};
            Complex pw(1.0, 0.0);
            for (double ck : c) {
                pw *= s;
                acc += ck * pw;
            }
            return Complex(1.0 - rho, 0.0) + rho * acc;
        }
        return (s - rho + rho * std::exp(-s)) / s;
    };
    t.search_bracket = {-3.0, -1e-6};
    return t;
}

/// M/D/1 queue-length PGF (Pollaczek-Khinchin), factored the same way:
/// numerator (1-rho)e^{rho(z-1)}, denominator (z - e^{rho(z-1)})/(z-1).
inline PgfSpec make_md1_queue_pgf(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw BadParam("md1_queue_pgf: rho must lie in (0,1)");
    PgfSpec p;
    p.id = "md1_queue_pgf";
    p.params = {{"rho", rho}};
    p.numerator = [rho](Complex z) { return (1.0 - rho) * std::exp(rho * (z - 1.0)); };
    p.denominator = [rho](Complex z) {
        Complex u = z - 1.0;
        if (std::abs(u) < kSeriesBranchRadius) {
            // (z - e^{rho u})/u = (1-rho) - rho^2 u/2 - rho^3 u^2/6 - ...
            Complex acc(0.0, 0.0);
            Complex pw(1.0, 0.0);
            double rp = rho;
            const double fact[6] = {2, 6, 24, 120, 720, 5040};
            for (double fk : fact) {
                rp *= rho;
                pw *= u;
                acc += (rp / fk) * pw;
            }
            return Complex(1.0 - rho, 0.0) - acc;
        }
        return (z - std::exp(rho * u)) / u;
    };
    p.radius_bracket = {1.0 + 1e-6, 50.0};
    return p;
}

/// Geometric on {1,2,...}: f(z) = (1-q)z / (1-qz), radius 1/q.
inline PgfSpec make_geometric(double q) {
    if (!(q > 0.0 && q < 1.0)) throw BadParam("geometric: q must lie in (0,1)");
    PgfSpec p;
    p.id = "geometric";
    p.params = {{"q", q}};
    p.numerator = [q](Complex z) { return (1.0 - q) * z; };
    p.denominator = [q](Complex z) { return 1.0 - q * z; };
    p.radius_bracket = {1.0 + 1e-6, 2.0 / q};
    return p;
}

/// Point mass at 1: f(z) = z. Entire, so no finite radius/pole downstream.
inline PgfSpec make_deterministic_pgf() {
    PgfSpec p;
    p.id = "deterministic";
    p.numerator = [](Complex z) { return z; };
    p.denominator = [](Complex) { return Complex(1.0, 0.0); };
    p.radius_bracket = {1.0 + 1e-6, 50.0};
    return p;
}

/// Dispatch by catalog name.
inline TransformSpec make_catalog(const std::string& dist, const ParamMap& params) {
    auto get = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end()) throw BadParam(dist + ": missing parameter \"" + key + "\"");
        return it->second;
    };
    if (dist == "exponential") return make_exponential(get("mu"));
    if (dist == "erlang") {
        double kraw = get("k");
        int k = static_cast<int>(std::lround(kraw));
        if (std::abs(kraw - k) > 1e-12) throw BadParam("erlang: k must be an integer");
        return make_erlang(k, get("mu"));
    }
    if (dist == "hyperexponential") return make_hyperexponential(get("p"), get("mu1"), get("mu2"));
    if (dist == "md1_sojourn") return make_md1_sojourn(get("rho"));
    throw BadParam("unknown transform catalog entry \"" + dist + "\"");
}

inline PgfSpec make_pgf_catalog(const std::string& dist, const ParamMap& params) {
    auto get = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end()) throw BadParam(dist + ": missing parameter \"" + key + "\"");
        return it->second;
    };
    if (dist == "md1_queue_pgf") return make_md1_queue_pgf(get("rho"));
    if (dist == "geometric") return make_geometric(get("q"));
    if (dist == "deterministic") return make_deterministic_pgf();
    throw BadParam("unknown PGF catalog entry \"" + dist + "\"");
}

inline bool is_pgf_catalog_name(const std::string& dist) {
    return dist == "md1_queue_pgf" || dist == "geometric" || dist == "deterministic";
}

// ---------------------------------------------------------------------------
// PGF -> LS bridge: phi(s) = f(e^{-s}), sigma0 = -log r
// ---------------------------------------------------------------------------

inline TransformSpec pgf_to_ls(const PgfSpec& pgf) {
    TransformSpec t;
    t.id = "ls_of_" + pgf.id;
    t.params = pgf.params;
    auto num = pgf.numerator;
    auto den = pgf.denominator;
    t.numerator = [num](Complex s) { return num(std::exp(-s)); };
    t.denominator = [den](Complex s) { return den(std::exp(-s)); };
    // z in [lo, hi] maps to s in [-log hi, -log lo].
    t.search_bracket = {-std::log(pgf.radius_bracket.second),
                        -std::log(pgf.radius_bracket.first)};
    return t;
}

// ---------------------------------------------------------------------------
// JSON (catalog entries round-trip by id + params; custom specs by AST)
// ---------------------------------------------------------------------------

inline nlohmann::json transform_to_json(const TransformSpec& t) {
    nlohmann::json j;
    j["id"] = t.id;
    j["params"] = t.params;
    j["search_bracket"] = {t.search_bracket.first, t.search_bracket.second};
    if (t.known_sigma0) j["known_sigma0"] = *t.known_sigma0;
    if (t.numerator_ast) j["numerator"] = expr_to_json(*t.numerator_ast);
    if (t.denominator_ast) j["denominator"] = expr_to_json(*t.denominator_ast);
    return j;
}

/// Builds a spec from JSON. Custom specs must satisfy phi(0) = 1 (probability
/// normalization) within 1e-12 and supply both expression trees.
inline TransformSpec transform_from_json(const nlohmann::json& j) {
    const std::string id = j.value("id", "custom");
    ParamMap params;
    if (j.contains("params")) params = j.at("params").get<ParamMap>();

    TransformSpec t;
    if (id == "custom") {
        if (!j.contains("numerator") || !j.contains("denominator"))
            throw BadParam("custom transform needs \"numerator\" and \"denominator\" trees");
        Expr num = expr_from_json(j.at("numerator"));
        Expr den = expr_from_json(j.at("denominator"));
        t.id = "custom";
        t.params = params;
        t.numerator_ast = num;
        t.denominator_ast = den;
        t.numerator = [num](Complex s) { return num.eval(s); };
        t.denominator = [den](Complex s) { return den.eval(s); };
        if (!j.contains("search_bracket") && !j.contains("known_sigma0"))
            throw BadParam("custom transform needs a search_bracket or known_sigma0");
        Complex phi0 = eval_transform(t, Complex(0.0, 0.0));
        if (std::abs(phi0 - 1.0) > 1e-12)
            throw BadParam("custom transform is not normalized: phi(0) != 1");
    } else {
        t = make_catalog(id, params);
    }
    if (j.contains("search_bracket")) {
        auto b = j.at("search_bracket");
        t.search_bracket = {b.at(0).get<double>(), b.at(1).get<double>()};
    }
    if (j.contains("known_sigma0")) t.known_sigma0 = j.at("known_sigma0").get<double>();
    return t;
}

inline nlohmann::json pgf_to_json(const PgfSpec& p) {
    nlohmann::json j;
    j["id"] = p.id;
    j["params"] = p.params;
    j["radius_bracket"] = {p.radius_bracket.first, p.radius_bracket.second};
    return j;
}

inline PgfSpec pgf_from_json(const nlohmann::json& j) {
    ParamMap params;
    if (j.contains("params")) params = j.at("params").get<ParamMap>();
    PgfSpec p = make_pgf_catalog(j.at("id").get<std::string>(), params);
    if (j.contains("radius_bracket")) {
        auto b = j.at("radius_bracket");
        p.radius_bracket = {b.at(0).get<double>(), b.at(1).get<double>()};
    }
    return p;
}

}  // namespace tailspectra
