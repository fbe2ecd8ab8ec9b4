#pragma once

// Independent evidence for the spectral results: seeded Monte Carlo queue
// simulation, exact tails for the catalog distributions, log-linear decay
// slope estimation, and the staircase construction whose tail provably has
// no decay-rate limit.
//
// Sampling uses a counter-based generator (SplitMix64 of seed + index), so
// sample i depends only on (seed, i): chunked parallel generation is
// bit-identical to sequential generation in any chunk order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tailspectra/common.hpp"

namespace tailspectra {

struct SampleSet {
    std::string model;
    ParamMap params;
    std::uint64_t seed = 0;
    std::vector<double> values;
    std::string note;  // e.g. heavy warm-up flag

    std::size_t count() const { return values.size(); }
};

enum class CurveSource { Empirical, ClosedForm, Counterexample };

struct TailCurve {
    std::vector<double> x;         // strictly increasing
    std::vector<double> log_tail;  // log P(X > x), non-increasing
    CurveSource source = CurveSource::ClosedForm;
};

struct SlopeEstimate {
    double slope = 0.0;
    double stderr_ = 0.0;
    std::size_t n_points = 0;
    double window_lo = 0.0, window_hi = 0.0;
};

// ---------------------------------------------------------------------------
// Counter-based RNG
// ---------------------------------------------------------------------------

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform in (0, 1], a pure function of (seed, index).
inline double uniform_at(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t bits = splitmix64(seed + index * 0x9E3779B97F4A7C15ull);
    double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

inline double exponential_at(std::uint64_t seed, std::uint64_t index, double rate) {
    return -std::log(uniform_at(seed, index)) / rate;
}

}  // namespace rng

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

/// n i.i.d. exponential(mu) samples; chunked generation, bit-identical for
/// any worker count.
inline SampleSet sample_exponential(double mu, std::size_t n, std::uint64_t seed) {
    if (!(mu > 0)) throw BadParam("sample_exponential: mu must be positive");
    if (n < 1) throw BadParam("sample_exponential: n must be positive");
    SampleSet out;
    out.model = "exponential";
    out.params = {{"mu", mu}};
    out.seed = seed;
    out.values.resize(n);
    const std::size_t chunk = 1 << 16;
    parallel_for_chunks((n + chunk - 1) / chunk, [&](std::size_t c) {
        std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i)
            out.values[i] = rng::exponential_at(seed, i, mu);
    });
    return out;
}

/// M/D/1 sojourn times by the Lindley recursion with unit deterministic
/// service and exponential(rho) interarrivals (so time is in service units
/// and rho is both the arrival rate and the load):
///   W_{k+1} = max(0, W_k + 1 - A_k),  sojourn_k = W_k + 1.
/// The first ceil(n/10) sojourns are warm-up and are discarded.
inline SampleSet simulate_md1(double rho, std::size_t n, std::uint64_t seed) {
    if (!(rho > 0.0 && rho < 1.0)) throw BadParam("simulate_md1: rho must lie in (0,1)");
    if (n < 1000) throw BadParam("simulate_md1: n must be at least 1e3");
    SampleSet out;
    out.model = "md1_sojourn";
    out.params = {{"rho", rho}};
    out.seed = seed;
    std::size_t warmup = (n + 9) / 10;
    std::size_t total = n + warmup;
    // Interarrivals are pure functions of (seed, k); generate them chunked,
    // then run the (inherently sequential) recursion.
    std::vector<double> arrivals(total);
    const std::size_t chunk = 1 << 16;
    parallel_for_chunks((total + chunk - 1) / chunk, [&](std::size_t c) {
        std::size_t end = std::min(total, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i)
            arrivals[i] = rng::exponential_at(seed, i, rho);
    });
    out.values.resize(n);
    double w = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        if (k >= warmup) out.values[k - warmup] = w + 1.0;
        w = std::max(0.0, w + 1.0 - arrivals[k]);
    }
    if (rho > 0.95)
        out.note = "heavy warm-up: relaxation time grows like 1/(1-rho)^2 at rho=" +
                   std::to_string(rho);
    return out;
}

// ---------------------------------------------------------------------------
// Tail curves
// ---------------------------------------------------------------------------

/// Complementary-ECDF curve from samples: at the i-th order statistic the
/// empirical tail is (n-i)/n; the last point (tail 0) is dropped.
inline TailCurve tail_curve_from_samples(const SampleSet& samples) {
    std::vector<double> sorted = samples.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    TailCurve curve;
    curve.source = CurveSource::Empirical;
    curve.x.reserve(n);
    curve.log_tail.reserve(n);
    double logn = std::log(static_cast<double>(n));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;  // keep last of ties
        curve.x.push_back(sorted[i]);
        curve.log_tail.push_back(std::log(static_cast<double>(n - 1 - i)) - logn);
    }
    return curve;
}

/// Exact log-tails for the catalog distributions on a given grid.
/// erlang uses log-sum-exp over the Poisson partial sum.
inline TailCurve closed_form_tail(const std::string& dist, const ParamMap& params,
                                  const std::vector<double>& x_grid) {
    auto get = [&](const char* key) {
        for (const auto& kv : params)
            if (kv.first == key) return kv.second;
        throw BadParam(dist + ": missing parameter \"" + std::string(key) + "\"");
    };
    std::function<double(double)> log_tail;
    if (dist == "exponential") {
        double mu = get("mu");
        if (!(mu > 0)) throw BadParam("exponential: mu must be positive");
        log_tail = [mu](double x) { return -mu * x; };
    } else if (dist == "erlang") {
        double mu = get("mu");
        int k = static_cast<int>(std::lround(get("k")));
        if (!(mu > 0) || k < 1) throw BadParam("erlang: bad parameters");
        log_tail = [mu, k](double x) {
            if (x <= 0.0) return 0.0;
            double lx = std::log(mu * x);
            double m = -std::numeric_limits<double>::infinity();
            std::vector<double> terms(k);
            for (int j = 0; j < k; ++j) {
                terms[j] = j * lx - std::lgamma(j + 1.0);
                m = std::max(m, terms[j]);
            }
            double acc = 0.0;
            for (double t : terms) acc += std::exp(t - m);
            return -mu * x + m + std::log(acc);
        };
    } else if (dist == "hyperexponential") {
        double p = get("p"), mu1 = get("mu1"), mu2 = get("mu2");
        if (!(p >= 0 && p <= 1) || !(mu1 > 0) || !(mu2 > 0))
            throw BadParam("hyperexponential: bad parameters");
        log_tail = [p, mu1, mu2](double x) {
            double a = std::log(p) - mu1 * x;
            double b = std::log1p(-p) - mu2 * x;
            if (p == 0.0) return b;
            if (p == 1.0) return a;
            double m = std::max(a, b);
            return m + std::log(std::exp(a - m) + std::exp(b - m));
        };
    } else {
        throw BadParam("closed_form_tail: unknown distribution \"" + dist + "\"");
    }
    TailCurve curve;
    curve.source = CurveSource::ClosedForm;
    for (double x : x_grid) {
        curve.x.push_back(x);
        curve.log_tail.push_back(log_tail(x));
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Decay-slope regression
// ---------------------------------------------------------------------------

struct SlopeWindow {
    double lo_q = 0.90;
    double hi_q = 0.999;
};

/// Least-squares slope of log_tail against x over an index-quantile window
/// of the curve (for an ECDF curve, index quantiles are sample quantiles).
/// Defaults: [0.90, 0.999] for empirical curves, the whole curve otherwise.
inline SlopeEstimate estimate_decay_slope(const TailCurve& curve,
                                          std::optional<SlopeWindow> window = std::nullopt) {
    SlopeWindow w;
    if (window) w = *window;
    else if (curve.source != CurveSource::Empirical) w = {0.0, 1.0};
    const std::size_t m = curve.x.size();
    if (m < 2) throw TooFewPoints("curve has fewer than 2 points");
    std::size_t lo = static_cast<std::size_t>(std::floor(w.lo_q * (m - 1)));
    std::size_t hi = static_cast<std::size_t>(std::ceil(w.hi_q * (m - 1)));
    hi = std::min(hi, m - 1);
    if (hi < lo + 49) throw TooFewPoints("regression window holds fewer than 50 points");
    std::size_t n = hi - lo + 1;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        sx += curve.x[i];
        sy += curve.log_tail[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        double dx = curve.x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (curve.log_tail[i] - my);
    }
    if (sxx == 0.0) throw TooFewPoints("window has no x spread");
    SlopeEstimate est;
    est.slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        double r = curve.log_tail[i] - my - est.slope * (curve.x[i] - mx);
        ss_res += r * r;
    }
    est.stderr_ = n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    est.n_points = n;
    est.window_lo = curve.x[lo];
    est.window_hi = curve.x[hi];
    return est;
}

/// x^{-D+1} e^{-sigma0 x} P(X > x) for a catalog distribution, assembled in
/// the log domain.
inline double normalized_ratio(const std::string& dist, const ParamMap& params,
                               double sigma0, int D, double x) {
    if (!(x > 0)) throw BadParam("normalized_ratio: x must be positive");
    TailCurve c = closed_form_tail(dist, params, {x});
    double log_ratio = -(D - 1.0) * std::log(x) - sigma0 * x + c.log_tail[0];
    return std::exp(log_ratio);
}

// ---------------------------------------------------------------------------
// The staircase counterexample
// ---------------------------------------------------------------------------

/// Distribution F*(x) = 1 - e^{sigma0 x} gamma(x) with gamma(x) = h^{-c_n}
/// on [c_n, c_{n+1}) and c_n = c_{n-1} + h^{c_{n-1}}, c_0 = 0. The c_n are
/// exact integers; gamma and the tail live in the log domain (gamma
/// underflows past n = 3 for h = 2).
struct CounterexampleModel {
    int h = 2;
    double sigma0 = -1.0;
    std::vector<std::uint64_t> c;

    double log_h() const { return std::log(static_cast<double>(h)); }

    /// log gamma(x) = -c_n log h for c_n <= x < c_{n+1}; the last computed
    /// step extends to every representable larger x (the next breakpoint
    /// overflows any double).
    double log_gamma(double x) const {
        if (x < 0.0) throw BadParam("log_gamma: x must be non-negative");
        std::size_t n = 0;
        while (n + 1 < c.size() && x >= static_cast<double>(c[n + 1])) ++n;
        return -static_cast<double>(c[n]) * log_h();
    }

    double log_tail(double x) const { return sigma0 * x + log_gamma(x); }
};

inline CounterexampleModel build_counterexample(int h, double sigma0, int n_max) {
    if (h < 2) throw BadParam("build_counterexample: h must be an integer >= 2");
    if (!(sigma0 < 0)) throw BadParam("build_counterexample: sigma0 must be negative");
    if (n_max < 1) throw BadParam("build_counterexample: n_max must be positive");
    CounterexampleModel model;
    model.h = h;
    model.sigma0 = sigma0;
    model.c.push_back(0);
    for (int n = 1; n <= n_max; ++n) {
        std::uint64_t prev = model.c.back();
        // h^prev with overflow detection against the 64-bit budget.
        long double bits = static_cast<long double>(prev) * std::log2l(static_cast<long double>(h));
        if (bits > 62.0L)
            throw Overflow("c_" + std::to_string(n) + " exceeds the exact 64-bit integer budget");
        std::uint64_t pw = 1;
        for (std::uint64_t i = 0; i < prev; ++i) pw *= static_cast<std::uint64_t>(h);
        std::uint64_t next = prev + pw;
        if (next < prev) throw Overflow("c overflowed 64-bit arithmetic");
        model.c.push_back(next);
    }
    return model;
}

/// The two subsequences exhibiting the oscillation of x^{-1} log P(X* > x):
/// at x = c_n the value is sigma0 - log h exactly; just below the next
/// breakpoint, x = c_{n+1}(1 - 1e-12), it is sigma0 - (c_n/c_{n+1}) log h,
/// which approaches sigma0. Their gap tends to log h.
struct OscillationReport {
    CounterexampleModel model;
    std::vector<double> x_at_step;      // c_n, n >= 1
    std::vector<double> value_at_step;  // sigma0 - log h
    std::vector<double> x_before_next;  // c_{n+1} (1 - delta)
    std::vector<double> value_before_next;
    TailCurve curve;  // merged, ascending in x
};

inline OscillationReport counterexample_lim_points(const CounterexampleModel& model) {
    constexpr double kDelta = 1e-12;
    OscillationReport rep;
    rep.model = model;
    rep.curve.source = CurveSource::Counterexample;
    auto push_point = [&](double x) {
        rep.curve.x.push_back(x);
        rep.curve.log_tail.push_back(model.log_tail(x));
    };
    for (std::size_t n = 1; n < model.c.size(); ++n) {
        double xn = static_cast<double>(model.c[n]);
        double xb = xn * (1.0 - kDelta);
        // just before the step the previous gamma value still applies
        push_point(xb);
        push_point(xn);
        rep.x_before_next.push_back(xb);
        rep.value_before_next.push_back(model.log_tail(xb) / xb);
        rep.x_at_step.push_back(xn);
        rep.value_at_step.push_back(model.log_tail(xn) / xn);
    }
    return rep;
}

/// Right-continuity / monotonicity check of F* across the step points:
/// log tail must not increase through any breakpoint. Returns the worst
/// (most positive) increase found; <= 0 means F* is non-decreasing there.
inline double counterexample_monotonicity_violation(const CounterexampleModel& model) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < model.c.size(); ++n) {
        double xn = static_cast<double>(model.c[n]);
        double before = model.log_tail(xn * (1.0 - 1e-12));
        double at = model.log_tail(xn);
        worst = std::max(worst, at - before);
    }
    return worst;
}

}  // namespace tailspectra
