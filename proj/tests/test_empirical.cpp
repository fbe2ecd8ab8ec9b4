#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "tailspectra/empirical.hpp"
#include "test_support.hpp"

using namespace tailspectra;
using Catch::Approx;

TEST_CASE("simulate_md1: mean matches the waiting-time formula", "[mc]") {
    auto s = simulate_md1(0.5, 1000000, 42);
    REQUIRE(s.count() == 1000000);
    double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / s.count();
    double var = 0.0;
    for (double v : s.values) var += (v - mean) * (v - mean);
    var /= (s.count() - 1);
    double se = std::sqrt(var / s.count());
    // mean sojourn = 1 + rho/(2(1-rho)) = 1.5 at rho = 0.5
    CHECK(std::abs(mean - 1.5) < 3.0 * se);
}

TEST_CASE("simulate_md1: determinism and flags", "[mc]") {
    auto a = simulate_md1(0.5, 1000, 42);
    auto b = simulate_md1(0.5, 1000, 42);
    CHECK(a.values == b.values);
    auto c = simulate_md1(0.5, 1000, 43);
    CHECK(a.values != c.values);

    CHECK(simulate_md1(0.5, 1000, 42).note.empty());
    CHECK_FALSE(simulate_md1(0.99, 1000, 42).note.empty());  // heavy warm-up flagged

    CHECK_THROWS_AS(simulate_md1(1.0, 1000, 42), BadParam);
    CHECK_THROWS_AS(simulate_md1(0.5, 10, 42), BadParam);
}

TEST_CASE("samplers are chunk-independent", "[mc]") {
    // counter-based draws: the same (seed, index) pair gives the same value
    // whatever the worker count
    auto baseline = sample_exponential(1.0, 200000, 7);
#ifdef _WIN32
    (void)baseline;
#else
    setenv("TAILSPECTRA_THREADS", "1", 1);
    auto serial = sample_exponential(1.0, 200000, 7);
    setenv("TAILSPECTRA_THREADS", "3", 1);
    auto threaded = sample_exponential(1.0, 200000, 7);
    unsetenv("TAILSPECTRA_THREADS");
    CHECK(baseline.values == serial.values);
    CHECK(baseline.values == threaded.values);
#endif
}

TEST_CASE("closed_form_tail values") {
    auto exp_curve = closed_form_tail("exponential", {{"mu", 1.0}}, {10.0});
    CHECK(exp_curve.log_tail[0] == Approx(-10.0).margin(1e-14));

    // erlang(2,1) at x = 50: log(e^{-50} (1 + 50))
    auto erl = closed_form_tail("erlang", {{"k", 2.0}, {"mu", 1.0}}, {50.0});
    CHECK(erl.log_tail[0] == Approx(-50.0 + std::log(51.0)).margin(1e-11));

    // hyperexponential slope approaches the slowest phase
    std::vector<double> grid;
    for (double x = 40.0; x <= 120.0; x += 0.5) grid.push_back(x);
    auto hyp = closed_form_tail("hyperexponential", {{"p", 0.5}, {"mu1", 1.0}, {"mu2", 2.0}}, grid);
    auto est = estimate_decay_slope(hyp);
    CHECK(est.slope == Approx(-1.0).margin(1e-3));

    CHECK_THROWS_AS(closed_form_tail("weibull", {}, {1.0}), BadParam);
}

TEST_CASE("estimate_decay_slope", "[slope]") {
    SECTION("closed-form exponential is exactly linear") {
        std::vector<double> grid;
        for (double x = 0.0; x <= 30.0; x += 0.1) grid.push_back(x);
        auto curve = closed_form_tail("exponential", {{"mu", 1.0}}, grid);
        auto est = estimate_decay_slope(curve);
        CHECK(est.slope == Approx(-1.0).margin(1e-9));
        CHECK(est.stderr_ < 1e-9);
    }
    SECTION("erlang(2,1) on x in [20,60]: prefactor bends the slope above -1") {
        std::vector<double> grid;
        for (double x = 20.0; x <= 60.0; x += 0.1) grid.push_back(x);
        auto curve = closed_form_tail("erlang", {{"k", 2.0}, {"mu", 1.0}}, grid);
        auto est = estimate_decay_slope(curve);
        CHECK(est.slope > -1.05);
        CHECK(est.slope < -0.95);
        CHECK(est.slope > -1.0);  // (1+x) prefactor lifts the tail
    }
    SECTION("md1 simulation recovers the spectral decay rate") {
        auto samples = simulate_md1(0.5, 1000000, 42);
        auto curve = tail_curve_from_samples(samples);
        auto est = estimate_decay_slope(curve);  // default [0.90, 0.999] window
        CHECK(est.slope == Approx(-1.2564312086).margin(0.1));
    }
    SECTION("exponential ECDF, five seeds averaged") {
        double acc = 0.0;
        for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
            auto curve = tail_curve_from_samples(sample_exponential(1.0, 1000000, seed));
            acc += estimate_decay_slope(curve).slope;
        }
        acc /= 5.0;
        CHECK(acc > -1.1);
        CHECK(acc < -0.9);
    }
    SECTION("window too small") {
        std::vector<double> grid;
        for (double x = 0.0; x < 3.0; x += 0.1) grid.push_back(x);
        auto curve = closed_form_tail("exponential", {{"mu", 1.0}}, grid);
        CHECK_THROWS_AS(estimate_decay_slope(curve, SlopeWindow{0.98, 1.0}), TooFewPoints);
    }
}

TEST_CASE("tail curve invariants") {
    auto curve = tail_curve_from_samples(sample_exponential(1.0, 50000, 11));
    for (std::size_t i = 1; i < curve.x.size(); ++i) {
        CHECK(curve.x[i] > curve.x[i - 1]);
        CHECK(curve.log_tail[i] <= curve.log_tail[i - 1]);
    }
}

TEST_CASE("normalized_ratio") {
    // exponential: x^0 e^{x} e^{-x} = 1 for any x
    for (double x : {1.0, 10.0, 300.0})
        CHECK(normalized_ratio("exponential", {{"mu", 1.0}}, -1.0, 1, x) ==
              Approx(1.0).margin(1e-12));
    // erlang(2,1): x^{-1} e^{x} P(X>x) = (1+x)/x
    CHECK(normalized_ratio("erlang", {{"k", 2.0}, {"mu", 1.0}}, -1.0, 2, 50.0) ==
          Approx(51.0 / 50.0).margin(1e-10));
    // monotone decrease toward A_2 = 1
    double prev = 2.0;
    for (double x : {50.0, 200.0, 1000.0}) {
        double r = normalized_ratio("erlang", {{"k", 2.0}, {"mu", 1.0}}, -1.0, 2, x);
        CHECK(r < prev);
        CHECK(r > 1.0);
        prev = r;
    }
}

TEST_CASE("counterexample construction", "[counterexample]") {
    SECTION("exact step sequences") {
        auto m2 = build_counterexample(2, -1.0, 4);
        CHECK(m2.c == std::vector<std::uint64_t>{0, 1, 3, 11, 2059});
        auto m3 = build_counterexample(3, -1.0, 3);
        CHECK(m3.c == std::vector<std::uint64_t>{0, 1, 4, 85});
    }
    SECTION("overflow of the exact-integer budget") {
        CHECK_THROWS_AS(build_counterexample(2, -1.0, 5), Overflow);  // 2^2059
        CHECK_THROWS_AS(build_counterexample(3, -1.0, 4), Overflow);  // 3^85
        CHECK_THROWS_AS(build_counterexample(1, -1.0, 3), BadParam);
        CHECK_THROWS_AS(build_counterexample(2, 1.0, 3), BadParam);
    }
    SECTION("gamma steps and F* boundary value") {
        auto m = build_counterexample(2, -1.0, 4);
        CHECK(m.log_gamma(0.0) == 0.0);            // gamma(0) = h^0 = 1
        CHECK(m.log_tail(0.0) == 0.0);             // F*(0) = 1 - 1 = 0
        CHECK(m.log_gamma(0.5) == 0.0);            // constant until c_1
        CHECK(m.log_gamma(1.0) == Approx(-std::log(2.0)));
        CHECK(m.log_gamma(2.9999) == Approx(-std::log(2.0)));
        CHECK(m.log_gamma(3.0) == Approx(-3.0 * std::log(2.0)));
        CHECK(m.log_gamma(5000.0) == Approx(-2059.0 * std::log(2.0)));
    }
    SECTION("F* is non-decreasing through every step") {
        auto m = build_counterexample(2, -1.0, 4);
        CHECK(counterexample_monotonicity_violation(m) <= 0.0);
        auto m3 = build_counterexample(3, -0.25, 3);
        CHECK(counterexample_monotonicity_violation(m3) <= 0.0);
    }
}

TEST_CASE("counterexample oscillation subsequences", "[counterexample]") {
    auto model = build_counterexample(2, -1.0, 4);
    auto rep = counterexample_lim_points(model);
    double log2 = std::log(2.0);
    REQUIRE(rep.value_at_step.size() == 4);

    // value at each step point c_n is sigma0 - log h exactly
    for (double v : rep.value_at_step)
        CHECK(v == Approx(-1.0 - log2).margin(1e-12));

    // just before c_4 = 2059 the value is sigma0 - (c_3/c_4) log h
    CHECK(rep.x_before_next.back() == Approx(2059.0 * (1.0 - 1e-12)));
    CHECK(rep.value_before_next.back() == Approx(-1.0 - 11.0 / 2059.0 * log2).margin(1e-9));

    // the two subsequences separate by log h as n grows
    double gap = rep.value_before_next.back() - rep.value_at_step.back();
    CHECK(gap >= 0.99 * log2);
    CHECK(gap <= log2);

    // oscillation property at every n: the before-step subsequence stays at
    // sigma0 - (c_n/c_{n+1}) log h, approaching sigma0 itself
    for (std::size_t i = 0; i < rep.value_before_next.size(); ++i) {
        double frac = static_cast<double>(model.c[i]) / static_cast<double>(model.c[i + 1]);
        CHECK(rep.value_before_next[i] > -1.0 - frac * log2 - 1e-10);
    }

    // curve invariants: ascending x, non-increasing log tail
    for (std::size_t i = 1; i < rep.curve.x.size(); ++i) {
        CHECK(rep.curve.x[i] > rep.curve.x[i - 1]);
        CHECK(rep.curve.log_tail[i] <= rep.curve.log_tail[i - 1] + 1e-12);
    }
}
