#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature plus the half-line transforms
// used for the improper integrals in this project. Half-line integrals are
// mapped to [0,1) by v = u/(1-u); integrands must decay (exponentially or
// faster than 1/v^2) for the mapped form to stay integrable.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "tailspectra/common.hpp"

namespace tailspectra::quad {

namespace detail {

// QUADPACK dqk15 abscissae and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value = 0.0;
    double error = 0.0;
};

template <typename Fn>
PanelResult gk15(const Fn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double resg = kWg[3] * fc;
    double resk = kWgk[7] * fc;
    for (int i = 0; i < 7; ++i) {
        double x = h * kXgk[i];
        double fsum = f(c - x) + f(c + x);
        resk += kWgk[i] * fsum;
        if (i % 2 == 1) resg += kWg[i / 2] * fsum;
    }
    PanelResult r;
    r.value = resk * h;
    double diff = std::abs((resk - resg) * h);
    // QUADPACK-style sharpening of the raw K15-G7 difference.
    r.error = diff * std::min(1.0, std::pow(200.0 * diff / (std::abs(r.value) + 1e-300), 0.5));
    r.error = std::max(r.error, std::abs(r.value) * 1e-16);
    return r;
}

}  // namespace detail

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    std::size_t max_panels = 20000;
};

/// Adaptive integration of f over [a, b]: split the worst panel (by error
/// estimate, kept in a heap) until the summed estimate meets the tolerance.
/// Ends quietly at the panel cap -- evaluation noise can put the requested
/// tolerance below what the integrand supports, and the best estimate is
/// still the right answer to return.
template <typename Fn>
double integrate(const Fn& f, double a, double b, Options opt = {}) {
    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto first = detail::gk15(f, a, b);
    std::priority_queue<Panel> panels;
    panels.push({a, b, first.value, first.error});
    double total = first.value, toterr = first.error;
    std::size_t n_panels = 1;
    while (toterr > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        Panel p = panels.top();
        if (n_panels >= opt.max_panels || p.b - p.a < 1e-15 * (std::abs(p.a) + 1.0)) break;
        panels.pop();
        double mid = 0.5 * (p.a + p.b);
        auto left = detail::gk15(f, p.a, mid);
        auto right = detail::gk15(f, mid, p.b);
        total += left.value + right.value - p.value;
        toterr += left.error + right.error - p.error;
        panels.push({p.a, mid, left.value, left.error});
        panels.push({mid, p.b, right.value, right.error});
        ++n_panels;
    }
    return total;
}

/// Integral of f over [0, +inf) via v = u/(1-u). f must decay.
template <typename Fn>
double integrate_zero_to_inf(const Fn& f, Options opt = {}) {
    auto mapped = [&](double u) {
        double om = 1.0 - u;
        double v = u / om;
        double fv = f(v);
        if (fv == 0.0) return 0.0;
        return fv / (om * om);
    };
    return integrate(mapped, 0.0, 1.0, opt);
}

/// Integral of f over (-inf, 0] via v = -u/(1-u). f must decay as v -> -inf.
template <typename Fn>
double integrate_minus_inf_to_zero(const Fn& f, Options opt = {}) {
    auto mapped = [&](double u) {
        double om = 1.0 - u;
        double v = -u / om;
        double fv = f(v);
        if (fv == 0.0) return 0.0;
        return fv / (om * om);
    };
    return integrate(mapped, 0.0, 1.0, opt);
}

namespace detail {

// Asymptotic tails of oscillatory power-law integrals by repeated
// integration by parts; terms shrink by ~k/(aT) per level.
inline double tail_cos(double a, double T, int k, int depth = 12);

inline double tail_sin(double a, double T, int m, int depth = 12) {
    if (depth <= 0) return 0.0;
    return std::cos(a * T) / (a * std::pow(T, m)) -
           (m / a) * tail_cos(a, T, m + 1, depth - 1);
}

inline double tail_cos(double a, double T, int k, int depth) {
    if (depth <= 0) return 0.0;
    return -std::sin(a * T) / (a * std::pow(T, k)) +
           (k / a) * tail_sin(a, T, k + 1, depth - 1);
}

}  // namespace detail

/// int_T^inf cos(a t)/t^k dt for a > 0, T large enough that the by-parts
/// series converges (k/(aT) < 1).
inline double oscillatory_tail_cos(double a, double T, int k) {
    return detail::tail_cos(a, T, k);
}

}  // namespace tailspectra::quad
