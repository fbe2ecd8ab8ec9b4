#pragma once

// Spectral pass over a transform: locate the abscissa of convergence sigma0,
// classify the pole there (order, Laurent coefficients) by contour
// integration, certify analyticity of a finite strip segment around sigma0,
// and map poles over a rectangle by argument-principle subdivision.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tailspectra/common.hpp"
#include "tailspectra/transform.hpp"

namespace tailspectra {

struct PoleInfo {
    double sigma0 = 0.0;
    int order = 0;                 // D
    std::vector<double> laurent;   // A_1..A_D
    double strip_halfwidth = 0.0;  // Lambda = -2*sigma0*lambda
    int extra_poles_in_strip = -1;
    double contour_radius = 0.0;
    int quadrature_nodes = 0;
};

struct PoleList {
    Complex corner_lo;  // bottom-left
    Complex corner_hi;  // top-right
    struct Entry {
        Complex location;
        int order;
    };
    std::vector<Entry> poles;
    int net_count = 0;  // argument-principle total over the rectangle
};

namespace detail {

inline double real_den(const TransformSpec& spec, double x) {
    return spec.den(Complex(x, 0.0)).real();
}

/// Zeros of the real denominator on [a, b]: sign changes refined by
/// bisection, plus dips of |den| below 1e-8 (even-multiplicity zeros)
/// refined by a local search.
inline std::vector<double> scan_real_denominator_zeros(const TransformSpec& spec, double a,
                                                       double b, int samples = 400) {
    std::vector<double> zeros;
    if (!(b > a)) return zeros;
    double step = (b - a) / samples;
    double xp = a, fp = real_den(spec, a);
    for (int i = 1; i <= samples; ++i) {
        double x = a + i * step;
        double f = real_den(spec, x);
        if (fp == 0.0) zeros.push_back(xp);
        else if (f * fp < 0.0) {
            double lo = xp, hi = x, flo = fp;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double fm = real_den(spec, mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if (fm * flo < 0.0) hi = mid;
                else { lo = mid; flo = fm; }
            }
            zeros.push_back(0.5 * (lo + hi));
        } else if (i >= 2 && std::abs(fp) < 1e-8) {
            // interior dip: previous sample is a local minimum of |den|
            double fpp = real_den(spec, xp - step);
            if (std::abs(fp) <= std::abs(fpp) && std::abs(fp) <= std::abs(f)) {
                double lo = xp - step, hi = x;
                for (int it = 0; it < 60; ++it) {
                    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    if (std::abs(real_den(spec, m1)) < std::abs(real_den(spec, m2))) hi = m2;
                    else lo = m1;
                }
                double z = 0.5 * (lo + hi);
                if (std::abs(real_den(spec, z)) < 1e-8) zeros.push_back(z);
            }
        }
        xp = x;
        fp = f;
    }
    return zeros;
}

/// Contour radius for the pole at sigma0: 0.4x the distance to the nearest
/// other real denominator zero found by a coarse scan, capped at 0.5.
inline double choose_contour_radius(const TransformSpec& spec, double sigma0) {
    double lo = sigma0 - 6.0;
    double hi = std::min(0.0, sigma0 + 6.0);
    double dist = std::numeric_limits<double>::infinity();
    for (double z : scan_real_denominator_zeros(spec, lo, hi, 600)) {
        double d = std::abs(z - sigma0);
        if (d > 1e-6 && d < dist) dist = d;
    }
    double eps = 0.5;
    if (std::isfinite(dist)) eps = std::min(eps, 0.4 * dist);
    return eps;
}

/// Winding number of f along the closed polyline `loop` by unwrapped phase
/// increments. A segment is accepted once the image stays near its chord:
/// |f(mid) - (f(a)+f(b))/2| <= 0.25 min|f|. A near-chord arc cannot wind
/// further than a straight segment (less than pi), so summing the two
/// principal half-steps is then exact; everything else is refined. Phase
/// turns can therefore not alias between samples, whatever the zero
/// multiplicity. Returns the (near-integer) count of enclosed zeros of the
/// analytic function f.
inline int cycle_zero_count(const std::function<Complex(Complex)>& f,
                            const std::vector<Complex>& loop) {
    long evals = 0;
    auto value = [&](Complex s) {
        ++evals;
        Complex v = f(s);
        if (!(std::abs(v) > 1e-300))
            throw ContourThroughPole("contour passes through a zero of the integrand");
        return v;
    };
    double total = 0.0;
    std::function<void(Complex, Complex, Complex, Complex, int)> walk =
        [&](Complex a, Complex b, Complex fa, Complex fb, int depth) {
            Complex m = 0.5 * (a + b);
            Complex fm = value(m);
            double chord_err = std::abs(fm - 0.5 * (fa + fb));
            double scale = std::min({std::abs(fa), std::abs(fb), std::abs(fm)});
            if (chord_err <= 0.25 * scale) {
                total += std::arg(fm / fa) + std::arg(fb / fm);
                return;
            }
            if (depth > 48 || evals > 2000000)
                throw ContourThroughPole("cannot resolve phase along contour (zero on or near boundary)");
            walk(a, m, fa, fm, depth + 1);
            walk(m, b, fm, fb, depth + 1);
        };
    std::vector<Complex> fs(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) fs[i] = value(loop[i]);
    for (std::size_t i = 0; i < loop.size(); ++i) {
        std::size_t j = (i + 1) % loop.size();
        walk(loop[i], loop[j], fs[i], fs[j], 0);
    }
    double w = total / (2.0 * kPi);
    double r = std::round(w);
    if (std::abs(w - r) > 0.1)
        throw NotConverged("winding number did not settle near an integer");
    return static_cast<int>(r);
}

inline std::vector<Complex> rect_loop(Complex lo, Complex hi, int per_side = 16) {
    std::vector<Complex> loop;
    double x0 = lo.real(), y0 = lo.imag(), x1 = hi.real(), y1 = hi.imag();
    for (int i = 0; i < per_side; ++i)
        loop.emplace_back(x0 + (x1 - x0) * i / per_side, y0);
    for (int i = 0; i < per_side; ++i)
        loop.emplace_back(x1, y0 + (y1 - y0) * i / per_side);
    for (int i = 0; i < per_side; ++i)
        loop.emplace_back(x1 - (x1 - x0) * i / per_side, y1);
    for (int i = 0; i < per_side; ++i)
        loop.emplace_back(x0, y1 - (y1 - y0) * i / per_side);
    return loop;
}

inline std::vector<Complex> circle_loop(Complex center, double radius, int n = 64) {
    std::vector<Complex> loop;
    loop.reserve(n);
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * kPi * i / n;
        loop.push_back(center + radius * Complex(std::cos(th), std::sin(th)));
    }
    return loop;
}

/// Net pole count (denominator zeros minus numerator zeros, with
/// multiplicity) inside the closed polyline.
inline int net_pole_count(const TransformSpec& spec, const std::vector<Complex>& loop) {
    int zden = cycle_zero_count([&](Complex s) { return spec.den(s); }, loop);
    int znum = cycle_zero_count([&](Complex s) { return spec.num(s); }, loop);
    return zden - znum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Abscissa of convergence
// ---------------------------------------------------------------------------

/// Real root sigma0 of the denominator, from the spec's bracket (bisection
/// then Newton) or from known_sigma0. Verifies the numerator does not vanish
/// there; a vanishing numerator means a removable point, not a pole.
inline double find_abscissa(const TransformSpec& spec) {
    auto den = [&](double x) { return detail::real_den(spec, x); };
    double root;
    if (spec.known_sigma0) {
        root = *spec.known_sigma0;
    } else {
        double a = spec.search_bracket.first, b = spec.search_bracket.second;
        if (!(b > a)) throw NoBracket("search bracket is empty");
        const int kScan = 128;
        double lo = a, hi = b, flo = den(a);
        bool found = (flo == 0.0);
        if (found) hi = lo;
        for (int i = 1; i <= kScan && !found; ++i) {
            double x = a + (b - a) * i / kScan;
            double f = den(x);
            if (f == 0.0) { lo = hi = x; found = true; break; }
            if (f * flo < 0.0) { hi = x; found = true; break; }
            lo = x;
            flo = f;
        }
        if (!found)
            throw NoBracket("denominator has no sign change inside the search bracket");
        for (int it = 0; it < 100 && hi > lo; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = den(mid);
            if (fm == 0.0) { lo = hi = mid; break; }
            if (fm * flo < 0.0) hi = mid;
            else { lo = mid; flo = fm; }
        }
        root = 0.5 * (lo + hi);
    }
    // Newton polish with a central-difference derivative.
    for (int it = 0; it < 12; ++it) {
        double f = den(root);
        if (std::abs(f) < 1e-15) break;
        double h = 1e-7 * (1.0 + std::abs(root));
        double d = (den(root + h) - den(root - h)) / (2.0 * h);
        if (d == 0.0) break;
        double next = root - f / d;
        if (!std::isfinite(next)) break;
        if (std::abs(den(next)) >= std::abs(f)) break;
        root = next;
    }
    if (std::abs(den(root)) > 1e-12)
        throw NotConverged("abscissa refinement left |denominator| above 1e-12");
    if (std::abs(spec.num(Complex(root, 0.0))) < 1e-10)
        throw Cancellation("numerator vanishes at the candidate abscissa (removable point)");
    return root;
}

// ---------------------------------------------------------------------------
// Pole order by trapezoid quadrature of phi'/phi on a circle
// ---------------------------------------------------------------------------

namespace detail {

/// One trapezoid pass of (1/2*pi*i) contour-integral of phi'/phi on
/// |s - c| = eps with N nodes; phi' by central differences, step 1e-6*eps.
inline Complex winding_trapezoid(const TransformSpec& spec, Complex c, double eps, int n) {
    const double h = 1e-6 * eps;
    auto phi = [&](Complex s) {
        Complex d = spec.den(s);
        if (std::abs(d) < kPoleGuard)
            throw ContourThroughPole("winding contour hits a denominator zero");
        return spec.num(s) / d;
    };
    Complex acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        double th = 2.0 * kPi * j / n;
        Complex e(std::cos(th), std::sin(th));
        Complex s = c + eps * e;
        Complex dphi = (phi(s + h) - phi(s - h)) / (2.0 * h);
        acc += dphi / phi(s) * (eps * e);
    }
    return acc / static_cast<double>(n);
}

}  // namespace detail

/// Order D of the pole at sigma0: D = -round(winding number of phi) on the
/// auto-chosen circle. Doubles the node count until two passes agree, shrinks
/// the contour on contamination, and rejects residuals >= 0.1.
inline int pole_order(const TransformSpec& spec, double sigma0) {
    double eps = detail::choose_contour_radius(spec, sigma0);
    Complex c(sigma0, 0.0);
    for (int shrink = 0; shrink < 4; ++shrink, eps *= 0.5) {
        try {
            Complex w = detail::winding_trapezoid(spec, c, eps, 256);
            for (int n = 512; n <= 8192; n *= 2) {
                Complex w2 = detail::winding_trapezoid(spec, c, eps, n);
                if (std::abs(w2 - w) < 5e-3) { w = w2; break; }
                w = w2;
            }
            double d = -std::round(w.real());
            if (std::abs(w + d) < 0.1 && d >= 1.0)
                return static_cast<int>(d);
        } catch (const ContourThroughPole&) {
            // fall through to a smaller contour
        }
    }
    throw AmbiguousOrder("winding residual >= 0.1: contour too large or nearby singularity");
}

// ---------------------------------------------------------------------------
// Laurent coefficients by trapezoid contour integrals
// ---------------------------------------------------------------------------

/// A_j = (1/2*pi*i) contour-integral of phi(s) (s-sigma0)^{j-1} ds on
/// |s - sigma0| = eps, j = 1..order, at a fixed radius.
inline std::vector<double> laurent_at_radius(const TransformSpec& spec, double sigma0, int order,
                                             double eps) {
    Complex c(sigma0, 0.0);
    auto phi = [&](Complex s) {
        Complex d = spec.den(s);
        if (std::abs(d) < kPoleGuard)
            throw ContourThroughPole("Laurent contour hits a denominator zero");
        return spec.num(s) / d;
    };
    auto pass = [&](int n) {
        std::vector<Complex> a(order, Complex(0.0, 0.0));
        for (int m = 0; m < n; ++m) {
            double th = 2.0 * kPi * m / n;
            Complex e(std::cos(th), std::sin(th));
            Complex v = phi(c + eps * e);
            Complex ring(1.0, 0.0);
            for (int j = 1; j <= order; ++j) {
                ring *= eps * e;
                a[j - 1] += v * ring;
            }
        }
        for (auto& x : a) x /= static_cast<double>(n);
        return a;
    };
    std::vector<Complex> prev = pass(256);
    std::vector<Complex> cur;
    bool converged = false;
    for (int n = 512; n <= 8192; n *= 2) {
        cur = pass(n);
        double worst = 0.0;
        double scale = 0.0;
        for (int j = 0; j < order; ++j) scale = std::max(scale, std::abs(cur[j]));
        for (int j = 0; j < order; ++j)
            worst = std::max(worst, std::abs(cur[j] - prev[j]) / (scale + 1e-300));
        prev = cur;
        if (worst < 1e-8) { converged = true; break; }
    }
    if (!converged)
        throw NotConverged("Laurent coefficients kept changing under node doubling");
    double scale = 0.0;
    for (auto& x : prev) scale = std::max(scale, std::abs(x));
    std::vector<double> out(order);
    for (int j = 0; j < order; ++j) {
        if (std::abs(prev[j].imag()) > 1e-8 * (scale + 1e-300))
            throw NotConverged("Laurent coefficient has a non-negligible imaginary part");
        out[j] = prev[j].real();
    }
    if (std::abs(out[order - 1]) <= 1e-10 * (scale + 1e-300))
        throw AmbiguousOrder("top Laurent coefficient vanishes; pole order is inconsistent");
    return out;
}

inline std::vector<double> laurent_coefficients(const TransformSpec& spec, double sigma0,
                                                int order) {
    double eps = detail::choose_contour_radius(spec, sigma0);
    return laurent_at_radius(spec, sigma0, order, eps);
}

/// Winding of phi minus its extracted principal part on |s-sigma0| = eps.
/// Zero certifies that the coefficients captured all pole content. When the
/// remainder is numerically null on the contour (phi exactly equals its
/// principal part, as for the rational catalog entries), the answer is 0 by
/// convention.
inline int principal_part_winding(const TransformSpec& spec, double sigma0,
                                  const std::vector<double>& laurent, double eps) {
    Complex c(sigma0, 0.0);
    auto phi = [&](Complex s) { return spec.num(s) / spec.den(s); };
    auto rem = [&](Complex s) {
        Complex p(0.0, 0.0);
        Complex pw(1.0, 0.0);
        for (std::size_t j = 0; j < laurent.size(); ++j) {
            pw /= (s - c);
            p += laurent[j] * pw;
        }
        return phi(s) - p;
    };
    auto loop = detail::circle_loop(c, eps, 128);
    double max_rem = 0.0, max_phi = 0.0;
    for (Complex s : loop) {
        max_rem = std::max(max_rem, std::abs(rem(s)));
        max_phi = std::max(max_phi, std::abs(phi(s)));
    }
    if (max_rem < 1e-10 * max_phi) return 0;
    return detail::cycle_zero_count(rem, loop);
}

// ---------------------------------------------------------------------------
// Strip-analyticity certificate
// ---------------------------------------------------------------------------

/// Counts poles of phi other than sigma0's inside the thin rectangle
/// [sigma0-delta, sigma0+delta] x [2*sigma0*lambda, -2*sigma0*lambda],
/// delta = eps/2. Returns 0 when the strip-segment hypothesis holds.
/// Boundaries that land on a pole are retried with deterministic jitter.
inline int verify_strip_analyticity(const TransformSpec& spec, double sigma0, double lambda) {
    if (!(lambda > 0)) throw BadParam("verify_strip_analyticity: lambda must be positive");
    double eps = detail::choose_contour_radius(spec, sigma0);
    double delta = 0.5 * eps;
    double half = -2.0 * sigma0 * lambda;
    if (!(half > 0)) throw BadParam("verify_strip_analyticity: sigma0 must be negative");
    for (int attempt = 0; attempt < 5; ++attempt) {
        double f = 1.0 + 3.7e-4 * attempt * (attempt + 1);
        double d = delta * f, h = half * f;
        try {
            Complex lo(sigma0 - d, -h), hi(sigma0 + d, h);
            int per_side = std::max<int>(16, static_cast<int>(4.0 * h / d));
            int net_rect = detail::net_pole_count(spec, detail::rect_loop(lo, hi, per_side));
            double inner = std::min({eps, 0.9 * d, 0.9 * h});
            int net_inner =
                detail::net_pole_count(spec, detail::circle_loop(Complex(sigma0, 0.0), inner, 64));
            return std::max(0, net_rect - net_inner);
        } catch (const ContourThroughPole&) {
            if (attempt == 4) throw;
        }
    }
    throw ContourThroughPole("strip boundary kept hitting poles after 5 jittered retries");
}

// ---------------------------------------------------------------------------
// Pole map over a rectangle
// ---------------------------------------------------------------------------

namespace detail {

inline Complex newton_polish(const TransformSpec& spec, Complex s0, double cell) {
    Complex s = s0;
    Complex best = s0;
    double bestval = std::abs(spec.den(s0));
    for (int it = 0; it < 60; ++it) {
        double h = std::max(1e-9, 1e-7 * cell) * (1.0 + std::abs(s));
        Complex f = spec.den(s);
        Complex d = (spec.den(s + h) - spec.den(s - h)) / (2.0 * h);
        if (std::abs(d) == 0.0) break;
        Complex next = s - f / d;
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
        if (std::abs(next - s0) > 4.0 * cell) break;  // left the basin
        s = next;
        double v = std::abs(spec.den(s));
        if (v < bestval) { bestval = v; best = s; }
        if (v == 0.0) break;
    }
    return best;
}

inline void subdivide_poles(const TransformSpec& spec, Complex lo, Complex hi, int count,
                            std::vector<PoleList::Entry>& out, int depth) {
    if (count == 0) return;
    double w = hi.real() - lo.real(), h = hi.imag() - lo.imag();
    if (std::max(w, h) < 1e-6 || depth > 64) {
        Complex center = 0.5 * (lo + hi);
        out.push_back({newton_polish(spec, center, std::max(w, h)), count});
        return;
    }
    static const double kJitter[] = {0.0, 7.1e-3, -1.3e-2, 2.9e-2, -6.1e-2};
    for (double jit : kJitter) {
        double cx = lo.real() + (0.5 + jit) * w;
        double cy = lo.imag() + (0.5 + jit) * h;
        try {
            Complex cells[4][2] = {
                {lo, Complex(cx, cy)},
                {Complex(cx, lo.imag()), Complex(hi.real(), cy)},
                {Complex(lo.real(), cy), Complex(cx, hi.imag())},
                {Complex(cx, cy), hi},
            };
            int counts[4];
            int total = 0;
            for (int i = 0; i < 4; ++i) {
                counts[i] = net_pole_count(spec, rect_loop(cells[i][0], cells[i][1]));
                total += counts[i];
            }
            if (total != count)
                throw ContourThroughPole("child counts disagree with parent");
            for (int i = 0; i < 4; ++i)
                subdivide_poles(spec, cells[i][0], cells[i][1], counts[i], out, depth + 1);
            return;
        } catch (const ContourThroughPole&) {
            // try the next split offset
        }
    }
    throw NotConverged("pole subdivision could not find a clean split");
}

}  // namespace detail

/// All poles of phi in the rectangle [lo, hi] (net of numerator zeros) by
/// recursive quadrisection of argument-principle counts, Newton-polished and
/// sorted by real part descending.
inline PoleList locate_poles_rect(const TransformSpec& spec, Complex lo, Complex hi) {
    if (!(hi.real() > lo.real()) || !(hi.imag() > lo.imag()))
        throw BadParam("locate_poles_rect: rectangle corners are not ordered");
    PoleList list;
    for (int attempt = 0; attempt < 5; ++attempt) {
        double f = 3.1e-4 * attempt * (attempt + 1);
        Complex grow(f * (hi.real() - lo.real()), f * (hi.imag() - lo.imag()));
        Complex a = lo - grow, b = hi + grow;
        try {
            double aspect = (b.imag() - a.imag()) / (b.real() - a.real());
            int per_side = std::max<int>(64, static_cast<int>(32 * std::max(aspect, 1.0 / aspect)));
            int net = detail::net_pole_count(spec, detail::rect_loop(a, b, per_side));
            std::vector<PoleList::Entry> found;
            detail::subdivide_poles(spec, a, b, net, found, 0);
            std::sort(found.begin(), found.end(), [](const auto& p, const auto& q) {
                if (p.location.real() != q.location.real())
                    return p.location.real() > q.location.real();
                double pa = std::abs(p.location.imag()), qa = std::abs(q.location.imag());
                if (pa != qa) return pa < qa;
                return p.location.imag() < q.location.imag();
            });
            list.corner_lo = a;
            list.corner_hi = b;
            list.net_count = net;
            list.poles = std::move(found);
            return list;
        } catch (const ContourThroughPole&) {
            if (attempt == 4) throw;
        }
    }
    return list;  // unreachable
}

}  // namespace tailspectra
