#pragma once

// Shared basics: error taxonomy, exact-integer sin(pi x), and a small
// deterministic parallel-for used by the grid checks and samplers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tailspectra {

using Complex = std::complex<double>;
using ParamMap = std::map<std::string, double>;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation landed on (or too near) a pole of the transform.
struct PoleHit : Error { using Error::Error; };
struct BadParam : Error { using Error::Error; };
struct NoBracket : Error { using Error::Error; };
// Numerator vanishes where the denominator does: removable point, not a pole.
struct Cancellation : Error { using Error::Error; };
struct AmbiguousOrder : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct ContourThroughPole : Error { using Error::Error; };
struct PoleOfQ : Error { using Error::Error; };
struct MethodDisagreement : Error { using Error::Error; };
struct NotFound : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct Overflow : Error { using Error::Error; };
struct NotAPole : Error { using Error::Error; };
struct StripContaminated : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Trig with exact integer argument reduction
// ---------------------------------------------------------------------------

/// sin(pi*x) with the reduction x -> x - round(x) done in exact double
/// arithmetic, so values at and near integers do not lose precision.
inline double sinpi(double x) {
    double n = std::round(x);
    double r = x - n;  // exact for |x| < 2^52
    double s = std::sin(kPi * r);
    return (std::fmod(std::abs(n), 2.0) == 1.0) ? -s : s;
}

/// sin(pi*x)/(pi*x), continuous through x = 0.
inline double sincpi(double x) {
    double px = kPi * x;
    if (std::abs(px) < 1e-8) return 1.0 - px * px / 6.0;
    return sinpi(x) / px;
}

// ---------------------------------------------------------------------------
// Deterministic parallelism
// ---------------------------------------------------------------------------

/// Worker cap: min(hardware, TAILSPECTRA_THREADS if set).
inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TAILSPECTRA_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return hw;
}

/// Runs fn(chunk) for chunk = 0..n_chunks-1. Chunk decomposition is fixed by
/// the caller, so results are identical for any worker count; only scheduling
/// varies. fn must write results into per-chunk slots, not shared state.
template <typename Fn>
void parallel_for_chunks(std::size_t n_chunks, Fn&& fn) {
    unsigned workers = std::min<std::size_t>(worker_count(), n_chunks);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_chunks; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n_chunks) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

// 64-bit FNV-1a, used for deterministic report file names.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace tailspectra
