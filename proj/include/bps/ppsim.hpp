#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "bps/rng.hpp"

namespace bps {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

// Violation test for dominating bounds: strict failure beyond floating-point
// rounding of the two sides (never used to clamp acceptance probabilities).
inline bool exceeds_bound(double rate, double bound) {
    return rate > bound + 1e-9 * (1.0 + std::abs(rate));
}

// Rate of a one-dimensional inhomogeneous Poisson process along the current
// ray, chi(t) = lambda(x + v t, v). Must be non-negative and finite on any
// bounded interval handed to an engine.
using IntensityAlongRay = std::function<double(double)>;

// Constant local-in-time upper bound: `bound` dominates the intensity on
// [s, s + validity) where s is the point the envelope was requested at.
struct IntensityEnvelope {
    double bound = 0.0;
    double validity = kInfiniteTime;
};

using EnvelopeProvider = std::function<IntensityEnvelope(double)>;

// First arrival of a superposed process: the minimum component time and which
// component produced it. `time` empty means no arrival before the horizon.
struct ArrivalResult {
    std::optional<double> time;
    int source_index = -1;
};

// Candidate/rejection bookkeeping for the thinning-based engines.
struct EngineCounters {
    std::uint64_t candidates = 0;
    std::uint64_t rejections = 0;
    std::uint64_t window_advances = 0;
};

// Time-scale transform: the first arrival is the quantile function of the
// cumulative intensity evaluated at an Exp(1) draw. The quantile returns
// empty when the total mass is exhausted before the target.
std::optional<double> first_arrival_inversion(
    const std::function<std::optional<double>(double)>& cumulative_intensity_inverse,
    double exp_draw);

// Numeric quantile of a nondecreasing cumulative with Xi(0) = 0, by doubling
// then bisection on [0, horizon]. Returns empty when Xi(horizon) < target.
std::function<std::optional<double>(double)> quantile_from_cumulative(
    std::function<double(double)> cumulative, double horizon, double tol = 1e-12);

// Line-search solver for strictly convex energies along the ray: locates the
// ray minimizer tau*, then finds tau >= tau* with
// U(x + v tau) - U(x + v tau*) = exp_draw to within `tol`.
std::optional<double> first_arrival_convex(const std::function<double(double)>& energy_on_ray,
                                           double exp_draw, double tol = 1e-10,
                                           double horizon = kInfiniteTime);

// Adaptive thinning against caller-supplied constant envelopes. Every
// envelope must dominate the intensity on its validity window; a violation
// detected at an acceptance test throws EnvelopeViolationError.
std::optional<double> first_arrival_thinning(const IntensityAlongRay& intensity,
                                             const EnvelopeProvider& envelope_provider,
                                             RngStream& rng, double horizon = kInfiniteTime,
                                             EngineCounters* counters = nullptr);

// Superposition: min over independent component first arrivals.
ArrivalResult first_arrival_superposition(
    const std::vector<std::function<std::optional<double>()>>& components);

// One additive piece of a decomposed intensity. `arrival_after(s, rng)` draws
// the component's first arrival strictly after s (absolute time on the ray).
struct SuperposedComponent {
    std::function<std::optional<double>(double, RngStream&)> arrival_after;
    std::function<double(double)> rate;
};

// Superposition of intensity pieces combined with thinning: candidates are
// minima of component arrivals, accepted with probability
// total_rate / sum of component rates.
std::optional<double> first_arrival_thinned_superposition(
    const std::vector<SuperposedComponent>& components,
    const std::function<double(double)>& total_rate, RngStream& rng,
    double horizon = kInfiniteTime, EngineCounters* counters = nullptr);

// Closed-form first arrival for the piecewise-linear rate max(0, a + b t).
// Empty when the total mass is below exp_draw.
std::optional<double> linear_rate_first_arrival(double a, double b, double exp_draw);

}  // namespace bps
