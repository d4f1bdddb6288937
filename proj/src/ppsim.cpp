#include "bps/ppsim.hpp"

#include <cmath>
#include <stdexcept>

#include "bps/errors.hpp"

namespace bps {

namespace {

constexpr int kMaxIterations = 200;

// Golden-section minimizer for a convex function on [a, b].
double golden_min(const std::function<double(double)>& f, double a, double b,
                  double tol_width) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < kMaxIterations && (b - a) > tol_width; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

std::optional<double> first_arrival_inversion(
    const std::function<std::optional<double>(double)>& cumulative_intensity_inverse,
    double exp_draw) {
    return cumulative_intensity_inverse(exp_draw);
}

std::function<std::optional<double>(double)> quantile_from_cumulative(
    std::function<double(double)> cumulative, double horizon, double tol) {
    return [cumulative = std::move(cumulative), horizon, tol](double target)
               -> std::optional<double> {
        if (target <= 0.0) return 0.0;
        const double cap = std::min(horizon, 1e18);
        double lo = 0.0;
        double hi = std::min(1.0, cap);
        while (cumulative(hi) < target) {
            lo = hi;
            hi *= 2.0;
            if (hi >= cap) {
                hi = cap;
                if (cumulative(hi) < target) return std::nullopt;
                break;
            }
        }
        while (hi - lo > tol * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            if (cumulative(mid) >= target) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return hi;
    };
}

std::optional<double> first_arrival_convex(const std::function<double(double)>& energy_on_ray,
                                           double exp_draw, double tol, double horizon) {
    if (exp_draw < 0.0) throw std::invalid_argument("exp_draw must be non-negative");
    if (!(horizon > 0.0)) return std::nullopt;
    const double f0 = energy_on_ray(0.0);

    // Bracket the ray minimizer by doubling while the energy decreases, then
    // shrink with golden section.
    double bracket_lo = 0.0;
    double bracket_hi = std::min(1.0, horizon);
    {
        double fa = f0;
        double b = bracket_hi;
        double fb = energy_on_ray(b);
        if (fb < fa) {
            int doublings = 0;
            for (;;) {
                if (b >= horizon) break;
                const double c = std::min(2.0 * b, horizon);
                const double fc = energy_on_ray(c);
                if (++doublings > kMaxIterations)
                    throw NonConvexEnergyError("minimizer bracketing did not terminate");
                if (fc >= fb) {
                    bracket_hi = c;
                    break;
                }
                bracket_lo = b;
                b = c;
                fb = fc;
                bracket_hi = c;
            }
        }
    }
    const double tau_star =
        golden_min(energy_on_ray, bracket_lo, bracket_hi, 1e-10 * std::max(1.0, bracket_hi));
    const double energy_min = energy_on_ray(tau_star);

    if (exp_draw == 0.0) {
        if (tau_star >= horizon) return std::nullopt;
        return tau_star;
    }

    // Double the step until the energy increment exceeds the draw.
    double lo = tau_star;
    double hi;
    {
        double width = 1.0;
        int k = 0;
        for (;;) {
            hi = tau_star + width;
            bool capped = false;
            if (hi >= horizon) {
                hi = horizon;
                capped = true;
            }
            if (energy_on_ray(hi) - energy_min >= exp_draw) break;
            if (capped) return std::nullopt;
            lo = hi;
            width *= 2.0;
            if (++k > kMaxIterations)
                throw NonConvexEnergyError("energy increase never exceeded the draw");
        }
    }

    // Bisect on the energy increment.
    double mid = hi;
    for (int it = 0; it < kMaxIterations; ++it) {
        mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double increment = energy_on_ray(mid) - energy_min;
        if (increment >= exp_draw) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (std::abs(increment - exp_draw) <= tol &&
            (hi - lo) <= 1e-10 * std::max(1.0, hi)) {
            if (mid >= horizon) return std::nullopt;
            return mid;
        }
    }
    const double residual = std::abs(energy_on_ray(hi) - energy_min - exp_draw);
    if (residual <= 1e3 * tol || (hi - lo) <= 8.0 * std::numeric_limits<double>::epsilon() *
                                               std::max(1.0, hi)) {
        if (hi >= horizon) return std::nullopt;
        return hi;
    }
    throw NonConvexEnergyError("line search did not converge within the iteration cap");
}

std::optional<double> first_arrival_thinning(const IntensityAlongRay& intensity,
                                             const EnvelopeProvider& envelope_provider,
                                             RngStream& rng, double horizon,
                                             EngineCounters* counters) {
    EngineCounters scratch;
    EngineCounters& tally = counters ? *counters : scratch;
    double window_start = 0.0;
    while (window_start < horizon) {
        const IntensityEnvelope envelope = envelope_provider(window_start);
        if (!(envelope.bound >= 0.0) || !(envelope.validity > 0.0))
            throw std::invalid_argument("invalid intensity envelope");
        const double window_end = window_start + envelope.validity;
        const double candidate = window_start + rng.exponential(envelope.bound);
        if (candidate >= window_end) {
            // No candidate inside the validity window: advance, no acceptance test.
            window_start = window_end;
            ++tally.window_advances;
            continue;
        }
        if (candidate >= horizon) return std::nullopt;
        const double chi = intensity(candidate);
        if (exceeds_bound(chi, envelope.bound))
            throw EnvelopeViolationError("intensity exceeds its envelope at the acceptance test");
        ++tally.candidates;
        if (rng.uniform_open() * envelope.bound < chi) return candidate;
        ++tally.rejections;
        window_start = candidate;
    }
    return std::nullopt;
}

ArrivalResult first_arrival_superposition(
    const std::vector<std::function<std::optional<double>()>>& components) {
    if (components.empty()) throw std::invalid_argument("superposition needs components");
    ArrivalResult result;
    for (int j = 0; j < static_cast<int>(components.size()); ++j) {
        const auto arrival = components[j]();
        if (!arrival) continue;
        if (!result.time || *arrival < *result.time) {
            result.time = arrival;
            result.source_index = j;
        }
    }
    return result;
}

std::optional<double> first_arrival_thinned_superposition(
    const std::vector<SuperposedComponent>& components,
    const std::function<double(double)>& total_rate, RngStream& rng, double horizon,
    EngineCounters* counters) {
    if (components.empty()) throw std::invalid_argument("superposition needs components");
    EngineCounters scratch;
    EngineCounters& tally = counters ? *counters : scratch;
    double offset = 0.0;
    for (;;) {
        double candidate = kInfiniteTime;
        for (const auto& component : components) {
            const auto arrival = component.arrival_after(offset, rng);
            if (arrival && *arrival < candidate) candidate = *arrival;
        }
        if (candidate >= horizon) return std::nullopt;
        double envelope = 0.0;
        for (const auto& component : components) envelope += std::max(0.0, component.rate(candidate));
        const double chi = total_rate(candidate);
        if (exceeds_bound(chi, envelope))
            throw EnvelopeViolationError("summed component rates fail to dominate the intensity");
        ++tally.candidates;
        if (envelope > 0.0 && rng.uniform_open() * envelope < chi) return candidate;
        ++tally.rejections;
        offset = candidate;
    }
}

std::optional<double> linear_rate_first_arrival(double a, double b, double exp_draw) {
    if (!(exp_draw > 0.0)) throw std::invalid_argument("exp_draw must be positive");
    if (b == 0.0) {
        if (a <= 0.0) return std::nullopt;
        return exp_draw / a;
    }
    if (b > 0.0) {
        // Mass accumulates from t0 = max(0, -a/b) onwards.
        if (a > 0.0) {
            const double disc = a * a + 2.0 * b * exp_draw;
            return 2.0 * exp_draw / (a + std::sqrt(disc));
        }
        if (a == 0.0) return std::sqrt(2.0 * exp_draw / b);
        return (-a + std::sqrt(2.0 * b * exp_draw)) / b;
    }
    // b < 0: the rate vanishes at -a/b; total mass a^2 / (2|b|).
    if (a <= 0.0) return std::nullopt;
    const double mass = -a * a / (2.0 * b);
    if (exp_draw >= mass) return std::nullopt;
    const double disc = a * a + 2.0 * b * exp_draw;
    return 2.0 * exp_draw / (a + std::sqrt(disc));
}

}  // namespace bps
