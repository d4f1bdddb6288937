#include "bps/sampler.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bps/errors.hpp"

namespace bps {

double bounce_intensity(const EnergyModel& model, const PhaseState& state) {
    return std::max(0.0, model.gradient(state.position).dot(state.velocity));
}

Eigen::VectorXd reflect(const Eigen::VectorXd& gradient, const Eigen::VectorXd& v) {
    const double grad_sq = gradient.squaredNorm();
    if (grad_sq == 0.0) throw DegenerateBounceError("reflection against a zero gradient");
    return v - (2.0 * gradient.dot(v) / grad_sq) * gradient;
}

Trajectory simulate(const EnergyModel& model, const RefreshmentScheme& scheme,
                    PhaseState initial, double horizon, RngStream& rng,
                    const SimulateOptions& options) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (initial.position.size() != model.dimension() ||
        initial.velocity.size() != model.dimension())
        throw std::invalid_argument("state dimension does not match the model");

    const auto wall_start = std::chrono::steady_clock::now();
    std::vector<TrajectorySegment> segments;
    Eigen::VectorXd x = std::move(initial.position);
    Eigen::VectorXd v = std::move(initial.velocity);
    double clock = 0.0;
    // Reference norm for the no-renormalization drift check; reset on refresh.
    double reference_norm = v.norm();
    std::uint64_t events = 0;

    while (clock < horizon) {
        const double remaining = horizon - clock;
        const auto tau_bounce = model.bounce_time(x, v, rng, remaining);
        const double tau_ref = rng.exponential(scheme.rate);
        // Ties are resolved as refreshment.
        const bool bounce = tau_bounce && *tau_bounce < tau_ref;
        const double tau = bounce ? *tau_bounce : tau_ref;

        if (!(tau < remaining)) {
            segments.push_back({clock, remaining, {x, v}, EventKind::Horizon});
            clock = horizon;
            break;
        }
        segments.push_back({clock, tau, {x, v}, bounce ? EventKind::Bounce : EventKind::Refresh});
        x += tau * v;
        clock += tau;
        if (bounce) {
            v = reflect(model.gradient(x), v);
            const double norm = v.norm();
            if (std::abs(norm - reference_norm) > 1e-9 * std::max(1.0, reference_norm))
                throw std::runtime_error("velocity norm drifted past 1e-9 across bounces");
        } else {
            v = refresh_velocity(scheme, v, rng);
            reference_norm = v.norm();
        }
        if (++events >= options.max_events)
            throw std::runtime_error("event cap exceeded before the horizon");
        if ((events & 1023) == 0 && std::isfinite(options.wall_clock_cap_seconds)) {
            const std::chrono::duration<double> elapsed =
                std::chrono::steady_clock::now() - wall_start;
            if (elapsed.count() > options.wall_clock_cap_seconds)
                throw std::runtime_error("wall clock cap exceeded before the horizon");
        }
    }
    return Trajectory(std::move(segments), horizon);
}

}  // namespace bps
