#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>

#include "bps/model.hpp"
#include "bps/refresh.hpp"
#include "bps/rng.hpp"
#include "bps/trajectory.hpp"

namespace bps {

// Bounce rate lambda(x, v) = max(0, <grad U(x), v>).
double bounce_intensity(const EnergyModel& model, const PhaseState& state);

// Elastic reflection of v against the hyperplane orthogonal to the gradient,
// computed in O(d). Throws DegenerateBounceError on a zero gradient.
Eigen::VectorXd reflect(const Eigen::VectorXd& gradient, const Eigen::VectorXd& v);

// Guards against runaway runs in addition to the time horizon.
struct SimulateOptions {
    std::uint64_t max_events = 100'000'000ULL;
    double wall_clock_cap_seconds = std::numeric_limits<double>::infinity();
};

// Global bouncy particle sampler: piecewise-linear dynamics where each event
// is the minimum of the model's bounce clock and an Exp(rate) refreshment
// clock. Returns the connected trajectory over [0, horizon].
Trajectory simulate(const EnergyModel& model, const RefreshmentScheme& scheme,
                    PhaseState initial, double horizon, RngStream& rng,
                    const SimulateOptions& options = {});

}  // namespace bps
