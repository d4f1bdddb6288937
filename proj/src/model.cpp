#include "bps/model.hpp"

#include <algorithm>
#include <cmath>

namespace bps {

EnergyModel::BounceSampler convex_bounce_sampler(EnergyModel::EnergyFn energy, double tol) {
    return [energy = std::move(energy), tol](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                             RngStream& rng,
                                             double horizon) -> std::optional<double> {
        const double exp_draw = -std::log(rng.uniform_open());
        auto along_ray = [&](double t) { return energy(x + t * v); };
        return first_arrival_convex(along_ray, exp_draw, tol, horizon);
    };
}

EnergyModel::BounceSampler thinning_bounce_sampler(EnergyModel::GradientFn gradient,
                                                   RayEnvelopeFactory envelope_factory,
                                                   EngineCounters* counters) {
    return [gradient = std::move(gradient), envelope_factory = std::move(envelope_factory),
            counters](const Eigen::VectorXd& x, const Eigen::VectorXd& v, RngStream& rng,
                      double horizon) -> std::optional<double> {
        auto rate = [&](double t) { return std::max(0.0, gradient(x + t * v).dot(v)); };
        return first_arrival_thinning(rate, envelope_factory(x, v), rng, horizon, counters);
    };
}

}  // namespace bps
