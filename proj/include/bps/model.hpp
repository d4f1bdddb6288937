#pragma once

#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "bps/ppsim.hpp"
#include "bps/rng.hpp"

namespace bps {

// Target energy U(x) = -log gamma(x) together with the strategy used to draw
// bounce times along a ray. Immutable after construction; instances may be
// shared read-only across parallel replicas.
class EnergyModel {
  public:
    using EnergyFn = std::function<double(const Eigen::VectorXd&)>;
    using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
    // First arrival of the process with rate max(0, <grad U(x + v t), v>),
    // bounded by the horizon (relative to the ray start).
    using BounceSampler = std::function<std::optional<double>(
        const Eigen::VectorXd&, const Eigen::VectorXd&, RngStream&, double)>;

    EnergyModel(int dimension, EnergyFn energy, GradientFn gradient, BounceSampler bounce)
        : dimension_(dimension),
          energy_(std::move(energy)),
          gradient_(std::move(gradient)),
          bounce_(std::move(bounce)) {}

    int dimension() const { return dimension_; }
    double energy(const Eigen::VectorXd& x) const { return energy_(x); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return gradient_(x); }
    std::optional<double> bounce_time(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                      RngStream& rng, double horizon) const {
        return bounce_(x, v, rng, horizon);
    }

  private:
    int dimension_;
    EnergyFn energy_;
    GradientFn gradient_;
    BounceSampler bounce_;
};

// Generic strategy builders. Models with closed forms install their own
// samplers instead.

// Convex line search on the energy restricted to the ray.
EnergyModel::BounceSampler convex_bounce_sampler(EnergyModel::EnergyFn energy,
                                                 double tol = 1e-10);

// Thinning against envelopes supplied per ray: given (x, v) the factory
// returns an envelope provider valid for that ray.
using RayEnvelopeFactory = std::function<EnvelopeProvider(const Eigen::VectorXd&,
                                                          const Eigen::VectorXd&)>;
EnergyModel::BounceSampler thinning_bounce_sampler(EnergyModel::GradientFn gradient,
                                                   RayEnvelopeFactory envelope_factory,
                                                   EngineCounters* counters = nullptr);

}  // namespace bps
