#include "bps/refresh.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bps {

Eigen::VectorXd partial_refresh_direction(const Eigen::VectorXd& v, double theta,
                                          RngStream& rng) {
    const double norm = v.norm();
    if (norm == 0.0) throw std::invalid_argument("partial refreshment needs a nonzero velocity");
    if (v.size() < 2)
        throw std::invalid_argument("partial refreshment needs dimension at least 2");
    const Eigen::VectorXd axis = v / norm;
    // Uniform direction in the hyperplane orthogonal to the axis.
    Eigen::VectorXd ortho;
    for (;;) {
        Eigen::VectorXd z = rng.normal_vector(static_cast<int>(v.size()));
        z -= z.dot(axis) * axis;
        const double z_norm = z.norm();
        if (z_norm > 1e-12) {
            ortho = z / z_norm;
            break;
        }
    }
    return std::cos(theta) * axis + std::sin(theta) * ortho;
}

Eigen::VectorXd refresh_velocity(const RefreshmentScheme& scheme, const Eigen::VectorXd& v,
                                 RngStream& rng) {
    const int d = static_cast<int>(v.size());
    switch (scheme.kind) {
        case RefreshKind::GlobalGaussian:
            return rng.normal_vector(d);
        case RefreshKind::RestrictedSphere:
            return rng.unit_sphere(d);
        case RefreshKind::RestrictedPartial: {
            const double theta = 2.0 * std::numbers::pi * rng.beta(scheme.alpha, scheme.beta);
            return partial_refresh_direction(v, theta, rng);
        }
        case RefreshKind::Local:
            throw std::logic_error("local refreshment is handled by the factor-graph samplers");
    }
    throw std::logic_error("unknown refreshment kind");
}

Eigen::VectorXd initial_velocity(const RefreshmentScheme& scheme, int dimension,
                                 RngStream& rng) {
    switch (scheme.kind) {
        case RefreshKind::RestrictedSphere:
        case RefreshKind::RestrictedPartial:
            return rng.unit_sphere(dimension);
        case RefreshKind::GlobalGaussian:
        case RefreshKind::Local:
            return rng.normal_vector(dimension);
    }
    throw std::logic_error("unknown refreshment kind");
}

}  // namespace bps
