#pragma once

#include <Eigen/Core>

#include "bps/rng.hpp"

namespace bps {

enum class RefreshKind {
    GlobalGaussian,    // fresh standard normal vector
    RestrictedSphere,  // uniform on the unit sphere
    RestrictedPartial, // unit vector at angle 2*pi*Beta(alpha, beta) from v
    Local,             // one factor's block resampled; factor-graph samplers only
};

struct RefreshmentScheme {
    RefreshKind kind = RefreshKind::GlobalGaussian;
    double rate = 1.0;
    // Restricted partial refreshment angle parameters; alpha = 1, beta = 4
    // favors small angles.
    double alpha = 1.0;
    double beta = 4.0;
};

// Resample the velocity according to the scheme. Restricted variants always
// return unit-norm vectors.
Eigen::VectorXd refresh_velocity(const RefreshmentScheme& scheme, const Eigen::VectorXd& v,
                                 RngStream& rng);

// Unit vector at angle `theta` from v/||v||, uniform over that cone section.
Eigen::VectorXd partial_refresh_direction(const Eigen::VectorXd& v, double theta,
                                          RngStream& rng);

// Draw from the scheme's stationary velocity law (used for default initial
// velocities).
Eigen::VectorXd initial_velocity(const RefreshmentScheme& scheme, int dimension,
                                 RngStream& rng);

}  // namespace bps
