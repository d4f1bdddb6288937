#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bps/model.hpp"
#include "bps/ppsim.hpp"

namespace bps {

// Isotropic Gaussian energy U(x) = scale * ||x||^2, so each coordinate has
// target variance 1 / (2 scale). scale = 1 matches the convention used by the
// reducibility experiments; scale = 1/2 gives a standard normal target.
//
// Closed-form bounce time along (x, v) for a uniform draw V, branching on the
// sign of <x, v>. Consumes no randomness itself so callers can instrument the
// draws.
double iso_gaussian_bounce_time(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                double uniform_draw, double scale = 1.0);

enum class BounceStrategy { Inversion, Convex, Thinning, Superposition };

EnergyModel make_isotropic_gaussian(int dimension, double scale = 1.0,
                                    BounceStrategy strategy = BounceStrategy::Inversion,
                                    EngineCounters* counters = nullptr);

// U(x) = x' P x / 2 for a symmetric positive definite precision P, with exact
// bounce times from the linear-rate closed form. Positive definiteness is
// checked by attempted factorization.
EnergyModel make_quadratic_form(const Eigen::SparseMatrix<double>& precision);

}  // namespace bps
