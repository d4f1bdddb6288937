#pragma once

#include <vector>

#include <Eigen/Core>

#include "bps/local_bps.hpp"
#include "bps/trajectory.hpp"

namespace bps {

// Time-average estimate with a batch-means standard error.
struct PathEstimate {
    double value = 0.0;
    double horizon = 0.0;
    double standard_error = 0.0;
};

// Exact path integral of x_k^p over the trajectory, divided by the horizon.
// Order 1 uses the per-segment formula x τ + v τ²/2; order 2 the cubic
// x² τ + x v τ² + v² τ³/3.
PathEstimate path_integral_moment(const Trajectory& trajectory, int coordinate, int order,
                                  int batches = 50);
PathEstimate path_integral_moment(const CoordinateEventList& events, double horizon,
                                  int order, int batches = 50);

// Samples x(l δ) for l = 0..L-1 with L = 1 + floor(T/δ); one row per sample.
Eigen::MatrixXd discretize(const Trajectory& trajectory, double mesh);
Eigen::MatrixXd discretize(const LocalTrajectory& trajectory, double mesh);

struct EssResult {
    double ess = 0.0;
    bool degenerate = false;  // constant input; ess reported as N
};

// Batch-means effective sample size with batches of size floor(sqrt(N)).
EssResult effective_sample_size(const std::vector<double>& samples);

}  // namespace bps
