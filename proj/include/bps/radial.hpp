#pragma once

#include <vector>

#include "bps/rng.hpp"

namespace bps {

// Lumped isotropic-Gaussian state: radius r = ||x|| and radial velocity
// cosine m = <x, v>/||x|| for unit-speed velocities.
struct RadialState {
    double r = 0.0;
    double m = 0.0;
};

// Deterministic flow between jumps in closed form.
RadialState radial_flow(const RadialState& from, double elapsed);

struct RadialJump {
    double time = 0.0;
    RadialState state;  // state right after the flip
};

struct RadialTrajectory {
    RadialState initial;
    double horizon = 0.0;
    std::vector<RadialJump> jumps;

    RadialState state_at(double t) const;
};

// Integrates the lumped dynamics with jumps m -> -m at rate max(0, r m),
// simulated by thinning against the windowed bound r(s) + window.
RadialTrajectory radial_simulate(const RadialState& initial, double horizon, RngStream& rng);

// Unnormalized invariant density f_k(r, m) proportional to
// chi_k(sqrt(2) r) (1 - m^2)^((k-3)/2); +infinity at the k = 2 edge
// singularity.
double invariant_family_density(int k, double r, double m);

// Cell-centered grid over [0, r_max] x [-1, 1] with numerically normalized
// axis marginals (the density factorizes); supports inverse-CDF sampling.
class InvariantFamilyGrid {
  public:
    InvariantFamilyGrid(int k, int r_cells = 2000, int m_cells = 2000, double r_max = 8.0);

    RadialState sample(RngStream& rng) const;
    // Midpoint quadrature of the normalized joint density over the grid.
    double quadrature_mass() const;

  private:
    static double invert(const std::vector<double>& cdf, double lo, double cell, double u);

    double r_lo_ = 0.0;
    double r_cell_;
    double m_cell_;
    std::vector<double> r_cdf_;
    std::vector<double> m_cdf_;
};

// Global BPS on U = ||x||^2 in d = 2 without refreshment, run for the
// requested number of bounce events from x = e1, v = e2 using the closed-form
// bounce times; returns the minimum of ||x(t)|| over the continuous path,
// computed segment-wise in closed form.
double reducibility_witness(int events, RngStream& rng);

}  // namespace bps
