#include "bps/radial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "bps/models/gaussian.hpp"
#include "bps/ppsim.hpp"
#include "bps/sampler.hpp"
#include "bps/trajectory.hpp"

namespace bps {

RadialState radial_flow(const RadialState& from, double elapsed) {
    const double r =
        std::sqrt(from.r * from.r + 2.0 * from.m * from.r * elapsed + elapsed * elapsed);
    if (!(r > 0.0)) throw std::runtime_error("radial process reached the origin");
    const double m = (from.m * from.r + elapsed) / r;
    return {r, std::clamp(m, -1.0, 1.0)};
}

RadialState RadialTrajectory::state_at(double t) const {
    if (t < 0.0 || t > horizon) throw std::out_of_range("time outside [0, horizon]");
    RadialState base = initial;
    double base_time = 0.0;
    auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                               [](double value, const RadialJump& jump) {
                                   return value < jump.time;
                               });
    if (it != jumps.begin()) {
        base = (it - 1)->state;
        base_time = (it - 1)->time;
    }
    return radial_flow(base, t - base_time);
}

RadialTrajectory radial_simulate(const RadialState& initial, double horizon, RngStream& rng) {
    if (!(initial.r > 0.0)) throw std::invalid_argument("initial radius must be positive");
    if (std::abs(initial.m) > 1.0 + 1e-12)
        throw std::invalid_argument("|m| must be at most 1");
    RadialTrajectory trajectory;
    trajectory.initial = {initial.r, std::clamp(initial.m, -1.0, 1.0)};
    trajectory.horizon = horizon;

    RadialState state = trajectory.initial;
    double clock = 0.0;
    while (clock < horizon) {
        // Jump rate along the flow: the lumped bounce rate of the planar
        // sampler with energy ||x||^2 is max(0, 2 r(t) m(t)) since the
        // gradient is 2x; |m| <= 1 gives the windowed bound 2 (r(s) + window).
        auto rate = [&state](double u) {
            const RadialState flowed = radial_flow(state, u);
            return std::max(0.0, 2.0 * flowed.r * flowed.m);
        };
        auto envelope = [&state](double s) {
            constexpr double window = 0.5;
            IntensityEnvelope env;
            env.validity = window;
            env.bound = 2.0 * (radial_flow(state, s).r + window);
            return env;
        };
        const auto jump = first_arrival_thinning(rate, envelope, rng, horizon - clock);
        if (!jump) break;
        state = radial_flow(state, *jump);
        state.m = -state.m;
        clock += *jump;
        trajectory.jumps.push_back({clock, state});
    }
    return trajectory;
}

double invariant_family_density(int k, double r, double m) {
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    if (r < 0.0 || std::abs(m) > 1.0) throw std::invalid_argument("outside the state space");
    const double angular = 1.0 - m * m;
    const double exponent = (k - 3.0) / 2.0;
    if (angular == 0.0 && exponent < 0.0) return std::numeric_limits<double>::infinity();
    const double radial = std::pow(std::sqrt(2.0) * r, k - 1) * std::exp(-r * r);
    return radial * std::pow(angular, exponent);
}

InvariantFamilyGrid::InvariantFamilyGrid(int k, int r_cells, int m_cells, double r_max) {
    if (r_cells < 2 || m_cells < 2) throw std::invalid_argument("grid too small");
    r_cell_ = r_max / r_cells;
    m_cell_ = 2.0 / m_cells;
    r_cdf_.resize(r_cells);
    m_cdf_.resize(m_cells);
    double total = 0.0;
    for (int i = 0; i < r_cells; ++i) {
        const double center = (i + 0.5) * r_cell_;
        total += std::pow(std::sqrt(2.0) * center, k - 1) * std::exp(-center * center);
        r_cdf_[i] = total;
    }
    for (double& c : r_cdf_) c /= total;
    total = 0.0;
    for (int j = 0; j < m_cells; ++j) {
        const double center = -1.0 + (j + 0.5) * m_cell_;
        total += std::pow(1.0 - center * center, (k - 3.0) / 2.0);
        m_cdf_[j] = total;
    }
    for (double& c : m_cdf_) c /= total;
}

double InvariantFamilyGrid::invert(const std::vector<double>& cdf, double lo, double cell,
                                   double u) {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const int index = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                                cdf.size() - 1));
    const double below = index == 0 ? 0.0 : cdf[index - 1];
    const double mass = cdf[index] - below;
    const double frac = mass > 0.0 ? (u - below) / mass : 0.5;
    return lo + (index + frac) * cell;
}

RadialState InvariantFamilyGrid::sample(RngStream& rng) const {
    RadialState state;
    state.r = invert(r_cdf_, 0.0, r_cell_, rng.uniform_open());
    state.m = invert(m_cdf_, -1.0, m_cell_, rng.uniform_open());
    return state;
}

double InvariantFamilyGrid::quadrature_mass() const {
    // The axis marginals are normalized independently; the joint midpoint
    // quadrature of their product over the grid should recover 1.
    double r_mass = 0.0;
    for (std::size_t i = 0; i < r_cdf_.size(); ++i) {
        const double below = i == 0 ? 0.0 : r_cdf_[i - 1];
        r_mass += r_cdf_[i] - below;
    }
    double m_mass = 0.0;
    for (std::size_t j = 0; j < m_cdf_.size(); ++j) {
        const double below = j == 0 ? 0.0 : m_cdf_[j - 1];
        m_mass += m_cdf_[j] - below;
    }
    return r_mass * m_mass;
}

double reducibility_witness(int events, RngStream& rng) {
    Eigen::VectorXd x(2), v(2);
    x << 1.0, 0.0;
    v << 0.0, 1.0;
    double min_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < events; ++i) {
        const double tau = iso_gaussian_bounce_time(x, v, rng.uniform_open());
        min_norm = std::min(min_norm, segment_min_norm({x, v}, tau));
        x += tau * v;
        v = reflect(2.0 * x, v);
    }
    min_norm = std::min(min_norm, x.norm());
    return min_norm;
}

}  // namespace bps
