#include "bps/models/expfam.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "bps/models/gaussian.hpp"

namespace bps {

ExpFamArrivals expfam_bounce_times(
    double x, double v, double phi,
    const std::function<double(double)>& log_normalizer,
    const std::function<std::optional<double>(double)>& log_normalizer_inverse,
    const std::array<double, 3>& uniform_draws) {
    if (v == 0.0) throw std::invalid_argument("zero velocity");
    ExpFamArrivals arrivals;

    // Prior x^2 / 2: isotropic Gaussian machinery at scale 1/2.
    {
        Eigen::VectorXd xs(1), vs(1);
        xs[0] = x;
        vs[0] = v;
        arrivals.prior = iso_gaussian_bounce_time(xs, vs, uniform_draws[0], 0.5);
    }

    // Linear term -x phi(y): constant rate -v phi(y) when negative drift.
    if (v * phi < 0.0) {
        arrivals.linear = std::log(uniform_draws[1]) / (v * phi);
    }

    // Log-normalizer A(x): invert the energy increase along the ray.
    {
        const auto preimage =
            log_normalizer_inverse(-std::log(uniform_draws[2]) + log_normalizer(x));
        if (preimage) {
            const double tau = (*preimage - x) / v;
            if (tau > 0.0) arrivals.log_normalizer = tau;
        }
    }
    return arrivals;
}

}  // namespace bps
