#pragma once

#include <array>
#include <functional>
#include <optional>

namespace bps {

// Superposed bounce-time pieces for a univariate exponential family with
// natural parameter x, observation statistic phi(y), log-normalizer A and a
// standard Gaussian prior x^2/2: the prior piece has the isotropic-Gaussian
// closed form (at half scale), the linear piece fires only when v phi(y) < 0,
// and the log-normalizer piece inverts A along the ray.
struct ExpFamArrivals {
    std::optional<double> prior;
    std::optional<double> linear;
    std::optional<double> log_normalizer;
};

ExpFamArrivals expfam_bounce_times(
    double x, double v, double phi,
    const std::function<double(double)>& log_normalizer,
    const std::function<std::optional<double>(double)>& log_normalizer_inverse,
    const std::array<double, 3>& uniform_draws);

}  // namespace bps
