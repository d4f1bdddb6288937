#include "bps/models/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace bps {

double iso_gaussian_bounce_time(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                double uniform_draw, double scale) {
    const double speed_sq = v.squaredNorm();
    if (!(speed_sq > 0.0)) throw std::invalid_argument("zero velocity");
    if (!(uniform_draw > 0.0 && uniform_draw < 1.0))
        throw std::invalid_argument("uniform draw must lie in (0, 1)");
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
    const double radial = x.dot(v);
    const double log_v = std::log(uniform_draw) / scale;
    if (radial <= 0.0) return (-radial + std::sqrt(-speed_sq * log_v)) / speed_sq;
    return (-radial + std::sqrt(radial * radial - speed_sq * log_v)) / speed_sq;
}

EnergyModel make_isotropic_gaussian(int dimension, double scale, BounceStrategy strategy,
                                    EngineCounters* counters) {
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
    auto energy = [scale](const Eigen::VectorXd& x) { return scale * x.squaredNorm(); };
    auto gradient = [scale](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return 2.0 * scale * x;
    };

    EnergyModel::BounceSampler sampler;
    switch (strategy) {
        case BounceStrategy::Inversion:
            sampler = [scale](const Eigen::VectorXd& x, const Eigen::VectorXd& v, RngStream& rng,
                              double horizon) -> std::optional<double> {
                const double tau = iso_gaussian_bounce_time(x, v, rng.uniform_open(), scale);
                if (tau >= horizon) return std::nullopt;
                return tau;
            };
            break;
        case BounceStrategy::Convex:
            sampler = convex_bounce_sampler(energy);
            break;
        case BounceStrategy::Thinning: {
            RayEnvelopeFactory envelopes = [scale](const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& v) -> EnvelopeProvider {
                const double radial = x.dot(v);
                const double speed_sq = v.squaredNorm();
                return [scale, radial, speed_sq](double s) {
                    constexpr double window = 1.0;
                    IntensityEnvelope env;
                    env.validity = window;
                    // The rate is nondecreasing along the ray, so its value at
                    // the window end dominates the window.
                    env.bound = 2.0 * scale * std::max(0.0, radial + (s + window) * speed_sq);
                    return env;
                };
            };
            sampler = thinning_bounce_sampler(gradient, envelopes, counters);
            break;
        }
        case BounceStrategy::Superposition:
            sampler = [scale, counters](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                        RngStream& rng,
                                        double horizon) -> std::optional<double> {
                std::vector<SuperposedComponent> components;
                components.reserve(x.size());
                for (int k = 0; k < x.size(); ++k) {
                    const double xk = x[k];
                    const double vk = v[k];
                    components.push_back(SuperposedComponent{
                        [xk, vk, scale](double offset, RngStream& stream)
                            -> std::optional<double> {
                            if (vk == 0.0) return std::nullopt;
                            Eigen::VectorXd xs(1), vs(1);
                            xs[0] = xk + vk * offset;
                            vs[0] = vk;
                            return offset +
                                   iso_gaussian_bounce_time(xs, vs, stream.uniform_open(), scale);
                        },
                        [xk, vk, scale](double t) {
                            return std::max(0.0, 2.0 * scale * (xk + vk * t) * vk);
                        }});
                }
                const double radial = x.dot(v);
                const double speed_sq = v.squaredNorm();
                auto total = [scale, radial, speed_sq](double t) {
                    return std::max(0.0, 2.0 * scale * (radial + speed_sq * t));
                };
                return first_arrival_thinned_superposition(components, total, rng, horizon,
                                                           counters);
            };
            break;
    }
    return EnergyModel(dimension, energy, gradient, std::move(sampler));
}

EnergyModel make_quadratic_form(const Eigen::SparseMatrix<double>& precision) {
    if (precision.rows() != precision.cols()) throw std::invalid_argument("square matrix required");
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(precision);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("precision matrix is not positive definite");
    const int dim = static_cast<int>(precision.rows());
    auto energy = [precision](const Eigen::VectorXd& x) { return 0.5 * x.dot(precision * x); };
    auto gradient = [precision](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return precision * x;
    };
    auto sampler = [precision](const Eigen::VectorXd& x, const Eigen::VectorXd& v, RngStream& rng,
                               double horizon) -> std::optional<double> {
        const double along = v.dot(precision * x);
        const double curvature = v.dot(precision * v);
        const auto tau = linear_rate_first_arrival(along, curvature, -std::log(rng.uniform_open()));
        if (!tau || *tau >= horizon) return std::nullopt;
        return tau;
    };
    return EnergyModel(dim, std::move(energy), std::move(gradient), std::move(sampler));
}

}  // namespace bps
