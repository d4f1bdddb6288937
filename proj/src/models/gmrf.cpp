#include "bps/models/gmrf.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "bps/ppsim.hpp"

namespace bps {

namespace {

// Factor whose energy is quadratic along any ray: the local intensity is the
// linear rate max(0, B + C t), simulated and bounded in closed form.
struct QuadraticRay {
    double along = 0.0;      // B = <grad U_f(x_f), v_f>
    double curvature = 0.0;  // C = v_f' H_f v_f
};

std::optional<double> linear_arrival_capped(const QuadraticRay& ray, RngStream& rng,
                                            double horizon) {
    const auto tau =
        linear_rate_first_arrival(ray.along, ray.curvature, -std::log(rng.uniform_open()));
    if (!tau || *tau >= horizon) return std::nullopt;
    return tau;
}

double linear_bound(const QuadraticRay& ray, double validity) {
    return std::max({0.0, ray.along, ray.along + ray.curvature * validity});
}

void add_node_factor(std::vector<Factor>& factors, int k, double coefficient) {
    Factor factor;
    factor.neighborhood = {k};
    factor.energy = [coefficient](const Eigen::VectorXd& x) {
        return 0.5 * coefficient * x[0] * x[0];
    };
    factor.gradient = [coefficient](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd g(1);
        g[0] = coefficient * x[0];
        return g;
    };
    factor.bounce_sampler = [coefficient](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                          RngStream& rng, double horizon) {
        const QuadraticRay ray{coefficient * x[0] * v[0], coefficient * v[0] * v[0]};
        return linear_arrival_capped(ray, rng, horizon);
    };
    factor.bound_provider = [coefficient](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                          double validity) {
        const QuadraticRay ray{coefficient * x[0] * v[0], coefficient * v[0] * v[0]};
        return linear_bound(ray, validity);
    };
    factors.push_back(std::move(factor));
}

void add_pair_factor(std::vector<Factor>& factors, int a, int b, double rho) {
    Factor factor;
    factor.neighborhood = {a, b};
    factor.energy = [rho](const Eigen::VectorXd& x) {
        const double diff = x[0] - x[1];
        return 0.5 * rho * diff * diff;
    };
    factor.gradient = [rho](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const double diff = x[0] - x[1];
        Eigen::VectorXd g(2);
        g[0] = rho * diff;
        g[1] = -rho * diff;
        return g;
    };
    factor.bounce_sampler = [rho](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                  RngStream& rng, double horizon) {
        const double dx = x[0] - x[1];
        const double dv = v[0] - v[1];
        const QuadraticRay ray{rho * dx * dv, rho * dv * dv};
        return linear_arrival_capped(ray, rng, horizon);
    };
    factor.bound_provider = [rho](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                  double validity) {
        const double dx = x[0] - x[1];
        const double dv = v[0] - v[1];
        const QuadraticRay ray{rho * dx * dv, rho * dv * dv};
        return linear_bound(ray, validity);
    };
    factors.push_back(std::move(factor));
}

void check_positive_definite(const Eigen::SparseMatrix<double>& precision) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(precision);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("precision matrix is not positive definite");
}

int poisson_draw(double rate, RngStream& rng) {
    // Knuth multiplication; rates here stay modest.
    const double threshold = std::exp(-rate);
    int count = 0;
    double product = rng.uniform_open();
    while (product > threshold) {
        ++count;
        product *= rng.uniform_open();
    }
    return count;
}

}  // namespace

Eigen::SparseMatrix<double> chain_precision(int dimension, double rho, ChainForm form) {
    Eigen::SparseMatrix<double> precision(dimension, dimension);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(3 * dimension);
    for (int k = 0; k < dimension; ++k) {
        const int degree = (k == 0 || k == dimension - 1) ? 1 : 2;
        entries.emplace_back(k, k,
                             form == ChainForm::Penalty ? 1.0 + rho * degree : 1.0);
        if (k + 1 < dimension) {
            entries.emplace_back(k, k + 1, -rho);
            entries.emplace_back(k + 1, k, -rho);
        }
    }
    precision.setFromTriplets(entries.begin(), entries.end());
    return precision;
}

FactorGraph build_chain_gmrf(int dimension, double rho, ChainForm form) {
    if (dimension < 2) throw std::invalid_argument("chain needs dimension at least 2");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
    check_positive_definite(chain_precision(dimension, rho, form));

    std::vector<Factor> factors;
    for (int k = 0; k < dimension; ++k) {
        const int degree = (k == 0 || k == dimension - 1) ? 1 : 2;
        const double coefficient = form == ChainForm::Penalty ? 1.0 : 1.0 - rho * degree;
        if (coefficient != 0.0) add_node_factor(factors, k, coefficient);
    }
    for (int k = 0; k + 1 < dimension; ++k) add_pair_factor(factors, k, k + 1, rho);
    return FactorGraph(dimension, std::move(factors));
}

Eigen::SparseMatrix<double> grid_precision(int side, double rho) {
    const int d = side * side;
    Eigen::SparseMatrix<double> precision(d, d);
    std::vector<Eigen::Triplet<double>> entries;
    auto at = [side](int i, int j) { return i * side + j; };
    std::vector<double> diagonal(d, 1.0);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            if (i + 1 < side) {
                entries.emplace_back(at(i, j), at(i + 1, j), -rho);
                entries.emplace_back(at(i + 1, j), at(i, j), -rho);
                diagonal[at(i, j)] += rho;
                diagonal[at(i + 1, j)] += rho;
            }
            if (j + 1 < side) {
                entries.emplace_back(at(i, j), at(i, j + 1), -rho);
                entries.emplace_back(at(i, j + 1), at(i, j), -rho);
                diagonal[at(i, j)] += rho;
                diagonal[at(i, j + 1)] += rho;
            }
        }
    }
    for (int k = 0; k < d; ++k) entries.emplace_back(k, k, diagonal[k]);
    precision.setFromTriplets(entries.begin(), entries.end());
    return precision;
}

FactorGraph build_grid_poisson_gmrf(int side, const Eigen::MatrixXi& counts, double rho) {
    if (side < 2) throw std::invalid_argument("grid side must be at least 2");
    if (counts.rows() != side || counts.cols() != side)
        throw std::invalid_argument("counts must be side x side");
    if ((counts.array() < 0).any()) throw std::invalid_argument("counts must be non-negative");
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be non-negative");
    check_positive_definite(grid_precision(side, rho));

    std::vector<Factor> factors;
    auto at = [side](int i, int j) { return i * side + j; };
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            add_node_factor(factors, at(i, j), 1.0);
            if (i + 1 < side) add_pair_factor(factors, at(i, j), at(i + 1, j), rho);
            if (j + 1 < side) add_pair_factor(factors, at(i, j), at(i, j + 1), rho);
        }
    }
    // Poisson likelihood factor per cell: energy exp(x) - y x. Bounce times
    // come from thinned superposition of the exp and linear pieces, both with
    // closed-form arrivals.
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const double y = static_cast<double>(counts(i, j));
            Factor factor;
            factor.neighborhood = {at(i, j)};
            factor.energy = [y](const Eigen::VectorXd& x) { return std::exp(x[0]) - y * x[0]; };
            factor.gradient = [y](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                Eigen::VectorXd g(1);
                g[0] = std::exp(x[0]) - y;
                return g;
            };
            factor.bounce_sampler = [y](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                        RngStream& rng,
                                        double horizon) -> std::optional<double> {
                const double x0 = x[0];
                const double v0 = v[0];
                if (v0 == 0.0) return std::nullopt;
                std::vector<SuperposedComponent> components;
                components.push_back(SuperposedComponent{
                    [x0, v0](double offset, RngStream& stream) -> std::optional<double> {
                        if (v0 <= 0.0) return std::nullopt;
                        const double here = x0 + v0 * offset;
                        const double draw = -std::log(stream.uniform_open());
                        // exp(x + v tau) = draw + exp(x), solved stably in logs.
                        const double log_draw = std::log(draw);
                        const double lse = std::max(log_draw, here) +
                                           std::log1p(std::exp(-std::abs(log_draw - here)));
                        return offset + (lse - here) / v0;
                    },
                    [x0, v0](double t) { return std::max(0.0, v0 * std::exp(x0 + v0 * t)); }});
                if (y > 0.0) {
                    components.push_back(SuperposedComponent{
                        [y, v0](double offset, RngStream& stream) -> std::optional<double> {
                            const double rate = -y * v0;
                            if (rate <= 0.0) return std::nullopt;
                            return offset + stream.exponential(rate);
                        },
                        [y, v0](double) { return std::max(0.0, -y * v0); }});
                }
                auto total = [x0, v0, y](double t) {
                    return std::max(0.0, (std::exp(x0 + v0 * t) - y) * v0);
                };
                return first_arrival_thinned_superposition(components, total, rng, horizon);
            };
            factor.bound_provider = [y](const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                        double validity) {
                if (v[0] == 0.0) return 0.0;
                // The rate is nondecreasing along the ray for either sign of v.
                return std::max(0.0, (std::exp(x[0] + v[0] * validity) - y) * v[0]);
            };
            factors.push_back(std::move(factor));
        }
    }
    return FactorGraph(side * side, std::move(factors));
}

Eigen::MatrixXi sample_grid_counts(int side, double rho, RngStream& rng) {
    const int d = side * side;
    const Eigen::MatrixXd precision = Eigen::MatrixXd(grid_precision(side, rho));
    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("precision matrix is not positive definite");
    // x ~ N(0, P^{-1}) via x = L^{-T} z.
    const Eigen::VectorXd z = rng.normal_vector(d);
    const Eigen::VectorXd x = llt.matrixU().solve(z);
    Eigen::MatrixXi counts(side, side);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            counts(i, j) = poisson_draw(std::exp(x[i * side + j]), rng);
        }
    }
    return counts;
}

}  // namespace bps
