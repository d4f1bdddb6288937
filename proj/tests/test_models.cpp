#include <cmath>
#include <doctest.h>

#include "support/oracles.hpp"

#include "bps/estimators.hpp"
#include "bps/local_bps.hpp"
#include "bps/models/expfam.hpp"
#include "bps/models/gaussian.hpp"
#include "bps/models/gmrf.hpp"
#include "bps/sampler.hpp"
#include "bps/stats.hpp"

using namespace bps;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("closed-form gaussian bounce times") {
    const double v_e = std::exp(-1.0);
    CHECK(iso_gaussian_bounce_time(vec2(1, 0), vec2(1, 0), v_e) ==
          doctest::Approx(std::sqrt(2.0) - 1.0));
    CHECK(iso_gaussian_bounce_time(vec2(-1, 0), vec2(1, 0), v_e) == doctest::Approx(2.0));
    // V near 1: the bounce collapses to the ray's energy minimum.
    CHECK(iso_gaussian_bounce_time(vec2(-1, 0), vec2(1, 0), 1.0 - 1e-13) ==
          doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("closed form matches convex line search over random draws") {
    RngStream rng(81);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::VectorXd x = rng.normal_vector(3);
        const Eigen::VectorXd v = rng.normal_vector(3);
        if (v.norm() < 1e-6) continue;
        const double uniform = rng.uniform_open();
        const double closed = iso_gaussian_bounce_time(x, v, uniform);
        auto energy = [&](double t) { return (x + t * v).squaredNorm(); };
        const double searched = *first_arrival_convex(energy, -std::log(uniform));
        CHECK(std::abs(closed - searched) <= 1e-8);
    }
}

TEST_CASE("scaled gaussians keep their closed form consistent") {
    RngStream rng(82);
    const double scale = 0.5;  // standard normal target
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd x = rng.normal_vector(2);
        const Eigen::VectorXd v = rng.normal_vector(2);
        if (v.norm() < 1e-6) continue;
        const double uniform = rng.uniform_open();
        const double closed = iso_gaussian_bounce_time(x, v, uniform, scale);
        auto energy = [&](double t) { return scale * (x + t * v).squaredNorm(); };
        const double searched = *first_arrival_convex(energy, -std::log(uniform));
        CHECK(std::abs(closed - searched) <= 1e-8);
    }
}

TEST_CASE("exponential family bounce pieces") {
    // Linear piece: v = -1, phi = 2, V = exp(-2) -> tau = 1.
    auto identity_a = [](double x) { return x; };
    auto identity_inv = [](double y) -> std::optional<double> { return y; };
    const ExpFamArrivals linear = expfam_bounce_times(0.0, -1.0, 2.0, identity_a, identity_inv,
                                                      {0.5, std::exp(-2.0), 0.5});
    REQUIRE(linear.linear.has_value());
    CHECK(*linear.linear == doctest::Approx(1.0));

    // Positive drift never fires the linear piece.
    const ExpFamArrivals drift = expfam_bounce_times(0.0, 1.0, 2.0, identity_a, identity_inv,
                                                     {0.5, 0.5, 0.9});
    CHECK_FALSE(drift.linear.has_value());

    // Poisson family A(x) = exp(x): x = 0, v = 1, V = exp(-1) -> log 2.
    auto poisson_a = [](double x) { return std::exp(x); };
    auto poisson_inv = [](double y) -> std::optional<double> {
        if (y <= 0.0) return std::nullopt;
        return std::log(y);
    };
    const ExpFamArrivals poisson = expfam_bounce_times(0.0, 1.0, 0.0, poisson_a, poisson_inv,
                                                       {0.5, 0.5, std::exp(-1.0)});
    REQUIRE(poisson.log_normalizer.has_value());
    CHECK(*poisson.log_normalizer == doctest::Approx(std::log(2.0)));

    // Prior piece at half scale: energy x^2/2 along (x=1, v=1), draw 1:
    // (1+tau)^2/2 - 1/2 = 1 -> tau = sqrt(3) - 1.
    const ExpFamArrivals prior = expfam_bounce_times(1.0, 1.0, 0.0, identity_a, identity_inv,
                                                     {std::exp(-1.0), 0.5, 0.5});
    REQUIRE(prior.prior.has_value());
    CHECK(*prior.prior == doctest::Approx(std::sqrt(3.0) - 1.0));
}

TEST_CASE("chain factor graph reproduces the dense quadratic form") {
    const int d = 9;
    const double rho = 0.45;
    for (ChainForm form : {ChainForm::Penalty, ChainForm::UnitDiagonal}) {
        const FactorGraph graph = build_chain_gmrf(d, rho, form);
        const Eigen::MatrixXd precision(chain_precision(d, rho, form));
        RngStream rng(83);
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::VectorXd x = rng.normal_vector(d);
            CHECK(graph.energy(x) ==
                  doctest::Approx(0.5 * x.dot(precision * x)).epsilon(1e-10));
            CHECK((graph.gradient(x) - precision * x).lpNorm<Eigen::Infinity>() <= 1e-10);
        }
    }
}

TEST_CASE("chain marginal variances for the two-node case") {
    // Unit-diagonal form: P = [[1, -1/2], [-1/2, 1]] inverts to variance 4/3.
    const Eigen::MatrixXd cov =
        Eigen::MatrixXd(chain_precision(2, 0.5, ChainForm::UnitDiagonal)).inverse();
    CHECK(cov(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(cov(1, 1) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("non positive definite precision is rejected at construction") {
    // The unit-diagonal form loses positive definiteness on long chains.
    CHECK_THROWS_AS(build_chain_gmrf(100, 0.9, ChainForm::UnitDiagonal),
                    std::invalid_argument);
    CHECK_NOTHROW(build_chain_gmrf(100, 0.9));  // penalty form stays PD
    CHECK_NOTHROW(build_chain_gmrf(100, 0.5));
    Eigen::SparseMatrix<double> bad = chain_precision(50, 0.99, ChainForm::UnitDiagonal);
    CHECK_THROWS_AS(make_quadratic_form(bad), std::invalid_argument);
}

TEST_CASE("grid poisson factor graph matches its dense energy") {
    const int side = 3;
    RngStream rng(84);
    const Eigen::MatrixXi counts = sample_grid_counts(side, 0.5, rng);
    const FactorGraph graph = build_grid_poisson_gmrf(side, counts, 0.5);
    const Eigen::MatrixXd precision(grid_precision(side, 0.5));
    const int d = side * side;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd x = rng.normal_vector(d);
        double expected = 0.5 * x.dot(precision * x);
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                expected += std::exp(x[i * side + j]) - counts(i, j) * x[i * side + j];
            }
        }
        CHECK(graph.energy(x) == doctest::Approx(expected).epsilon(1e-10));
        const Eigen::VectorXd grad = graph.gradient(x);
        const double fd = oracles::max_relative_gradient_error(
            [&graph](const Eigen::VectorXd& point) { return graph.energy(point); },
            [&graph](const Eigen::VectorXd& point) { return graph.gradient(point); }, x);
        CHECK(fd <= 1e-5);
        (void)grad;
    }
}

TEST_CASE("poisson likelihood factor with zero count is the exponential energy") {
    const int side = 2;
    const Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(side, side);
    const FactorGraph graph = build_grid_poisson_gmrf(side, counts, 0.5);
    // Likelihood factors are appended after node and pair factors.
    const int likelihood_start = graph.factor_count() - side * side;
    const Factor& factor = graph.factors()[likelihood_start];
    Eigen::VectorXd x(1);
    x << 0.7;
    CHECK(factor.energy(x) == doctest::Approx(std::exp(0.7)));
    CHECK(factor.gradient(x)[0] == doctest::Approx(std::exp(0.7)));
}

TEST_CASE("poisson likelihood bounce times follow the factor's intensity") {
    // Compare thinned-superposition arrivals against numeric inversion of the
    // exact cumulative intensity.
    const int side = 2;
    Eigen::MatrixXi counts(side, side);
    counts << 3, 0, 1, 2;
    const FactorGraph graph = build_grid_poisson_gmrf(side, counts, 0.5);
    const int factor_index = graph.factor_count() - 4;  // cell (0, 0), count 3
    const Factor& factor = graph.factors()[factor_index];
    const double y = 3.0;
    Eigen::VectorXd x(1), v(1);
    x << -0.4;
    v << 0.9;
    const int n = 6000;
    RngStream sampler_rng(85);
    RngStream direct_rng(86);
    std::vector<double> sampled, inverted;
    for (int i = 0; i < n; ++i) {
        const auto tau = factor.bounce_sampler(x, v, sampler_rng, 200.0);
        if (tau) sampled.push_back(*tau);
        // Exact cumulative of max(0, (e^{x+vt} - y) v).
        auto cumulative = [&](double t) {
            const double boundary = (std::log(y) - x[0]) / v[0];  // rate zero before this
            const double start = std::max(0.0, boundary);
            if (t <= start) return 0.0;
            return std::exp(x[0] + v[0] * t) - std::exp(x[0] + v[0] * start) -
                   y * v[0] * (t - start);
        };
        const auto quantile = quantile_from_cumulative(cumulative, 200.0, 1e-12);
        const auto tau2 =
            first_arrival_inversion(quantile, -std::log(direct_rng.uniform_open()));
        if (tau2) inverted.push_back(*tau2);
    }
    REQUIRE(sampled.size() > 5000);
    REQUIRE(inverted.size() > 5000);
    CHECK(two_sample_ks_statistic(sampled, inverted) <
          ks_critical_value(sampled.size(), inverted.size(), 0.01));
}

TEST_CASE("grid poisson posterior agrees with a metropolis oracle") {
    const int side = 3;
    RngStream data_rng(87);
    const Eigen::MatrixXi counts = sample_grid_counts(side, 0.5, data_rng);
    const FactorGraph graph = build_grid_poisson_gmrf(side, counts, 0.5);
    const int d = side * side;

    RefreshmentScheme scheme{RefreshKind::Local, 1.0};
    RngStream rng(88);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const LocalTrajectory run =
        local_bps_queue(graph, scheme, {zero, rng.normal_vector(d)}, 20000.0, rng.split(1));

    RngStream mh_rng(89);
    const auto samples = oracles::random_walk_metropolis(
        [&graph](const Eigen::VectorXd& x) { return graph.energy(x); },
        Eigen::VectorXd::Zero(d), 400000, 0.25, mh_rng, 10);
    for (int k = 0; k < d; k += 4) {
        const PathEstimate bps_mean = path_integral_moment(run.coordinates[k], run.horizon, 1);
        std::vector<double> chain;
        chain.reserve(samples.size());
        for (const auto& s : samples) chain.push_back(s[k]);
        // Drop the Metropolis warmup.
        chain.erase(chain.begin(), chain.begin() + 2000);
        const double mh_mean = oracles::mean_of(chain);
        const double mh_se = std::sqrt(sample_variance(chain) /
                                       effective_sample_size(chain).ess);
        CHECK(std::abs(bps_mean.value - mh_mean) <=
              3.0 * std::hypot(bps_mean.standard_error, mh_se) + 0.02);
    }
}

TEST_CASE("quadratic-form model gradient passes finite differences") {
    const auto precision = chain_precision(7, 0.3);
    const EnergyModel model = make_quadratic_form(precision);
    RngStream rng(90);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = rng.normal_vector(7);
        CHECK(oracles::max_relative_gradient_error(
                  [&model](const Eigen::VectorXd& p) { return model.energy(p); },
                  [&model](const Eigen::VectorXd& p) { return model.gradient(p); }, x) <= 1e-5);
    }
}

TEST_CASE("isotropic gaussian gradient passes finite differences") {
    const EnergyModel model = make_isotropic_gaussian(5, 1.7);
    RngStream rng(91);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = rng.normal_vector(5);
        CHECK(oracles::max_relative_gradient_error(
                  [&model](const Eigen::VectorXd& p) { return model.energy(p); },
                  [&model](const Eigen::VectorXd& p) { return model.gradient(p); }, x) <= 1e-5);
    }
}

TEST_CASE("convex line-search strategy samples a quartic target correctly") {
    // U(x) = sum x^2/2 + x^4/4 is strictly convex; compare against a
    // Metropolis reference on the same energy.
    const int d = 3;
    auto energy = [](const Eigen::VectorXd& x) {
        double total = 0.0;
        for (int k = 0; k < x.size(); ++k)
            total += 0.5 * x[k] * x[k] + 0.25 * x[k] * x[k] * x[k] * x[k];
        return total;
    };
    const EnergyModel model(
        d, energy,
        [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd g(x.size());
            for (int k = 0; k < x.size(); ++k) g[k] = x[k] + x[k] * x[k] * x[k];
            return g;
        },
        convex_bounce_sampler(energy));
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 1.0};
    RngStream rng(92);
    PhaseState initial{Eigen::VectorXd::Zero(d), initial_velocity(scheme, d, rng)};
    const Trajectory trajectory = simulate(model, scheme, std::move(initial), 20000.0, rng);

    RngStream mh_rng(93);
    const auto samples = oracles::random_walk_metropolis(energy, Eigen::VectorXd::Zero(d),
                                                         400000, 0.6, mh_rng, 10);
    for (int k = 0; k < d; ++k) {
        const PathEstimate second = path_integral_moment(trajectory, k, 2);
        std::vector<double> chain;
        chain.reserve(samples.size());
        for (const auto& s : samples) chain.push_back(s[k] * s[k]);
        chain.erase(chain.begin(), chain.begin() + 1000);
        const double mh_second = oracles::mean_of(chain);
        const double mh_se =
            std::sqrt(sample_variance(chain) / effective_sample_size(chain).ess);
        CHECK(std::abs(second.value - mh_second) <=
              3.0 * std::hypot(second.standard_error, mh_se));
    }
}
