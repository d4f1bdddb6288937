#include <cmath>
#include <doctest.h>

#include <Eigen/Dense>

#include "bps/errors.hpp"
#include "bps/estimators.hpp"
#include "bps/models/gaussian.hpp"
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

TEST_CASE("bounce intensity clamps descent directions to zero") {
    const EnergyModel model = make_isotropic_gaussian(2);
    // gradient is 2x, so pick x = (1, 0) to get grad (2, 0).
    CHECK(bounce_intensity(model, {vec2(1, 0), vec2(0, 3)}) == 0.0);
    CHECK(bounce_intensity(model, {vec2(1, 0), vec2(-1, 5)}) == 0.0);
    CHECK(bounce_intensity(model, {vec2(1, 0), vec2(3, 1)}) == doctest::Approx(6.0));
}

TEST_CASE("reflection examples") {
    CHECK((reflect(vec2(1, 0), vec2(1, 1)) - vec2(-1, 1)).norm() == doctest::Approx(0.0));
    CHECK((reflect(vec2(1, 0), vec2(0, 2)) - vec2(0, 2)).norm() == doctest::Approx(0.0));
    CHECK((reflect(vec2(2, 0), vec2(-1, 3)) - vec2(1, 3)).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(reflect(vec2(0, 0), vec2(1, 1)), DegenerateBounceError);
}

TEST_CASE("reflection is a norm-preserving involution that flips the intensity") {
    RngStream rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::VectorXd g = rng.normal_vector(7);
        const Eigen::VectorXd v = rng.normal_vector(7);
        if (g.norm() < 1e-10) continue;
        const Eigen::VectorXd r = reflect(g, v);
        CHECK((reflect(g, r) - v).lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, v.norm()));
        CHECK(std::abs(r.norm() - v.norm()) <= 1e-12 * std::max(1.0, v.norm()));
        CHECK(std::abs(g.dot(r) + g.dot(v)) <= 1e-12 * std::max(1.0, std::abs(g.dot(v))));
    }
}

TEST_CASE("restricted sphere refreshment is uniform with unit norms") {
    RngStream rng(22);
    const int d = 5;
    const int n = 10000;
    RefreshmentScheme scheme{RefreshKind::RestrictedSphere, 1.0};
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd v = Eigen::VectorXd::Ones(d);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd draw = refresh_velocity(scheme, v, rng);
        CHECK(std::abs(draw.norm() - 1.0) <= 1e-12);
        mean += draw;
    }
    mean /= n;
    for (int k = 0; k < d; ++k) CHECK(std::abs(mean[k]) < 0.05);
}

TEST_CASE("partial refreshment at zero angle returns the normalized velocity") {
    RngStream rng(23);
    const Eigen::VectorXd v = vec2(3, 4);
    const Eigen::VectorXd out = partial_refresh_direction(v, 0.0, rng);
    CHECK((out - v / 5.0).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(partial_refresh_direction(vec2(0, 0), 1.0, rng), std::invalid_argument);
}

TEST_CASE("partial refreshment keeps unit norm") {
    RngStream rng(24);
    RefreshmentScheme scheme{RefreshKind::RestrictedPartial, 1.0, 1.0, 4.0};
    const Eigen::VectorXd v = vec2(1, 1);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd out = refresh_velocity(scheme, v, rng);
        CHECK(std::abs(out.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("gaussian refreshment has unit per-coordinate variance") {
    RngStream rng(25);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 1.0};
    const int d = 4;
    const int n = 10000;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd draw = refresh_velocity(scheme, Eigen::VectorXd::Zero(d), rng);
        sq += draw.cwiseProduct(draw);
    }
    sq /= n;
    const double se = std::sqrt(2.0 / n);
    for (int k = 0; k < d; ++k) CHECK(std::abs(sq[k] - 1.0) < 3.0 * se);
}

TEST_CASE("position interpolation and boundaries") {
    std::vector<TrajectorySegment> segments;
    segments.push_back({0.0, 1.0, {vec2(0, 0), vec2(1, 2)}, EventKind::Bounce});
    segments.push_back({1.0, 1.0, {vec2(1, 2), vec2(-1, 2)}, EventKind::Horizon});
    const Trajectory trajectory(std::move(segments), 2.0);
    CHECK((trajectory.position_at(0.5) - vec2(0.5, 1.0)).norm() == doctest::Approx(0.0));
    CHECK((trajectory.position_at(0.0) - vec2(0, 0)).norm() == doctest::Approx(0.0));
    CHECK((trajectory.position_at(1.5) - vec2(0.5, 3.0)).norm() == doctest::Approx(0.0));
    CHECK(trajectory.max_connectedness_error() == doctest::Approx(0.0));
    CHECK_THROWS_AS(trajectory.position_at(2.5), std::out_of_range);
    CHECK_THROWS_AS(trajectory.position_at(-0.1), std::out_of_range);

    // One-dimensional bounce at t = 1 reversing the velocity.
    std::vector<TrajectorySegment> line;
    Eigen::VectorXd x0(1), vp(1), vm(1);
    x0 << 0.0;
    vp << 1.0;
    vm << -1.0;
    line.push_back({0.0, 1.0, {x0, vp}, EventKind::Bounce});
    Eigen::VectorXd x1(1);
    x1 << 1.0;
    line.push_back({1.0, 1.0, {x1, vm}, EventKind::Horizon});
    const Trajectory folded(std::move(line), 2.0);
    CHECK(folded.position_at(1.5)[0] == doctest::Approx(0.5));
}

TEST_CASE("constant energy runs contain only refreshments") {
    const EnergyModel flat(
        2, [](const Eigen::VectorXd&) { return 0.0; },
        [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); },
        [](const Eigen::VectorXd&, const Eigen::VectorXd&, RngStream&,
           double) -> std::optional<double> { return std::nullopt; });
    RngStream rng(26);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 1.0};
    const Trajectory trajectory = simulate(flat, scheme, {vec2(0, 0), vec2(1, 0)}, 200.0, rng);
    const EventTallies tallies = trajectory.tallies();
    CHECK(tallies.bounces == 0);
    CHECK(tallies.refreshes > 0);
    // Inter-refresh durations are Exp(1) draws.
    std::vector<double> durations;
    for (const auto& seg : trajectory.segments()) {
        if (seg.terminator == EventKind::Refresh) durations.push_back(seg.duration);
    }
    const double mean = sample_mean(durations);
    CHECK(std::abs(mean - 1.0) < 4.0 / std::sqrt(static_cast<double>(durations.size())));
}

TEST_CASE("gaussian run without refreshment never enters the unit disk") {
    const EnergyModel model = make_isotropic_gaussian(2);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 0.0};
    RngStream rng(27);
    const Trajectory trajectory = simulate(model, scheme, {vec2(1, 0), vec2(0, 1)}, 500.0, rng);
    CHECK(min_path_norm(trajectory) >= 1.0 - 1e-9);
    CHECK(trajectory.max_connectedness_error() <= 1e-12);
}

TEST_CASE("gaussian second moment matches the target variance") {
    const EnergyModel model = make_isotropic_gaussian(2);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 1.0};
    RngStream rng(28);
    PhaseState initial{vec2(0, 0), initial_velocity(scheme, 2, rng)};
    const Trajectory trajectory = simulate(model, scheme, std::move(initial), 100000.0, rng);
    const PathEstimate second = path_integral_moment(trajectory, 0, 2);
    CHECK(std::abs(second.value - 0.5) < 3.0 * second.standard_error);
    const PathEstimate mean = path_integral_moment(trajectory, 1, 1);
    CHECK(std::abs(mean.value) < 3.0 * mean.standard_error);
}

TEST_CASE("bounce strategies agree distributionally on the gaussian") {
    // Thinning and superposition strategies must reproduce the closed-form
    // bounce time law from a fixed phase point.
    const int n = 4000;
    const Eigen::VectorXd x = vec2(0.3, -1.1);
    const Eigen::VectorXd v = vec2(1.0, 0.4);
    std::vector<double> closed(n), thinned(n), superposed(n);
    const EnergyModel thinning_model = make_isotropic_gaussian(2, 1.0, BounceStrategy::Thinning);
    const EnergyModel superposition_model =
        make_isotropic_gaussian(2, 1.0, BounceStrategy::Superposition);
    RngStream closed_rng(29);
    RngStream thin_rng(30);
    RngStream super_rng(31);
    for (int i = 0; i < n; ++i) {
        closed[i] = iso_gaussian_bounce_time(x, v, closed_rng.uniform_open());
        thinned[i] = *thinning_model.bounce_time(x, v, thin_rng, kInfiniteTime);
        superposed[i] = *superposition_model.bounce_time(x, v, super_rng, kInfiniteTime);
    }
    CHECK(two_sample_ks_statistic(closed, thinned) < ks_critical_value(n, n, 0.01));
    CHECK(two_sample_ks_statistic(closed, superposed) < ks_critical_value(n, n, 0.01));
}

TEST_CASE("isotropic bounce recursions track the instrumented draws") {
    // Without refreshment, <x, v> after each bounce follows the closed-form
    // recursion in the drawn uniforms, and the squared norm follows suit.
    RngStream rng(32);
    Eigen::VectorXd x = vec2(1, 0), v = vec2(0, 1);
    for (int i = 0; i < 200; ++i) {
        const double uniform = rng.uniform_open();
        const double before = x.dot(v);
        const double norm_before = x.squaredNorm();
        const double tau = iso_gaussian_bounce_time(x, v, uniform);
        x += tau * v;
        v = reflect(2.0 * x, v);
        const double after = x.dot(v);
        const double expected = before <= 0.0
                                    ? -std::sqrt(-std::log(uniform))
                                    : -std::sqrt(before * before - std::log(uniform));
        CHECK(after == doctest::Approx(expected).epsilon(1e-9));
        const double norm_expected = before <= 0.0
                                         ? norm_before - before * before - std::log(uniform)
                                         : norm_before - std::log(uniform);
        CHECK(x.squaredNorm() == doctest::Approx(norm_expected).epsilon(1e-9));
        // Once the radial velocity turns inward it stays inward.
        CHECK(after <= 0.0);
    }
}

TEST_CASE("bounce never wins a tied or later clock") {
    int bounce_calls = 0;
    const EnergyModel model(
        1, [](const Eigen::VectorXd&) { return 0.0; },
        [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); },
        [&bounce_calls](const Eigen::VectorXd&, const Eigen::VectorXd&, RngStream&,
                        double horizon) -> std::optional<double> {
            ++bounce_calls;
            return horizon * 2.0;  // always after the horizon
        });
    RngStream rng(33);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 0.5};
    Eigen::VectorXd x(1), v(1);
    x << 0.0;
    v << 1.0;
    const Trajectory trajectory = simulate(model, scheme, {x, v}, 20.0, rng);
    CHECK(trajectory.tallies().bounces == 0);
    CHECK(bounce_calls > 0);
}

TEST_CASE("event cap aborts runaway runs") {
    const EnergyModel model(
        1, [](const Eigen::VectorXd&) { return 0.0; },
        [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); },
        [](const Eigen::VectorXd&, const Eigen::VectorXd&, RngStream&,
           double) -> std::optional<double> { return 1e-6; });
    RngStream rng(34);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 0.0};
    SimulateOptions options;
    options.max_events = 100;
    Eigen::VectorXd x(1), v(1);
    x << 1.0;
    v << 1.0;
    CHECK_THROWS_AS(simulate(model, scheme, {x, v}, 1e9, rng, options), std::runtime_error);
}

TEST_CASE("restricted schemes keep the gaussian target invariant") {
    // Sphere and partial refreshment change the velocity law, not the target:
    // second moments must still hit 1/2 per coordinate.
    const EnergyModel model = make_isotropic_gaussian(3);
    for (RefreshKind kind : {RefreshKind::RestrictedSphere, RefreshKind::RestrictedPartial}) {
        RefreshmentScheme scheme{kind, 1.0, 1.0, 4.0};
        RngStream rng(kind == RefreshKind::RestrictedSphere ? 35 : 36);
        PhaseState initial{Eigen::VectorXd::Zero(3), initial_velocity(scheme, 3, rng)};
        const Trajectory trajectory =
            simulate(model, scheme, std::move(initial), 60000.0, rng);
        for (int k = 0; k < 3; ++k) {
            const PathEstimate second = path_integral_moment(trajectory, k, 2);
            CHECK(std::abs(second.value - 0.5) < 3.0 * second.standard_error);
        }
    }
}

TEST_CASE("anisotropic quadratic form matches its covariance oracle") {
    const int d = 6;
    RngStream seed_rng(37);
    Eigen::MatrixXd shape(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) shape(i, j) = seed_rng.normal();
    const Eigen::MatrixXd dense =
        shape * shape.transpose() / d + Eigen::MatrixXd::Identity(d, d);
    const Eigen::SparseMatrix<double> precision = dense.sparseView();
    const Eigen::MatrixXd covariance = dense.inverse();

    const EnergyModel model = make_quadratic_form(precision);
    RefreshmentScheme scheme{RefreshKind::GlobalGaussian, 1.0};
    RngStream rng(38);
    PhaseState initial{Eigen::VectorXd::Zero(d), initial_velocity(scheme, d, rng)};
    const Trajectory trajectory = simulate(model, scheme, std::move(initial), 40000.0, rng);
    for (int k = 0; k < d; ++k) {
        const PathEstimate second = path_integral_moment(trajectory, k, 2);
        CHECK(std::abs(second.value - covariance(k, k)) <
              3.0 * second.standard_error + 0.02 * covariance(k, k));
        const PathEstimate mean = path_integral_moment(trajectory, k, 1);
        CHECK(std::abs(mean.value) < 3.5 * mean.standard_error);
    }
}
