#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bps/errors.hpp"
#include "bps/local_bps.hpp"

namespace bps {

Eigen::VectorXd LocalTrajectory::position_at(double t) const {
    Eigen::VectorXd x(dimension());
    for (int k = 0; k < dimension(); ++k) x[k] = coordinates[k].reconstruct(t);
    return x;
}

LocalRefreshResult local_refresh(const FactorGraph& graph, const Eigen::VectorXd& v,
                                 RngStream& rng) {
    if (graph.factor_count() == 0) throw std::invalid_argument("empty factor graph");
    const int chosen = std::min(graph.factor_count() - 1,
                                static_cast<int>(rng.uniform() * graph.factor_count()));
    LocalRefreshResult result;
    result.factor = chosen;
    result.velocity = v;
    for (int k : graph.factors()[chosen].neighborhood) result.velocity[k] = rng.normal();
    result.affected = graph.adjacency(chosen);
    return result;
}

LocalQueueSampler::LocalQueueSampler(const FactorGraph& graph, RefreshmentScheme scheme,
                                     PhaseState initial, double horizon, RngStream rng)
    : graph_(graph),
      scheme_(scheme),
      horizon_(horizon),
      rng_(std::move(rng)),
      velocity_(std::move(initial.velocity)),
      queue_(graph.factor_count()) {
    if (!(horizon_ > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (initial.position.size() != graph_.dimension() ||
        velocity_.size() != graph_.dimension())
        throw std::invalid_argument("state dimension does not match the graph");
    lists_.reserve(graph_.dimension());
    for (int k = 0; k < graph_.dimension(); ++k)
        lists_.emplace_back(initial.position[k], velocity_[k]);
    rebuild_queue();
    next_refresh_ = rng_.exponential(scheme_.rate);
}

Eigen::VectorXd LocalQueueSampler::gather_position(int factor, double t) const {
    const auto& hood = graph_.factors()[factor].neighborhood;
    Eigen::VectorXd local(hood.size());
    for (std::size_t i = 0; i < hood.size(); ++i) local[i] = lists_[hood[i]].reconstruct(t);
    return local;
}

Eigen::VectorXd LocalQueueSampler::gather_velocity(int factor) const {
    const auto& hood = graph_.factors()[factor].neighborhood;
    Eigen::VectorXd local(hood.size());
    for (std::size_t i = 0; i < hood.size(); ++i) local[i] = velocity_[hood[i]];
    return local;
}

void LocalQueueSampler::resimulate(int factor) {
    const Eigen::VectorXd x_local = gather_position(factor, clock_);
    const Eigen::VectorXd v_local = gather_velocity(factor);
    const auto& sampler = graph_.factors()[factor].bounce_sampler;
    if (!sampler) throw std::logic_error("factor is missing a bounce sampler");
    const auto tau = sampler(x_local, v_local, rng_, horizon_ - clock_);
    queue_.update(factor, tau ? clock_ + *tau : std::numeric_limits<double>::infinity());
    ++tallies_.candidates_simulated;
}

void LocalQueueSampler::rebuild_queue() {
    for (int f = 0; f < graph_.factor_count(); ++f) resimulate(f);
}

bool LocalQueueSampler::step() {
    if (done_) return false;
    const auto [bounce_time, factor] = queue_.min();
    const double next_event = std::min(bounce_time, next_refresh_);
    if (!(next_event < horizon_)) {
        done_ = true;
        return false;
    }
    if (bounce_time < next_refresh_) {
        clock_ = bounce_time;
        const Factor& f = graph_.factors()[factor];
        const Eigen::VectorXd x_local = gather_position(factor, clock_);
        Eigen::VectorXd v_before;
        if (observer_) v_before = velocity_;
        velocity_ = local_reflect(f, x_local, velocity_);
        for (std::size_t i = 0; i < f.neighborhood.size(); ++i) {
            const int k = f.neighborhood[i];
            lists_[k].append(x_local[i], velocity_[k], clock_);
        }
        if (observer_) observer_(factor, clock_, v_before, velocity_);
        events_.push_back({clock_, EventKind::Bounce, factor});
        ++tallies_.bounces;
        for (int adjacent : graph_.adjacency(factor)) resimulate(adjacent);
    } else {
        clock_ = next_refresh_;
        int refreshed_factor = -1;
        if (scheme_.kind == RefreshKind::Local) {
            const int chosen = std::min(graph_.factor_count() - 1,
                                        static_cast<int>(rng_.uniform() * graph_.factor_count()));
            const auto& hood = graph_.factors()[chosen].neighborhood;
            for (int k : hood) {
                velocity_[k] = rng_.normal();
                lists_[k].append(lists_[k].reconstruct(clock_), velocity_[k], clock_);
            }
            for (int adjacent : graph_.adjacency(chosen)) resimulate(adjacent);
            refreshed_factor = chosen;
        } else {
            velocity_ = refresh_velocity(scheme_, velocity_, rng_);
            for (int k = 0; k < graph_.dimension(); ++k)
                lists_[k].append(lists_[k].reconstruct(clock_), velocity_[k], clock_);
            rebuild_queue();
        }
        refresh_times_.push_back(clock_);
        events_.push_back({clock_, EventKind::Refresh, refreshed_factor});
        ++tallies_.refreshes;
        next_refresh_ += rng_.exponential(scheme_.rate);
    }
    return true;
}

void LocalQueueSampler::run() {
    while (step()) {
    }
}

LocalTrajectory LocalQueueSampler::finish() {
    LocalTrajectory out;
    out.horizon = horizon_;
    out.coordinates = std::move(lists_);
    out.refresh_times = std::move(refresh_times_);
    out.events = std::move(events_);
    out.tallies = tallies_;
    return out;
}

LocalTrajectory local_bps_queue(const FactorGraph& graph, const RefreshmentScheme& scheme,
                                const PhaseState& initial, double horizon, RngStream rng) {
    LocalQueueSampler sampler(graph, scheme, initial, horizon, std::move(rng));
    sampler.run();
    return sampler.finish();
}

}  // namespace bps
