#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "bps/factor_graph.hpp"
#include "bps/refresh.hpp"
#include "bps/rng.hpp"
#include "bps/trajectory.hpp"

namespace bps {

struct LocalTallies {
    std::uint64_t bounces = 0;
    std::uint64_t refreshes = 0;
    std::uint64_t candidates = 0;        // thinning: acceptance tests run
    std::uint64_t rejections = 0;        // thinning: rejected candidates
    std::uint64_t window_advances = 0;   // thinning: bound windows refreshed
    std::uint64_t candidates_simulated = 0;  // queue: factor arrivals drawn
};

// Confirmed event of a local run; factor is -1 except for bounces and local
// refreshments, which record the factor whose block changed.
struct LocalEvent {
    double time = 0.0;
    EventKind kind = EventKind::Bounce;
    int factor = -1;
};

// Sparse per-coordinate output of the local samplers.
struct LocalTrajectory {
    double horizon = 0.0;
    std::vector<CoordinateEventList> coordinates;
    std::vector<double> refresh_times;
    std::vector<LocalEvent> events;
    LocalTallies tallies;

    int dimension() const { return static_cast<int>(coordinates.size()); }
    double coordinate_at(int k, double t) const { return coordinates[k].reconstruct(t); }
    Eigen::VectorXd position_at(double t) const;
};

// Called after every confirmed bounce with the pre- and post-event velocity
// vectors; used by tests to check the sparsity contract bit for bit.
using BounceObserver =
    std::function<void(int factor, double time, const Eigen::VectorXd& v_before,
                       const Eigen::VectorXd& v_after)>;

// Priority-queue local BPS: one candidate bounce time per factor, bounces
// touch a factor's block and resimulate only overlapping factors; global
// refreshments rebuild the whole queue, local refreshments only the affected
// adjacency set.
class LocalQueueSampler {
  public:
    LocalQueueSampler(const FactorGraph& graph, RefreshmentScheme scheme, PhaseState initial,
                      double horizon, RngStream rng);

    // Advance one event; false once the horizon is reached.
    bool step();
    void run();

    double clock() const { return clock_; }
    double candidate(int factor) const { return queue_.candidate(factor); }
    double next_refresh() const { return next_refresh_; }
    const std::vector<CoordinateEventList>& lists() const { return lists_; }
    const Eigen::VectorXd& velocity() const { return velocity_; }
    const LocalTallies& tallies() const { return tallies_; }

    void set_bounce_observer(BounceObserver observer) { observer_ = std::move(observer); }

    LocalTrajectory finish();

  private:
    Eigen::VectorXd gather_position(int factor, double t) const;
    Eigen::VectorXd gather_velocity(int factor) const;
    void resimulate(int factor);
    void rebuild_queue();

    const FactorGraph& graph_;
    RefreshmentScheme scheme_;
    double horizon_;
    RngStream rng_;
    std::vector<CoordinateEventList> lists_;
    Eigen::VectorXd velocity_;
    CandidateQueue queue_;
    double clock_ = 0.0;
    double next_refresh_ = 0.0;
    std::vector<double> refresh_times_;
    std::vector<LocalEvent> events_;
    LocalTallies tallies_;
    BounceObserver observer_;
    bool done_ = false;
};

LocalTrajectory local_bps_queue(const FactorGraph& graph, const RefreshmentScheme& scheme,
                                const PhaseState& initial, double horizon, RngStream rng);

// Thinning local BPS: a global Exp(sum of factor bounds) clock inside bound
// windows of length delta, factor selection proportional to its bound and an
// exact acceptance test. refresh_rate splices a Gaussian refreshment clock
// into the total rate. minibatch > 1 runs the uniform-bound variant: s
// factors drawn without replacement, accepted against the summed gradient;
// it requires graph.uniform_bound_provider.
struct ThinningSettings {
    double delta = 1.0;
    double refresh_rate = 0.0;
    int minibatch = 1;
};

class LocalThinningSampler {
  public:
    LocalThinningSampler(const FactorGraph& graph, ThinningSettings settings,
                         PhaseState initial, double horizon, RngStream rng);
    ~LocalThinningSampler();

    bool step();
    void run();

    double clock() const { return clock_; }
    double window_end() const { return window_end_; }
    double bound(int factor) const;
    double total_bound() const;
    const Eigen::VectorXd& position() const { return position_; }
    const Eigen::VectorXd& velocity() const { return velocity_; }
    const LocalTallies& tallies() const { return tallies_; }

    void set_bounce_observer(BounceObserver observer) { observer_ = std::move(observer); }

    LocalTrajectory finish();

    class FactorSelector;

  private:
    void refresh_all_bounds(double validity);
    void refresh_bound(int factor, double validity);
    void record_block(const std::vector<int>& coordinates);
    int sample_factor();

    const FactorGraph& graph_;
    ThinningSettings settings_;
    double horizon_;
    RngStream rng_;
    std::vector<CoordinateEventList> lists_;
    Eigen::VectorXd position_;
    Eigen::VectorXd velocity_;
    double clock_ = 0.0;
    double window_end_ = 0.0;
    std::vector<double> bounds_;     // per-factor (minibatch == 1)
    double uniform_bound_ = 0.0;     // common Lambda (minibatch > 1)
    std::vector<double> refresh_times_;
    std::vector<LocalEvent> events_;
    LocalTallies tallies_;
    BounceObserver observer_;
    bool done_ = false;
    std::unique_ptr<FactorSelector> selector_;
};

LocalTrajectory local_bps_thinning(const FactorGraph& graph, double delta, double refresh_rate,
                                   const PhaseState& initial, double horizon, RngStream rng,
                                   int minibatch = 1);

// One factor chosen uniformly; its block is resampled standard normal. The
// affected set is the chosen factor's adjacency, whose candidates must be
// resimulated.
struct LocalRefreshResult {
    int factor = -1;
    Eigen::VectorXd velocity;
    std::vector<int> affected;
};

LocalRefreshResult local_refresh(const FactorGraph& graph, const Eigen::VectorXd& v,
                                 RngStream& rng);

}  // namespace bps
