#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bps/rng.hpp"

namespace bps {

// One factor of a product-form target. Energies and gradients see only the
// coordinates in the neighborhood, in neighborhood order, so the zero-partial
// property for absent coordinates holds structurally.
struct Factor {
    std::vector<int> neighborhood;
    std::function<double(const Eigen::VectorXd&)> energy;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    // First arrival of the factor's local intensity along the ray
    // (x_f + t v_f, v_f), bounded by the horizon. Required by the queue
    // sampler.
    std::function<std::optional<double>(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                        RngStream&, double)>
        bounce_sampler;
    // Constant bound dominating the local intensity on [0, delta) from the
    // given local state. Required by the thinning sampler (s = 1).
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>
        bound_provider;
};

class FactorGraph {
  public:
    FactorGraph(int dimension, std::vector<Factor> factors);

    int dimension() const { return dimension_; }
    const std::vector<Factor>& factors() const { return factors_; }
    int factor_count() const { return static_cast<int>(factors_.size()); }
    // Factors whose neighborhoods intersect factor f's (always includes f).
    const std::vector<int>& adjacency(int f) const { return adjacency_[f]; }

    Eigen::VectorXd gather(int f, const Eigen::VectorXd& full) const;
    double energy(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

    // Common time-uniform-in-structure bound Lambda valid for EVERY factor on
    // [0, delta) from (x, v). Present only on models that support the
    // uniform-bound thinning variant (minibatch s > 1).
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>
        uniform_bound_provider;

  private:
    int dimension_;
    std::vector<Factor> factors_;
    std::vector<std::vector<int>> adjacency_;
};

// Local intensity max(0, <grad U_f(x_f), v_f>) over the factor's coordinates.
double local_intensity(const Factor& factor, const Eigen::VectorXd& x_local,
                       const Eigen::VectorXd& v_local);

// Reflection touching only the factor's block; coordinates outside the
// neighborhood are returned bitwise unchanged.
Eigen::VectorXd local_reflect(const Factor& factor, const Eigen::VectorXd& x_local,
                              const Eigen::VectorXd& v_full);

// Sparse per-coordinate event history: (position, velocity, time) triplets
// with strictly increasing times, t^(0) = 0.
struct CoordinateEvent {
    double position = 0.0;
    double velocity = 0.0;
    double time = 0.0;
};

class CoordinateEventList {
  public:
    CoordinateEventList() = default;
    CoordinateEventList(double position, double velocity) {
        events_.push_back({position, velocity, 0.0});
    }

    void append(double position, double velocity, double time);
    const std::vector<CoordinateEvent>& events() const { return events_; }
    const CoordinateEvent& last() const { return events_.back(); }
    std::size_t size() const { return events_.size(); }

    // Position at time t from the latest record at or before t; throws if t
    // precedes the first record.
    double reconstruct(double t) const;
    double velocity_at(double t) const;

    // Largest violation of x^(i+1) = x^(i) + v^(i) (t^(i+1) - t^(i)).
    double max_consistency_error() const;

  private:
    std::vector<CoordinateEvent> events_;
};

double reconstruct_coordinate(const CoordinateEventList& events, double t);

// Addressable min-priority queue keyed by factor id with exactly one live
// candidate per factor; find-min and per-factor updates in O(log F).
class CandidateQueue {
  public:
    explicit CandidateQueue(int factor_count);

    void update(int factor, double time);
    double candidate(int factor) const { return times_[factor]; }
    std::pair<double, int> min() const;
    int size() const { return static_cast<int>(heap_.size()); }

  private:
    bool precedes(int slot_a, int slot_b) const;
    void sift_up(int slot);
    void sift_down(int slot);

    std::vector<int> heap_;      // heap of factor ids ordered by times_
    std::vector<int> position_;  // factor id -> heap slot
    std::vector<double> times_;
};

}  // namespace bps
