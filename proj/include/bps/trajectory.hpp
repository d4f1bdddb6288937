#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bps {

// Instantaneous sampler state z = (x, v).
struct PhaseState {
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;
};

// Event terminating a linear segment.
enum class EventKind { Bounce, Refresh, Horizon };

// One straight piece of the piecewise-linear path. `terminator` is the event
// ending the segment; the last segment of a run is cut at the horizon.
struct TrajectorySegment {
    double start_time = 0.0;
    double duration = 0.0;
    PhaseState start;
    EventKind terminator = EventKind::Horizon;
};

struct EventTallies {
    std::uint64_t bounces = 0;
    std::uint64_t refreshes = 0;
};

// Piecewise-linear path record over [0, horizon]; consecutive segments share
// endpoints.
class Trajectory {
  public:
    Trajectory() = default;
    Trajectory(std::vector<TrajectorySegment> segments, double horizon);

    const std::vector<TrajectorySegment>& segments() const { return segments_; }
    double horizon() const { return horizon_; }
    int dimension() const;

    // Linear interpolation within the segment containing t; throws outside
    // [0, horizon].
    Eigen::VectorXd position_at(double t) const;
    const Eigen::VectorXd& velocity_at(double t) const;

    EventTallies tallies() const;

    // Largest endpoint mismatch between consecutive segments.
    double max_connectedness_error() const;

  private:
    const TrajectorySegment& segment_containing(double t) const;

    std::vector<TrajectorySegment> segments_;
    double horizon_ = 0.0;
};

// Minimum of ||x + v t|| over t in [0, duration], in closed form.
double segment_min_norm(const PhaseState& start, double duration);

// Minimum of ||x(t)|| over the whole continuous path.
double min_path_norm(const Trajectory& trajectory);

}  // namespace bps
