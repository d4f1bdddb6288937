#include "bps/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bps {

Trajectory::Trajectory(std::vector<TrajectorySegment> segments, double horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
    if (segments_.empty()) throw std::invalid_argument("trajectory needs at least one segment");
}

int Trajectory::dimension() const {
    return static_cast<int>(segments_.front().start.position.size());
}

const TrajectorySegment& Trajectory::segment_containing(double t) const {
    if (t < 0.0 || t > horizon_) throw std::out_of_range("time outside [0, horizon]");
    // Last segment whose start time is <= t.
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double value, const TrajectorySegment& seg) {
                                   return value < seg.start_time;
                               });
    if (it == segments_.begin()) throw std::out_of_range("time precedes the first segment");
    return *(it - 1);
}

Eigen::VectorXd Trajectory::position_at(double t) const {
    const TrajectorySegment& seg = segment_containing(t);
    return seg.start.position + (t - seg.start_time) * seg.start.velocity;
}

const Eigen::VectorXd& Trajectory::velocity_at(double t) const {
    return segment_containing(t).start.velocity;
}

EventTallies Trajectory::tallies() const {
    EventTallies tallies;
    for (const auto& seg : segments_) {
        if (seg.terminator == EventKind::Bounce) ++tallies.bounces;
        if (seg.terminator == EventKind::Refresh) ++tallies.refreshes;
    }
    return tallies;
}

double Trajectory::max_connectedness_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        const auto& seg = segments_[i];
        const Eigen::VectorXd end = seg.start.position + seg.duration * seg.start.velocity;
        worst = std::max(worst, (segments_[i + 1].start.position - end).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

double segment_min_norm(const PhaseState& start, double duration) {
    const double speed_sq = start.velocity.squaredNorm();
    double t_min = 0.0;
    if (speed_sq > 0.0) {
        t_min = std::clamp(-start.position.dot(start.velocity) / speed_sq, 0.0, duration);
    }
    return (start.position + t_min * start.velocity).norm();
}

double min_path_norm(const Trajectory& trajectory) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : trajectory.segments()) {
        best = std::min(best, segment_min_norm(seg.start, seg.duration));
    }
    return best;
}

}  // namespace bps
