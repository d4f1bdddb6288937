#include "bps/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace bps {

namespace {

double segment_moment(double x, double v, double tau, int order) {
    if (order == 1) return x * tau + v * tau * tau / 2.0;
    if (order == 2) return x * x * tau + x * v * tau * tau + v * v * tau * tau * tau / 3.0;
    throw std::invalid_argument("moment order must be 1 or 2");
}

// Accumulates the path integral split into equal-length time batches; the
// generic walker hands over (x_k, v_k, start, duration) pieces in order.
class BatchAccumulator {
  public:
    BatchAccumulator(double horizon, int batches, int order)
        : horizon_(horizon), order_(order), batch_sums_(std::max(1, batches), 0.0) {
        if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
        batch_length_ = horizon_ / static_cast<double>(batch_sums_.size());
    }

    void add(double x, double v, double start, double duration) {
        double t = start;
        const double end = start + duration;
        double pos = x;
        const int batches = static_cast<int>(batch_sums_.size());
        while (t < end) {
            int index = std::min(batches - 1, static_cast<int>(t / batch_length_));
            double boundary = (index + 1) * batch_length_;
            if (boundary <= t) {
                // t sits exactly on a boundary that rounded downwards.
                index = std::min(batches - 1, index + 1);
                boundary = (index + 1) * batch_length_;
            }
            boundary = std::min(boundary, end);
            const double piece = boundary - t;
            if (!(piece > 0.0)) break;
            batch_sums_[index] += segment_moment(pos, v, piece, order_);
            pos += v * piece;
            t = boundary;
        }
    }

    PathEstimate estimate() const {
        const int n = static_cast<int>(batch_sums_.size());
        double total = 0.0;
        for (double s : batch_sums_) total += s;
        PathEstimate out;
        out.value = total / horizon_;
        out.horizon = horizon_;
        if (n > 1) {
            double mean = 0.0;
            for (double s : batch_sums_) mean += s / batch_length_;
            mean /= n;
            double var = 0.0;
            for (double s : batch_sums_) {
                const double d = s / batch_length_ - mean;
                var += d * d;
            }
            var /= (n - 1);
            out.standard_error = std::sqrt(var / n);
        }
        return out;
    }

  private:
    double horizon_;
    int order_;
    double batch_length_;
    std::vector<double> batch_sums_;
};

}  // namespace

PathEstimate path_integral_moment(const Trajectory& trajectory, int coordinate, int order,
                                  int batches) {
    BatchAccumulator acc(trajectory.horizon(), batches, order);
    for (const auto& seg : trajectory.segments()) {
        acc.add(seg.start.position[coordinate], seg.start.velocity[coordinate], seg.start_time,
                seg.duration);
    }
    return acc.estimate();
}

PathEstimate path_integral_moment(const CoordinateEventList& events, double horizon, int order,
                                  int batches) {
    if (events.size() == 0) throw std::invalid_argument("empty event list");
    BatchAccumulator acc(horizon, batches, order);
    const auto& records = events.events();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double end = (i + 1 < records.size()) ? records[i + 1].time : horizon;
        const double duration = end - records[i].time;
        if (duration <= 0.0) continue;
        acc.add(records[i].position, records[i].velocity, records[i].time, duration);
    }
    return acc.estimate();
}

Eigen::MatrixXd discretize(const Trajectory& trajectory, double mesh) {
    if (!(mesh > 0.0)) throw std::invalid_argument("mesh must be positive");
    const long rows = 1 + static_cast<long>(std::floor(trajectory.horizon() / mesh));
    Eigen::MatrixXd samples(rows, trajectory.dimension());
    for (long l = 0; l < rows; ++l) {
        samples.row(l) = trajectory.position_at(std::min(l * mesh, trajectory.horizon()));
    }
    return samples;
}

Eigen::MatrixXd discretize(const LocalTrajectory& trajectory, double mesh) {
    if (!(mesh > 0.0)) throw std::invalid_argument("mesh must be positive");
    const long rows = 1 + static_cast<long>(std::floor(trajectory.horizon / mesh));
    const int d = trajectory.dimension();
    Eigen::MatrixXd samples(rows, d);
    for (int k = 0; k < d; ++k) {
        const auto& list = trajectory.coordinates[k];
        for (long l = 0; l < rows; ++l) {
            samples(l, k) = list.reconstruct(std::min(l * mesh, trajectory.horizon));
        }
    }
    return samples;
}

EssResult effective_sample_size(const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 100) throw std::invalid_argument("need at least 100 samples for batch-means ESS");
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double variance = 0.0;
    for (double s : samples) variance += (s - mean) * (s - mean);
    variance /= (n - 1);
    if (variance == 0.0) return {static_cast<double>(n), true};

    const int batch_size = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    const int batches = n / batch_size;
    double batch_var = 0.0;
    double batch_mean_total = 0.0;
    std::vector<double> batch_means(batches);
    for (int b = 0; b < batches; ++b) {
        double sum = 0.0;
        for (int i = b * batch_size; i < (b + 1) * batch_size; ++i) sum += samples[i];
        batch_means[b] = sum / batch_size;
        batch_mean_total += batch_means[b];
    }
    const double grand = batch_mean_total / batches;
    for (double bm : batch_means) batch_var += (bm - grand) * (bm - grand);
    batch_var /= (batches - 1);
    if (batch_var == 0.0) return {static_cast<double>(n), true};
    return {n * variance / (batch_var * batch_size), false};
}

}  // namespace bps
