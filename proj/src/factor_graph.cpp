#include "bps/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bps/errors.hpp"

namespace bps {

FactorGraph::FactorGraph(int dimension, std::vector<Factor> factors)
    : dimension_(dimension), factors_(std::move(factors)) {
    if (dimension_ <= 0) throw std::invalid_argument("dimension must be positive");
    std::vector<char> covered(dimension_, 0);
    std::vector<std::vector<int>> factors_of_coordinate(dimension_);
    for (int f = 0; f < factor_count(); ++f) {
        if (factors_[f].neighborhood.empty())
            throw std::invalid_argument("factor with empty neighborhood");
        for (int k : factors_[f].neighborhood) {
            if (k < 0 || k >= dimension_) throw std::invalid_argument("coordinate out of range");
            covered[k] = 1;
            factors_of_coordinate[k].push_back(f);
        }
    }
    for (int k = 0; k < dimension_; ++k) {
        if (!covered[k])
            throw std::invalid_argument("every coordinate must belong to at least one factor");
    }
    adjacency_.resize(factor_count());
    for (int f = 0; f < factor_count(); ++f) {
        std::vector<char> seen(factor_count(), 0);
        for (int k : factors_[f].neighborhood) {
            for (int g : factors_of_coordinate[k]) seen[g] = 1;
        }
        for (int g = 0; g < factor_count(); ++g) {
            if (seen[g]) adjacency_[f].push_back(g);
        }
    }
}

Eigen::VectorXd FactorGraph::gather(int f, const Eigen::VectorXd& full) const {
    const auto& hood = factors_[f].neighborhood;
    Eigen::VectorXd local(hood.size());
    for (std::size_t i = 0; i < hood.size(); ++i) local[i] = full[hood[i]];
    return local;
}

double FactorGraph::energy(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (int f = 0; f < factor_count(); ++f) total += factors_[f].energy(gather(f, x));
    return total;
}

Eigen::VectorXd FactorGraph::gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dimension_);
    for (int f = 0; f < factor_count(); ++f) {
        const Eigen::VectorXd local = factors_[f].gradient(gather(f, x));
        const auto& hood = factors_[f].neighborhood;
        for (std::size_t i = 0; i < hood.size(); ++i) grad[hood[i]] += local[i];
    }
    return grad;
}

double local_intensity(const Factor& factor, const Eigen::VectorXd& x_local,
                       const Eigen::VectorXd& v_local) {
    return std::max(0.0, factor.gradient(x_local).dot(v_local));
}

Eigen::VectorXd local_reflect(const Factor& factor, const Eigen::VectorXd& x_local,
                              const Eigen::VectorXd& v_full) {
    const Eigen::VectorXd grad = factor.gradient(x_local);
    const double grad_sq = grad.squaredNorm();
    if (grad_sq == 0.0) throw DegenerateBounceError("local reflection against a zero gradient");
    Eigen::VectorXd v_local(factor.neighborhood.size());
    for (std::size_t i = 0; i < factor.neighborhood.size(); ++i)
        v_local[i] = v_full[factor.neighborhood[i]];
    const double scale = 2.0 * grad.dot(v_local) / grad_sq;
    Eigen::VectorXd out = v_full;
    for (std::size_t i = 0; i < factor.neighborhood.size(); ++i)
        out[factor.neighborhood[i]] = v_local[i] - scale * grad[i];
    return out;
}

void CoordinateEventList::append(double position, double velocity, double time) {
    if (!events_.empty() && !(time > events_.back().time))
        throw std::invalid_argument("event times must be strictly increasing");
    events_.push_back({position, velocity, time});
}

double CoordinateEventList::reconstruct(double t) const {
    if (events_.empty() || t < events_.front().time)
        throw std::out_of_range("time precedes the first recorded event");
    auto it = std::upper_bound(events_.begin(), events_.end(), t,
                               [](double value, const CoordinateEvent& e) {
                                   return value < e.time;
                               });
    const CoordinateEvent& rec = *(it - 1);
    return rec.position + (t - rec.time) * rec.velocity;
}

double CoordinateEventList::velocity_at(double t) const {
    if (events_.empty() || t < events_.front().time)
        throw std::out_of_range("time precedes the first recorded event");
    auto it = std::upper_bound(events_.begin(), events_.end(), t,
                               [](double value, const CoordinateEvent& e) {
                                   return value < e.time;
                               });
    return (it - 1)->velocity;
}

double CoordinateEventList::max_consistency_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < events_.size(); ++i) {
        const double predicted =
            events_[i].position + events_[i].velocity * (events_[i + 1].time - events_[i].time);
        worst = std::max(worst, std::abs(events_[i + 1].position - predicted));
    }
    return worst;
}

double reconstruct_coordinate(const CoordinateEventList& events, double t) {
    return events.reconstruct(t);
}

CandidateQueue::CandidateQueue(int factor_count)
    : heap_(factor_count), position_(factor_count),
      times_(factor_count, std::numeric_limits<double>::infinity()) {
    for (int f = 0; f < factor_count; ++f) {
        heap_[f] = f;
        position_[f] = f;
    }
}

bool CandidateQueue::precedes(int slot_a, int slot_b) const {
    const int fa = heap_[slot_a];
    const int fb = heap_[slot_b];
    if (times_[fa] != times_[fb]) return times_[fa] < times_[fb];
    return fa < fb;
}

void CandidateQueue::sift_up(int slot) {
    while (slot > 0) {
        const int parent = (slot - 1) / 2;
        if (!precedes(slot, parent)) break;
        std::swap(heap_[slot], heap_[parent]);
        position_[heap_[slot]] = slot;
        position_[heap_[parent]] = parent;
        slot = parent;
    }
}

void CandidateQueue::sift_down(int slot) {
    const int n = static_cast<int>(heap_.size());
    for (;;) {
        int smallest = slot;
        const int left = 2 * slot + 1;
        const int right = 2 * slot + 2;
        if (left < n && precedes(left, smallest)) smallest = left;
        if (right < n && precedes(right, smallest)) smallest = right;
        if (smallest == slot) break;
        std::swap(heap_[slot], heap_[smallest]);
        position_[heap_[slot]] = slot;
        position_[heap_[smallest]] = smallest;
        slot = smallest;
    }
}

void CandidateQueue::update(int factor, double time) {
    times_[factor] = time;
    const int slot = position_[factor];
    sift_up(slot);
    sift_down(position_[factor]);
}

std::pair<double, int> CandidateQueue::min() const {
    if (heap_.empty()) throw std::logic_error("empty candidate queue");
    const int f = heap_.front();
    return {times_[f], f};
}

}  // namespace bps
