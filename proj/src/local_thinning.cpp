#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bps/alias.hpp"
#include "bps/errors.hpp"
#include "bps/local_bps.hpp"
#include "bps/ppsim.hpp"
#include "bps/sampler.hpp"

namespace bps {

// Factor selection proportional to the current bounds. Small graphs rebuild a
// Walker alias table whenever a bound changes; larger ones keep a sum tree
// with logarithmic updates.
class LocalThinningSampler::FactorSelector {
  public:
    virtual ~FactorSelector() = default;
    virtual void rebuild(const std::vector<double>& weights) = 0;
    virtual void set(int index, double weight) = 0;
    virtual double total() const = 0;
    virtual int sample(RngStream& rng) = 0;
};

namespace {

constexpr int kAliasFactorLimit = 64;

class AliasSelector : public LocalThinningSampler::FactorSelector {
  public:
    void rebuild(const std::vector<double>& weights) override {
        weights_ = weights;
        dirty_ = true;
    }
    void set(int index, double weight) override {
        weights_[index] = weight;
        dirty_ = true;
    }
    double total() const override {
        double sum = 0.0;
        for (double w : weights_) sum += w;
        return sum;
    }
    int sample(RngStream& rng) override {
        if (dirty_) {
            table_ = AliasTable(weights_);
            dirty_ = false;
        }
        return table_.sample(rng);
    }

  private:
    std::vector<double> weights_;
    AliasTable table_;
    bool dirty_ = true;
};

class SumTreeSelector : public LocalThinningSampler::FactorSelector {
  public:
    void rebuild(const std::vector<double>& weights) override {
        count_ = static_cast<int>(weights.size());
        base_ = 1;
        while (base_ < count_) base_ *= 2;
        tree_.assign(2 * base_, 0.0);
        for (int i = 0; i < count_; ++i) tree_[base_ + i] = weights[i];
        for (int i = base_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
    }
    void set(int index, double weight) override {
        int node = base_ + index;
        tree_[node] = weight;
        for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    }
    double total() const override { return tree_.empty() ? 0.0 : tree_[1]; }
    int sample(RngStream& rng) override {
        const double sum = total();
        if (sum <= 0.0) throw std::logic_error("sampling from an empty distribution");
        double u = rng.uniform() * sum;
        int node = 1;
        while (node < base_) {
            const double left = tree_[2 * node];
            if (u < left) {
                node = 2 * node;
            } else {
                u -= left;
                node = 2 * node + 1;
            }
        }
        int index = node - base_;
        if (index >= count_ || tree_[node] <= 0.0) {
            // Rounding pushed the search past the last positive weight.
            for (index = count_ - 1; index > 0 && tree_[base_ + index] <= 0.0; --index) {
            }
        }
        return index;
    }

  private:
    std::vector<double> tree_;
    int base_ = 1;
    int count_ = 0;
};

}  // namespace

LocalThinningSampler::~LocalThinningSampler() = default;

LocalThinningSampler::LocalThinningSampler(const FactorGraph& graph, ThinningSettings settings,
                                           PhaseState initial, double horizon, RngStream rng)
    : graph_(graph),
      settings_(settings),
      horizon_(horizon),
      rng_(std::move(rng)),
      position_(std::move(initial.position)),
      velocity_(std::move(initial.velocity)) {
    if (!(horizon_ > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(settings_.delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (settings_.refresh_rate < 0.0) throw std::invalid_argument("negative refresh rate");
    if (position_.size() != graph_.dimension() || velocity_.size() != graph_.dimension())
        throw std::invalid_argument("state dimension does not match the graph");
    if (settings_.minibatch < 1) throw std::invalid_argument("minibatch must be at least 1");
    if (settings_.minibatch > 1) {
        if (!graph_.uniform_bound_provider)
            throw std::invalid_argument(
                "minibatch > 1 requires a graph-wide uniform bound (all factor bounds equal)");
        if (settings_.minibatch > graph_.factor_count())
            throw std::invalid_argument("minibatch exceeds the factor count");
    } else {
        for (const auto& factor : graph_.factors()) {
            if (!factor.bound_provider)
                throw std::invalid_argument("thinning requires a bound provider per factor");
        }
        bounds_.assign(graph_.factor_count(), 0.0);
        if (graph_.factor_count() <= kAliasFactorLimit) {
            selector_ = std::make_unique<AliasSelector>();
        } else {
            selector_ = std::make_unique<SumTreeSelector>();
        }
    }
    lists_.reserve(graph_.dimension());
    for (int k = 0; k < graph_.dimension(); ++k)
        lists_.emplace_back(position_[k], velocity_[k]);
    window_end_ = settings_.delta;
    refresh_all_bounds(settings_.delta);
}

double LocalThinningSampler::bound(int factor) const {
    return settings_.minibatch == 1 ? bounds_[factor] : uniform_bound_;
}

double LocalThinningSampler::total_bound() const {
    return settings_.minibatch == 1 ? selector_->total()
                                    : graph_.factor_count() * uniform_bound_;
}

void LocalThinningSampler::refresh_bound(int factor, double validity) {
    const Factor& f = graph_.factors()[factor];
    Eigen::VectorXd x_local(f.neighborhood.size());
    Eigen::VectorXd v_local(f.neighborhood.size());
    for (std::size_t i = 0; i < f.neighborhood.size(); ++i) {
        x_local[i] = position_[f.neighborhood[i]];
        v_local[i] = velocity_[f.neighborhood[i]];
    }
    const double value = f.bound_provider(x_local, v_local, validity);
    if (!(value >= 0.0)) throw std::invalid_argument("factor bound must be non-negative");
    bounds_[factor] = value;
    selector_->set(factor, value);
}

void LocalThinningSampler::refresh_all_bounds(double validity) {
    if (settings_.minibatch > 1) {
        uniform_bound_ = graph_.uniform_bound_provider(position_, velocity_, validity);
        if (!(uniform_bound_ >= 0.0))
            throw std::invalid_argument("uniform bound must be non-negative");
        return;
    }
    for (int f = 0; f < graph_.factor_count(); ++f) {
        const Factor& factor = graph_.factors()[f];
        Eigen::VectorXd x_local(factor.neighborhood.size());
        Eigen::VectorXd v_local(factor.neighborhood.size());
        for (std::size_t i = 0; i < factor.neighborhood.size(); ++i) {
            x_local[i] = position_[factor.neighborhood[i]];
            v_local[i] = velocity_[factor.neighborhood[i]];
        }
        bounds_[f] = factor.bound_provider(x_local, v_local, validity);
        if (!(bounds_[f] >= 0.0)) throw std::invalid_argument("factor bound must be non-negative");
    }
    selector_->rebuild(bounds_);
}

void LocalThinningSampler::record_block(const std::vector<int>& coordinates) {
    for (int k : coordinates) lists_[k].append(position_[k], velocity_[k], clock_);
}

int LocalThinningSampler::sample_factor() { return selector_->sample(rng_); }

bool LocalThinningSampler::step() {
    if (done_) return false;
    const double total = total_bound() + settings_.refresh_rate;
    const double tau = rng_.exponential(total);
    const double candidate_time = clock_ + tau;
    if (candidate_time > window_end_) {
        if (window_end_ >= horizon_) {
            done_ = true;
            return false;
        }
        position_ += velocity_ * (window_end_ - clock_);
        clock_ = window_end_;
        window_end_ += settings_.delta;
        refresh_all_bounds(settings_.delta);
        ++tallies_.window_advances;
        return true;
    }
    if (candidate_time >= horizon_) {
        done_ = true;
        return false;
    }
    position_ += velocity_ * tau;
    clock_ = candidate_time;

    const double pick = rng_.uniform() * total;
    if (pick < settings_.refresh_rate) {
        velocity_ = rng_.normal_vector(graph_.dimension());
        std::vector<int> all(graph_.dimension());
        for (int k = 0; k < graph_.dimension(); ++k) all[k] = k;
        record_block(all);
        refresh_all_bounds(window_end_ - clock_);
        refresh_times_.push_back(clock_);
        events_.push_back({clock_, EventKind::Refresh, -1});
        ++tallies_.refreshes;
        return true;
    }

    if (settings_.minibatch == 1) {
        const int factor = sample_factor();
        const Factor& f = graph_.factors()[factor];
        Eigen::VectorXd x_local(f.neighborhood.size());
        Eigen::VectorXd v_local(f.neighborhood.size());
        for (std::size_t i = 0; i < f.neighborhood.size(); ++i) {
            x_local[i] = position_[f.neighborhood[i]];
            v_local[i] = velocity_[f.neighborhood[i]];
        }
        const double rate = local_intensity(f, x_local, v_local);
        const double factor_bound = bounds_[factor];
        if (exceeds_bound(rate, factor_bound))
            throw BoundViolationError("local intensity exceeds its factor bound");
        ++tallies_.candidates;
        if (factor_bound > 0.0 && rng_.uniform_open() * factor_bound < rate) {
            Eigen::VectorXd v_before;
            if (observer_) v_before = velocity_;
            velocity_ = local_reflect(f, x_local, velocity_);
            record_block(f.neighborhood);
            if (observer_) observer_(factor, clock_, v_before, velocity_);
            events_.push_back({clock_, EventKind::Bounce, factor});
            ++tallies_.bounces;
            for (int adjacent : graph_.adjacency(factor))
                refresh_bound(adjacent, window_end_ - clock_);
        } else {
            ++tallies_.rejections;
        }
        return true;
    }

    // Uniform-bound variant: a minibatch of factors drawn uniformly without
    // replacement, accepted against the summed gradient.
    const int factor_count = graph_.factor_count();
    const int s = settings_.minibatch;
    std::vector<int> batch;
    batch.reserve(s);
    for (int j = factor_count - s; j < factor_count; ++j) {
        const int t = std::min(j, static_cast<int>(rng_.uniform() * (j + 1)));
        if (std::find(batch.begin(), batch.end(), t) != batch.end()) {
            batch.push_back(j);
        } else {
            batch.push_back(t);
        }
    }
    Eigen::VectorXd summed_gradient = Eigen::VectorXd::Zero(graph_.dimension());
    std::vector<int> touched;
    for (int member : batch) {
        const Factor& f = graph_.factors()[member];
        Eigen::VectorXd x_local(f.neighborhood.size());
        for (std::size_t i = 0; i < f.neighborhood.size(); ++i)
            x_local[i] = position_[f.neighborhood[i]];
        const Eigen::VectorXd grad = f.gradient(x_local);
        for (std::size_t i = 0; i < f.neighborhood.size(); ++i) {
            const int k = f.neighborhood[i];
            if (summed_gradient[k] == 0.0) touched.push_back(k);
            summed_gradient[k] += grad[i];
        }
    }
    const double numerator = std::max(0.0, summed_gradient.dot(velocity_));
    if (exceeds_bound(numerator, s * uniform_bound_))
        throw BoundViolationError("minibatch intensity exceeds s times the uniform bound");
    ++tallies_.candidates;
    if (uniform_bound_ > 0.0 && rng_.uniform_open() * (s * uniform_bound_) < numerator) {
        Eigen::VectorXd v_before;
        if (observer_) v_before = velocity_;
        velocity_ = reflect(summed_gradient, velocity_);
        std::sort(touched.begin(), touched.end());
        record_block(touched);
        if (observer_) observer_(batch.front(), clock_, v_before, velocity_);
        events_.push_back({clock_, EventKind::Bounce, batch.front()});
        ++tallies_.bounces;
        refresh_all_bounds(window_end_ - clock_);
    } else {
        ++tallies_.rejections;
    }
    return true;
}

void LocalThinningSampler::run() {
    while (step()) {
    }
}

LocalTrajectory LocalThinningSampler::finish() {
    LocalTrajectory out;
    out.horizon = horizon_;
    out.coordinates = std::move(lists_);
    out.refresh_times = std::move(refresh_times_);
    out.events = std::move(events_);
    out.tallies = tallies_;
    return out;
}

LocalTrajectory local_bps_thinning(const FactorGraph& graph, double delta, double refresh_rate,
                                   const PhaseState& initial, double horizon, RngStream rng,
                                   int minibatch) {
    ThinningSettings settings;
    settings.delta = delta;
    settings.refresh_rate = refresh_rate;
    settings.minibatch = minibatch;
    LocalThinningSampler sampler(graph, settings, initial, horizon, std::move(rng));
    sampler.run();
    return sampler.finish();
}

}  // namespace bps
