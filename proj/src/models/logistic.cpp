#include "bps/models/logistic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bps/errors.hpp"
#include "bps/ppsim.hpp"
#include "bps/sampler.hpp"

namespace bps {

double log1p_exp(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

double logistic_sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

LogisticData load_logistic_data(const std::string& path, double prior_variance) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        for (char& c : line) {
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        }
        std::istringstream fields(line);
        std::vector<double> row;
        double value;
        while (fields >> value) row.push_back(value);
        if (row.size() < 2) throw std::runtime_error("dataset row needs a label and covariates");
        if (!rows.empty() && rows.front().size() != row.size())
            throw std::runtime_error("inconsistent column count in dataset");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty dataset: " + path);

    LogisticData data;
    data.prior_variance = prior_variance;
    const int count = static_cast<int>(rows.size());
    const int dim = static_cast<int>(rows.front().size()) - 1;
    data.covariates.resize(count, dim);
    data.labels.resize(count);
    for (int r = 0; r < count; ++r) {
        const double label = rows[r][0];
        if (label != 0.0 && label != 1.0) throw std::runtime_error("labels must be 0 or 1");
        data.labels[r] = static_cast<int>(label);
        for (int k = 0; k < dim; ++k) {
            const double value = rows[r][k + 1];
            if (value < 0.0) throw std::runtime_error("covariates must be non-negative");
            data.covariates(r, k) = value;
        }
    }
    return data;
}

LogisticData generate_logistic_data(int count, int dimension, double prior_variance,
                                    RngStream& rng) {
    LogisticData data;
    data.prior_variance = prior_variance;
    data.covariates.resize(count, dimension);
    data.labels.resize(count);
    for (int r = 0; r < count; ++r) {
        for (int k = 0; k < dimension; ++k) data.covariates(r, k) = 0.1 + rng.uniform();
    }
    Eigen::VectorXd truth = std::sqrt(prior_variance) * rng.normal_vector(dimension);
    for (int r = 0; r < count; ++r) {
        const double p = logistic_sigmoid(data.covariates.row(r).dot(truth));
        data.labels[r] = rng.uniform() < p ? 1 : 0;
    }
    return data;
}

std::pair<double, Eigen::VectorXd> logistic_energy_grad(const LogisticData& data,
                                                        const Eigen::VectorXd& x) {
    double energy = x.squaredNorm() / (2.0 * data.prior_variance);
    Eigen::VectorXd grad = x / data.prior_variance;
    for (int r = 0; r < data.count(); ++r) {
        const double margin = data.covariates.row(r).dot(x);
        energy += log1p_exp(margin) - data.labels[r] * margin;
        grad += data.covariates.row(r).transpose() *
                (logistic_sigmoid(margin) - data.labels[r]);
    }
    return {energy, std::move(grad)};
}

double logistic_energy(const LogisticData& data, const Eigen::VectorXd& x) {
    double energy = x.squaredNorm() / (2.0 * data.prior_variance);
    for (int r = 0; r < data.count(); ++r) {
        const double margin = data.covariates.row(r).dot(x);
        energy += log1p_exp(margin) - data.labels[r] * margin;
    }
    return energy;
}

Eigen::VectorXd datum_gradient(const LogisticData& data, int r, const Eigen::VectorXd& x) {
    const double margin = data.covariates.row(r).dot(x);
    return data.covariates.row(r).transpose() * (logistic_sigmoid(margin) - data.labels[r]);
}

double per_datum_bound(const LogisticData& data, int r, const Eigen::VectorXd& v) {
    const int sign = data.labels[r] == 0 ? 1 : -1;
    double bound = 0.0;
    for (int k = 0; k < data.dimension(); ++k) {
        if (sign * v[k] >= 0.0) bound += data.covariates(r, k) * std::abs(v[k]);
    }
    return bound;
}

AliasTables::AliasTables(const LogisticData& data) {
    const int d = data.dimension();
    class_sums_ = Eigen::MatrixXd::Zero(d, 2);
    tables_.reserve(2 * d);
    std::vector<double> weights(data.count());
    for (int k = 0; k < d; ++k) {
        for (int label = 0; label < 2; ++label) {
            for (int r = 0; r < data.count(); ++r) {
                weights[r] = data.labels[r] == label ? data.covariates(r, k) : 0.0;
                class_sums_(k, label) += weights[r];
            }
            tables_.emplace_back(weights);
        }
    }
}

double AliasTables::total_bound(const Eigen::VectorXd& v) const {
    double total = 0.0;
    for (int k = 0; k < dimension(); ++k) {
        total += std::abs(v[k]) * class_sums_(k, v[k] < 0.0 ? 1 : 0);
    }
    return total;
}

AliasTables precompute_alias(const LogisticData& data) { return AliasTables(data); }

int sample_thinned_factor(const AliasTables& tables, const Eigen::VectorXd& v, RngStream& rng) {
    const double total = tables.total_bound(v);
    if (!(total > 0.0)) throw std::logic_error("no datum can fire for this velocity");
    double u = rng.uniform() * total;
    int coordinate = tables.dimension() - 1;
    for (int k = 0; k < tables.dimension(); ++k) {
        const double weight = std::abs(v[k]) * tables.class_sum(k, v[k] < 0.0 ? 1 : 0);
        if (u < weight) {
            coordinate = k;
            break;
        }
        u -= weight;
    }
    const int label = v[coordinate] < 0.0 ? 1 : 0;
    return tables.table(coordinate, label).sample(rng);
}

LocalTrajectory logistic_local_bps(const LogisticData& data, double refresh_rate, double delta,
                                   const PhaseState& initial, double horizon, RngStream rng,
                                   LogisticTallies* tallies_out) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (refresh_rate < 0.0) throw std::invalid_argument("negative refresh rate");
    if (!(data.prior_variance > 0.0)) throw std::invalid_argument("prior variance must be positive");
    const int d = data.dimension();
    if (initial.position.size() != d || initial.velocity.size() != d)
        throw std::invalid_argument("state dimension does not match the data");

    const AliasTables tables(data);
    const double sigma_inv_sq = 1.0 / data.prior_variance;

    Eigen::VectorXd x = initial.position;
    Eigen::VectorXd v = initial.velocity;
    LocalTrajectory out;
    out.horizon = horizon;
    out.coordinates.reserve(d);
    for (int k = 0; k < d; ++k) out.coordinates.emplace_back(x[k], v[k]);
    LogisticTallies tallies;

    double clock = 0.0;
    double window_end = delta;
    // The prior rate along the ray is monotonically increasing, so its value
    // at the window end bounds the window.
    auto prior_bound_for = [&](double validity) {
        return sigma_inv_sq * std::max(0.0, (x + validity * v).dot(v));
    };
    double prior_bound = prior_bound_for(delta);

    auto record_all = [&]() {
        for (int k = 0; k < d; ++k) out.coordinates[k].append(x[k], v[k], clock);
    };

    while (clock < horizon) {
        const double data_bound = tables.total_bound(v);
        const double total = prior_bound + data_bound + refresh_rate;
        const double tau = rng.exponential(total);
        if (clock + tau > window_end) {
            if (window_end >= horizon) break;
            x += v * (window_end - clock);
            clock = window_end;
            window_end += delta;
            prior_bound = prior_bound_for(delta);
            ++tallies.window_advances;
            continue;
        }
        if (clock + tau >= horizon) break;
        x += v * tau;
        clock += tau;

        const double pick = rng.uniform() * total;
        if (pick < data_bound) {
            const int r = sample_thinned_factor(tables, v, rng);
            const double datum_bound = per_datum_bound(data, r, v);
            const Eigen::VectorXd grad = datum_gradient(data, r, x);
            ++tallies.datum_gradient_evaluations;
            ++tallies.data_candidates;
            const double rate = std::max(0.0, grad.dot(v));
            if (exceeds_bound(rate, datum_bound))
                throw BoundViolationError("datum intensity exceeds its bound");
            if (datum_bound > 0.0 && rng.uniform_open() * datum_bound < rate) {
                v = reflect(grad, v);
                record_all();
                out.events.push_back({clock, EventKind::Bounce, r});
                ++tallies.data_bounces;
            }
        } else if (pick < data_bound + refresh_rate) {
            v = rng.normal_vector(d);
            record_all();
            out.refresh_times.push_back(clock);
            out.events.push_back({clock, EventKind::Refresh, -1});
            ++tallies.refreshes;
        } else {
            // Prior candidate.
            ++tallies.prior_candidates;
            const double rate = sigma_inv_sq * std::max(0.0, x.dot(v));
            if (exceeds_bound(rate, prior_bound))
                throw BoundViolationError("prior intensity exceeds its window bound");
            if (prior_bound > 0.0 && rng.uniform_open() * prior_bound < rate) {
                v = reflect(x, v);
                record_all();
                // The prior factor sits one past the datum indices.
                out.events.push_back({clock, EventKind::Bounce, data.count()});
                ++tallies.prior_bounces;
            }
        }
        prior_bound = prior_bound_for(window_end - clock);
    }

    out.tallies.bounces = tallies.data_bounces + tallies.prior_bounces;
    out.tallies.refreshes = tallies.refreshes;
    out.tallies.candidates = tallies.data_candidates + tallies.prior_candidates;
    out.tallies.rejections = out.tallies.candidates - out.tallies.bounces;
    out.tallies.window_advances = tallies.window_advances;
    if (tallies_out) *tallies_out = tallies;
    return out;
}

}  // namespace bps
