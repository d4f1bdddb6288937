#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bps/alias.hpp"
#include "bps/local_bps.hpp"
#include "bps/rng.hpp"
#include "bps/trajectory.hpp"

namespace bps {

// Bayesian logistic regression with non-negative covariates and an isotropic
// Gaussian prior of variance prior_variance.
struct LogisticData {
    Eigen::MatrixXd covariates;  // R x d, all entries >= 0
    std::vector<int> labels;     // in {0, 1}
    double prior_variance = 1.0;

    int count() const { return static_cast<int>(covariates.rows()); }
    int dimension() const { return static_cast<int>(covariates.cols()); }
};

// Delimiter-separated text, one row per datum: label column then d covariate
// columns. Validates labels and covariate non-negativity.
LogisticData load_logistic_data(const std::string& path, double prior_variance = 1.0);

// The generator used by the large-data experiments: covariates uniform on
// (0.1, 1.1), parameter drawn from the prior, labels from the model.
LogisticData generate_logistic_data(int count, int dimension, double prior_variance,
                                    RngStream& rng);

// Overflow-safe log(1 + exp(a)).
double log1p_exp(double a);
double logistic_sigmoid(double a);

// Posterior energy ||x||^2/(2 sigma^2) + sum_r [log(1+exp<i_r,x>) - y_r <i_r,x>]
// and its gradient.
std::pair<double, Eigen::VectorXd> logistic_energy_grad(const LogisticData& data,
                                                        const Eigen::VectorXd& x);
double logistic_energy(const LogisticData& data, const Eigen::VectorXd& x);

// Per-datum gradient i_r (logistic<i_r,x> - y_r).
Eigen::VectorXd datum_gradient(const LogisticData& data, int r, const Eigen::VectorXd& x);

// Time-uniform bound on the datum's intensity for a fixed velocity:
// sum_k 1[v_k (-1)^{y_r} >= 0] i_{r,k} |v_k|.
double per_datum_bound(const LogisticData& data, int r, const Eigen::VectorXd& v);

// Class-conditional covariate sums and one alias structure per (coordinate,
// label) cell, enabling O(1) draws of a datum proportional to its bound after
// O(R log R) setup.
class AliasTables {
  public:
    explicit AliasTables(const LogisticData& data);

    double class_sum(int k, int label) const { return class_sums_(k, label); }
    // chi_bar = sum_k |v_k| iota_k^(1[v_k < 0]), computable in O(d).
    double total_bound(const Eigen::VectorXd& v) const;
    const AliasTable& table(int k, int label) const { return tables_[2 * k + label]; }
    int dimension() const { return static_cast<int>(class_sums_.rows()); }

  private:
    Eigen::MatrixXd class_sums_;  // d x 2
    std::vector<AliasTable> tables_;
};

AliasTables precompute_alias(const LogisticData& data);

// Draws datum r with probability chi_bar^[r] / chi_bar: first a coordinate k
// proportional to |v_k| iota_k^(c), then r from the (k, c) alias table.
int sample_thinned_factor(const AliasTables& tables, const Eigen::VectorXd& v, RngStream& rng);

struct LogisticTallies {
    std::uint64_t data_candidates = 0;
    std::uint64_t data_bounces = 0;
    std::uint64_t prior_candidates = 0;
    std::uint64_t prior_bounces = 0;
    std::uint64_t refreshes = 0;
    std::uint64_t window_advances = 0;
    std::uint64_t datum_gradient_evaluations = 0;
};

// Local BPS with thinning for logistic regression: a global
// Exp(prior bound + data bound + refresh rate) clock, three-way branch, data
// candidates thinned through the alias tables with per-event cost independent
// of R.
LocalTrajectory logistic_local_bps(const LogisticData& data, double refresh_rate, double delta,
                                   const PhaseState& initial, double horizon, RngStream rng,
                                   LogisticTallies* tallies = nullptr);

}  // namespace bps
