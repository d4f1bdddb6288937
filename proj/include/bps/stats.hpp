#pragma once

#include <cstddef>
#include <vector>

namespace bps {

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double two_sample_ks_statistic(std::vector<double> a, std::vector<double> b);

// Asymptotic critical value c(level) * sqrt((n + m) / (n m)).
double ks_critical_value(std::size_t n, std::size_t m, double level = 0.01);

double sample_mean(const std::vector<double>& values);
double sample_variance(const std::vector<double>& values);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bps
