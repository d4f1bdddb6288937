#include "bps/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bps {

double two_sample_ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0;
    std::size_t j = 0;
    double statistic = 0.0;
    while (i < a.size() && j < b.size()) {
        const double value = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == value) ++i;
        while (j < b.size() && b[j] == value) ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        statistic = std::max(statistic, std::abs(fa - fb));
    }
    return statistic;
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
    const double c = std::sqrt(-std::log(level / 2.0) / 2.0);
    return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

double sample_mean(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("empty sample");
    double total = 0.0;
    for (double v : values) total += v;
    return total / values.size();
}

double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("need at least two values");
    const double mean = sample_mean(values);
    double total = 0.0;
    for (double v : values) total += (v - mean) * (v - mean);
    return total / (values.size() - 1);
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("bad regression input");
    const double mx = sample_mean(x);
    const double my = sample_mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("degenerate regression abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace bps
