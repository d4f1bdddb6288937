#include "bps/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bps {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

RngStream RngStream::split(std::uint64_t index) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x51ed270b0a9cf1a3ULL)));
}

std::uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
    return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1.0p-52;
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

double RngStream::exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform_open()) / rate;
}

double RngStream::gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1, then scale back.
        return gamma(shape + 1.0) * std::pow(uniform_open(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = normal();
        double t = 1.0 + c * z;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = uniform_open();
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
    }
}

double RngStream::beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    return ga / (ga + gb);
}

Eigen::VectorXd RngStream::normal_vector(int dim) {
    Eigen::VectorXd out(dim);
    for (int i = 0; i < dim; ++i) out[i] = normal();
    return out;
}

Eigen::VectorXd RngStream::unit_sphere(int dim) {
    for (;;) {
        Eigen::VectorXd z = normal_vector(dim);
        const double norm = z.norm();
        if (norm > 1e-12) return z / norm;
    }
}

}  // namespace bps
