#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace bps {

// Reproducible random stream. Every sampler owns one; child streams are
// derived by hashing (seed, child index) so a run can be split hierarchically
// per replicate and per engine without correlation between streams.
//
// All variate transforms are implemented explicitly (not via std::*_distribution,
// whose output is implementation-defined) so that a (seed, config) pair produces
// identical draws on any standard library.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    // Derived stream for child `index`; independent of draws already made here.
    RngStream split(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64();

    double uniform();       // [0, 1)
    double uniform_open();  // (0, 1)
    double normal();
    // Exponential with the given rate; +infinity when rate <= 0.
    double exponential(double rate);
    double gamma(double shape);
    double beta(double a, double b);

    Eigen::VectorXd normal_vector(int dim);
    Eigen::VectorXd unit_sphere(int dim);

  private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bps
