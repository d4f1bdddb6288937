#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bps::experiments {

enum class ExperimentKind {
    GaussianMoments,
    DimensionSweep,
    GlobalVsLocal,
    RefreshComparison,
    PoissonGmrf,
    LogisticBench,
    Reducibility,
    RadialInvariance,
};

const char* kind_name(ExperimentKind kind);

struct SamplerConfig {
    double refresh_rate = 0.0;
    std::string scheme = "global_gaussian";
    std::string strategy = "inversion";
    double delta = 0.0;
    int minibatch = 1;
    double alpha = 1.0;
    double beta = 4.0;
};

struct RunConfig {
    double horizon = 0.0;
    std::int64_t events = 0;
    double mesh = 0.0;
    bool dump_events = false;
};

struct ModelConfig {
    int dimension = 2;
    double scale = 1.0;
    double rho = 0.5;
    int side = 10;
    int count = 100;              // logistic data points / radial draw count
    double prior_variance = 1.0;
    int probes = 10;
    std::vector<int> dimensions;        // dimension sweep
    std::vector<int> degrees;           // radial invariant-family degrees
    std::vector<double> refresh_rates;  // refreshment comparison
    std::string dataset;                // optional logistic dataset path
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::GaussianMoments;
    std::uint64_t seed = 0;
    int replicates = 1;
    std::string output_dir = "out";
    SamplerConfig sampler;
    RunConfig run;
    ModelConfig model;
};

// One validation finding, anchored to the offending location: a line for
// parse errors, a field path for semantic problems.
struct ConfigProblem {
    std::string anchor;
    std::string message;
};

struct LoadedConfig {
    ExperimentConfig config;
    std::vector<ConfigProblem> problems;
};

// Parses and validates; never throws on bad input, all findings land in
// `problems` (empty means the config is runnable).
LoadedConfig load_config(const std::string& path);

std::string format_problems(const std::string& path, const std::vector<ConfigProblem>& problems);

}  // namespace bps::experiments
