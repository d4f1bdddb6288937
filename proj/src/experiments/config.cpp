#include "bps/experiments/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace bps::experiments {

namespace {

using nlohmann::json;

const std::map<std::string, ExperimentKind>& kind_table() {
    static const std::map<std::string, ExperimentKind> table = {
        {"gaussian_moments", ExperimentKind::GaussianMoments},
        {"dimension_sweep", ExperimentKind::DimensionSweep},
        {"global_vs_local", ExperimentKind::GlobalVsLocal},
        {"refresh_comparison", ExperimentKind::RefreshComparison},
        {"poisson_gmrf", ExperimentKind::PoissonGmrf},
        {"logistic_bench", ExperimentKind::LogisticBench},
        {"reducibility", ExperimentKind::Reducibility},
        {"radial_invariance", ExperimentKind::RadialInvariance},
    };
    return table;
}

class Reader {
  public:
    Reader(const json& root, std::vector<ConfigProblem>& problems)
        : root_(root), problems_(problems) {}

    void problem(const std::string& anchor, const std::string& message) {
        problems_.push_back({anchor, message});
    }

    const json* find(const std::string& section, const std::string& field) {
        const json* node = &root_;
        if (!section.empty()) {
            auto it = root_.find(section);
            if (it == root_.end()) return nullptr;
            node = &*it;
        }
        auto it = node->find(field);
        return it == node->end() ? nullptr : &*it;
    }

    static std::string anchor_of(const std::string& section, const std::string& field) {
        return section.empty() ? field : section + "." + field;
    }

    template <typename T>
    bool required(const std::string& section, const std::string& field, T& out) {
        const json* node = find(section, field);
        if (!node) {
            problem(anchor_of(section, field), "missing field");
            return false;
        }
        return assign(section, field, *node, out);
    }

    template <typename T>
    bool optional(const std::string& section, const std::string& field, T& out) {
        const json* node = find(section, field);
        if (!node) return false;
        return assign(section, field, *node, out);
    }

    bool present(const std::string& section, const std::string& field) {
        return find(section, field) != nullptr;
    }

  private:
    template <typename T>
    bool assign(const std::string& section, const std::string& field, const json& node, T& out) {
        try {
            out = node.get<T>();
            return true;
        } catch (const json::exception&) {
            problem(anchor_of(section, field), "wrong type");
            return false;
        }
    }

    const json& root_;
    std::vector<ConfigProblem>& problems_;
};

void validate_sampler(Reader& reader, ExperimentConfig& config) {
    SamplerConfig& sampler = config.sampler;
    reader.required("sampler", "refresh_rate", sampler.refresh_rate);
    if (sampler.refresh_rate < 0.0)
        reader.problem("sampler.refresh_rate", "must be non-negative");

    reader.optional("sampler", "scheme", sampler.scheme);
    static const std::vector<std::string> schemes = {"global_gaussian", "restricted_sphere",
                                                     "restricted_partial", "local"};
    if (std::find(schemes.begin(), schemes.end(), sampler.scheme) == schemes.end())
        reader.problem("sampler.scheme", "unknown scheme '" + sampler.scheme + "'");
    if (sampler.scheme == "restricted_partial") {
        const bool has_alpha = reader.optional("sampler", "alpha", sampler.alpha);
        const bool has_beta = reader.optional("sampler", "beta", sampler.beta);
        if (!has_alpha || !has_beta)
            reader.problem("sampler", "restricted_partial requires alpha and beta");
        if (sampler.alpha <= 0.0 || sampler.beta <= 0.0)
            reader.problem("sampler", "alpha and beta must be positive");
    } else {
        reader.optional("sampler", "alpha", sampler.alpha);
        reader.optional("sampler", "beta", sampler.beta);
    }

    reader.optional("sampler", "strategy", sampler.strategy);
    static const std::vector<std::string> strategies = {"inversion", "convex", "thinning",
                                                        "superposition"};
    if (std::find(strategies.begin(), strategies.end(), sampler.strategy) == strategies.end())
        reader.problem("sampler.strategy", "unknown strategy '" + sampler.strategy + "'");

    reader.optional("sampler", "delta", sampler.delta);
    const bool needs_delta = sampler.strategy == "thinning" ||
                             config.kind == ExperimentKind::GlobalVsLocal ||
                             config.kind == ExperimentKind::LogisticBench;
    if (needs_delta && !(sampler.delta > 0.0))
        reader.problem("sampler.delta", "thinning requires a positive bound window delta");

    reader.optional("sampler", "minibatch", sampler.minibatch);
    if (sampler.minibatch < 1) reader.problem("sampler.minibatch", "must be at least 1");
    if (sampler.minibatch > 1)
        reader.problem("sampler.minibatch",
                       "minibatch > 1 requires every factor bound to equal a common constant; "
                       "this model's bounds are state-dependent (heterogeneous)");
}

void validate_model(Reader& reader, ExperimentConfig& config) {
    ModelConfig& model = config.model;
    switch (config.kind) {
        case ExperimentKind::GaussianMoments:
            reader.required("model", "dimension", model.dimension);
            reader.optional("model", "scale", model.scale);
            if (model.dimension < 1) reader.problem("model.dimension", "must be at least 1");
            if (!(model.scale > 0.0)) reader.problem("model.scale", "must be positive");
            break;
        case ExperimentKind::DimensionSweep:
            reader.required("model", "dimensions", model.dimensions);
            if (model.dimensions.empty())
                reader.problem("model.dimensions", "needs at least one dimension");
            for (int d : model.dimensions) {
                if (d < 1) reader.problem("model.dimensions", "dimensions must be at least 1");
            }
            reader.optional("model", "scale", model.scale);
            break;
        case ExperimentKind::GlobalVsLocal:
        case ExperimentKind::RefreshComparison:
            reader.required("model", "dimension", model.dimension);
            reader.required("model", "rho", model.rho);
            reader.optional("model", "probes", model.probes);
            if (model.dimension < 2) reader.problem("model.dimension", "must be at least 2");
            if (!(model.rho > 0.0 && model.rho < 1.0))
                reader.problem("model.rho", "must lie in (0, 1)");
            if (model.probes < 1) reader.problem("model.probes", "must be at least 1");
            if (config.kind == ExperimentKind::RefreshComparison) {
                reader.required("model", "refresh_rates", model.refresh_rates);
                if (model.refresh_rates.empty())
                    reader.problem("model.refresh_rates", "needs at least one rate");
            }
            break;
        case ExperimentKind::PoissonGmrf:
            reader.optional("model", "side", model.side);
            reader.optional("model", "rho", model.rho);
            if (model.side < 2) reader.problem("model.side", "must be at least 2");
            if (!(model.rho >= 0.0)) reader.problem("model.rho", "must be non-negative");
            break;
        case ExperimentKind::LogisticBench:
            reader.required("model", "count", model.count);
            reader.required("model", "dimension", model.dimension);
            reader.optional("model", "prior_variance", model.prior_variance);
            reader.optional("model", "dataset", model.dataset);
            if (model.count < 1) reader.problem("model.count", "must be at least 1");
            if (model.dimension < 1) reader.problem("model.dimension", "must be at least 1");
            if (!(model.prior_variance > 0.0))
                reader.problem("model.prior_variance", "must be positive");
            break;
        case ExperimentKind::Reducibility:
            reader.optional("model", "scale", model.scale);
            break;
        case ExperimentKind::RadialInvariance:
            reader.required("model", "degrees", model.degrees);
            for (int k : model.degrees) {
                if (k < 2) reader.problem("model.degrees", "degrees must be at least 2");
            }
            reader.optional("model", "count", model.count);
            if (model.count < 100) reader.problem("model.count", "needs at least 100 draws");
            break;
    }
}

void validate_run(Reader& reader, ExperimentConfig& config) {
    RunConfig& run = config.run;
    reader.optional("run", "horizon", run.horizon);
    reader.optional("run", "events", run.events);
    reader.optional("run", "mesh", run.mesh);
    reader.optional("run", "dump_events", run.dump_events);
    if (run.mesh < 0.0) reader.problem("run.mesh", "must be non-negative");
    if (config.kind == ExperimentKind::Reducibility) {
        if (run.events < 1) reader.problem("run.events", "reducibility needs an event budget");
    } else if (!(run.horizon > 0.0)) {
        reader.problem("run.horizon", "must be positive");
    }
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
    for (const auto& [name, value] : kind_table()) {
        if (value == kind) return name.c_str();
    }
    return "unknown";
}

LoadedConfig load_config(const std::string& path) {
    LoadedConfig loaded;
    std::ifstream in(path);
    if (!in) {
        loaded.problems.push_back({path, "cannot open config file"});
        return loaded;
    }
    json root;
    try {
        root = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& error) {
        // byte offset -> line anchor
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)),
                         std::istreambuf_iterator<char>());
        std::size_t line = 1;
        for (std::size_t i = 0; i < error.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line;
        }
        loaded.problems.push_back({"line " + std::to_string(line), error.what()});
        return loaded;
    }

    Reader reader(root, loaded.problems);
    std::string kind;
    if (reader.required("", "experiment", kind)) {
        auto it = kind_table().find(kind);
        if (it == kind_table().end()) {
            reader.problem("experiment", "unknown experiment '" + kind + "'");
            return loaded;
        }
        loaded.config.kind = it->second;
    } else {
        return loaded;
    }
    reader.required("", "seed", loaded.config.seed);
    reader.optional("", "replicates", loaded.config.replicates);
    if (loaded.config.replicates < 1)
        reader.problem("replicates", "must be at least 1");
    reader.optional("", "output_dir", loaded.config.output_dir);

    validate_sampler(reader, loaded.config);
    validate_model(reader, loaded.config);
    validate_run(reader, loaded.config);
    return loaded;
}

std::string format_problems(const std::string& path, const std::vector<ConfigProblem>& problems) {
    std::ostringstream out;
    for (const auto& problem : problems) {
        out << path << ": " << problem.anchor << ": " << problem.message << "\n";
    }
    return out.str();
}

}  // namespace bps::experiments
