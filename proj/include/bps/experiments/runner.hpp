#pragma once

#include "bps/experiments/config.hpp"

namespace bps::experiments {

// Executes the experiment and writes summary.txt plus the kind-specific
// delimiter-separated outputs into config.output_dir. All file contents are
// a pure function of (config, seed); wall times go to stdout only.
int run_experiment(const ExperimentConfig& config);

}  // namespace bps::experiments
