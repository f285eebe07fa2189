#pragma once

#include <string>

#include "robustkit/config.hpp"

namespace robustkit {

// Executes run_count seeded repetitions of the configured experiment under
// out_dir: per-run CSV reports and checkpoints in run_<r>/, plus a
// summary.json selecting the best run (highest validation natural accuracy
// subject to validation adversarial accuracy at eps_target >= adv_floor).
// Fully reproducible: identical (config, base_seed) yields byte-identical
// outputs. Partial outputs of a failed run are removed before the error
// propagates.
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace robustkit
