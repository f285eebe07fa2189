#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustkit/dataset.hpp"

namespace robustkit {

enum class Mode {
  kNatural,
  kRobust,
  kEnsemble,
  kComposite,
  kCompositeEnsemble,
  kAlphaSearch,
  kEquivalence,
  kCurve,
};

std::string mode_name(Mode mode);

// Flat `key = value` experiment description. Parsed strictly: unknown keys
// are errors, keys a mode does not consume produce a warning and are ignored,
// duplicates are errors. Line numbers are carried into every parse error.
struct ExperimentConfig {
  Mode mode = Mode::kNatural;

  // dataset
  std::string dataset_kind = "gaussians";  // gaussians | cifar10 | idx
  std::vector<std::string> data_paths;     // cifar10 batch files
  std::string images_path;                 // idx
  std::string labels_path;
  std::size_t gauss_n = 2000;
  std::size_t gauss_dim = 20;
  double gauss_margin = 4.0;
  double gauss_sigma = 1.0;
  std::uint64_t gen_seed = 1;

  // architecture / training
  std::vector<std::size_t> hidden = {16};
  int epochs = 30;
  std::size_t batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  int train_attack_steps = 10;
  int eval_attack_steps = 50;
  int eval_attack_restarts = 3;
  double attack_step_size = 0.0;  // 0 selects 2.5*eps/steps

  // experiment parameters
  double alpha = 0.0;
  double eps = 0.0;
  double eps_target = 0.0;
  double adv_floor = 0.0;
  std::vector<double> eps_grid;
  std::vector<double> alpha_grid;
  std::vector<double> family_grid;
  std::vector<double> weights;
  std::size_t ensemble_k = 1;
  std::uint64_t base_seed = 1;
  int run_count = 1;
  SplitFractions fractions;
  std::string checkpoint;
};

// ParseError on malformed text or unknown keys; ValidationError on value
// domain violations. Warnings about ignored keys go to stderr.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace robustkit
