#pragma once

#include <cstdint>
#include <vector>

#include "robustkit/attack.hpp"
#include "robustkit/composite.hpp"
#include "robustkit/dataset.hpp"
#include "robustkit/model.hpp"

namespace robustkit {

// Minibatch SGD hyperparameters. train_attack.epsilon is the training alpha;
// zero degenerates the inner attack to the identity (standard training).
struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  AttackConfig train_attack = AttackConfig::for_training(0.0, 0);
  std::uint64_t data_seed = 0;

  void validate() const;
};

// Standard minibatch SGD on cross-entropy. Requires train_attack.epsilon == 0.
// Deterministic given (data, arch, cfg, omega). Emits one progress line per
// epoch to stderr: `epoch=<i> nat_loss=<f> adv_loss=<f>`.
ModelParams train_standard(const Dataset& data, const Architecture& arch, const TrainConfig& cfg,
                           std::uint64_t omega);

// Madry-style adversarial training at alpha = train_attack.epsilon > 0: each
// example is perturbed by PGD against the current parameters before the
// descent step. Returned model records train_eps = alpha.
ModelParams train_robust(const Dataset& data, const Architecture& arch, const TrainConfig& cfg,
                         std::uint64_t omega);

// Adversarial training of the composite head only: the attack differentiates
// through the full composite, SGD touches head_weight/head_bias exclusively.
// Backbone bytes are identical before and after.
CompositeModel train_composite_head(CompositeModel comp, const Dataset& data,
                                    const TrainConfig& cfg);

// K members trained via train_robust with omega_j = split_seed(base_seed, j),
// j in [1, K]. Members are independent, so parallel execution is bit-identical
// to sequential.
std::vector<ModelParams> train_ensemble_members(const Dataset& data, const Architecture& arch,
                                                const TrainConfig& cfg, std::uint64_t base_seed,
                                                std::size_t K, bool parallel = true);

}  // namespace robustkit
