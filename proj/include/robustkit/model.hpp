#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robustkit/optim.hpp"
#include "robustkit/tape.hpp"
#include "robustkit/tensor.hpp"

namespace robustkit {

// Fully connected relu classifier. At least one hidden layer is required so
// composites always have a penultimate layer to read.
struct Architecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 2;

  void validate() const;  // ContractError on violations
  std::size_t penultimate_dim() const { return hidden_dims.back(); }
  std::size_t layer_count() const { return hidden_dims.size() + 1; }
  bool operator==(const Architecture&) const = default;
};

// Trained classifier parameters. train_eps records the attack radius the
// model was trained against (0 for standard training); init_seed is the
// initialization omega.
struct ModelParams {
  Architecture arch;
  std::vector<Tensor> weights;  // weights[i]: [out_i x in_i]
  std::vector<Tensor> biases;   // biases[i]: [out_i]
  double train_eps = 0.0;
  std::uint64_t init_seed = 0;
};

// Glorot-style uniform init on [-sqrt(6/(fan_in+fan_out)), +...], biases
// zero, drawn from a deterministic stream seeded by omega. Same
// (arch, omega) yields bit-identical parameters.
ModelParams init_model(const Architecture& arch, std::uint64_t omega);

// Logits of the final linear layer (no softmax).
Tensor predict_logits(const ModelParams& model, const Tensor& x);

// Post-activation output of the last hidden layer. The final linear layer
// applied to these features reproduces predict_logits bit-exactly.
Tensor penultimate_features(const ModelParams& model, const Tensor& x);

// --- tape plumbing shared by attacks and training ---

struct BoundModel {
  std::vector<Tape::NodeId> weights;
  std::vector<Tape::NodeId> biases;
  std::size_t input_dim = 0;
};

// Inserts the model's parameters as tape leaves; trainable leaves receive
// gradients in backward().
BoundModel bind_model(Tape& tape, const ModelParams& model, bool trainable);

Tape::NodeId model_logits(Tape& tape, const BoundModel& bound, Tape::NodeId x);
Tape::NodeId model_penultimate(Tape& tape, const BoundModel& bound, Tape::NodeId x);

// Gradients of all bound parameters, named layer<i>.weight / layer<i>.bias.
GradMap model_grads(const Tape& tape, const BoundModel& bound);

// Mutable views in the same naming scheme, for sgd_step.
std::map<std::string, Tensor*> named_params(ModelParams& model);

// Bitwise equality of every parameter tensor plus metadata.
bool same_params(const ModelParams& a, const ModelParams& b);

}  // namespace robustkit
