#include "robustkit/model.hpp"

#include <cmath>

#include "robustkit/error.hpp"
#include "robustkit/rng.hpp"

namespace robustkit {

void Architecture::validate() const {
  if (input_dim == 0) throw ContractError("architecture: input_dim must be positive");
  if (hidden_dims.empty()) {
    throw ContractError("architecture: at least one hidden layer is required");
  }
  for (std::size_t d : hidden_dims) {
    if (d == 0) throw ContractError("architecture: hidden dims must be positive");
  }
  if (num_classes < 2) throw ContractError("architecture: num_classes must be >= 2");
}

ModelParams init_model(const Architecture& arch, std::uint64_t omega) {
  arch.validate();
  ModelParams m;
  m.arch = arch;
  m.init_seed = omega;
  Rng rng(omega);
  std::vector<std::size_t> dims;
  dims.push_back(arch.input_dim);
  dims.insert(dims.end(), arch.hidden_dims.begin(), arch.hidden_dims.end());
  dims.push_back(arch.num_classes);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    std::size_t fan_in = dims[l];
    std::size_t fan_out = dims[l + 1];
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w = Tensor::zeros({fan_out, fan_in});
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Tensor::zeros({fan_out}));
  }
  return m;
}

BoundModel bind_model(Tape& tape, const ModelParams& model, bool trainable) {
  BoundModel b;
  b.input_dim = model.arch.input_dim;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Tensor w = model.weights[l];
    Tensor bias = model.biases[l];
    w.requires_grad = trainable;
    bias.requires_grad = trainable;
    b.weights.push_back(tape.leaf(std::move(w)));
    b.biases.push_back(tape.leaf(std::move(bias)));
  }
  return b;
}

namespace {

Tape::NodeId forward_to(Tape& tape, const BoundModel& bound, Tape::NodeId x,
                        std::size_t layers, bool activate_last) {
  const Tensor& tx = tape.value(x);
  if (tx.rank() != 1 || tx.size() != bound.input_dim) {
    throw DimensionError("model: input shape " + tx.shape_str() + " does not match input_dim " +
                         std::to_string(bound.input_dim));
  }
  Tape::NodeId a = x;
  for (std::size_t l = 0; l < layers; ++l) {
    a = tape.add(tape.matmul(bound.weights[l], a), bound.biases[l]);
    bool last = (l + 1 == layers);
    if (!last || activate_last) a = tape.relu(a);
  }
  return a;
}

}  // namespace

Tape::NodeId model_logits(Tape& tape, const BoundModel& bound, Tape::NodeId x) {
  return forward_to(tape, bound, x, bound.weights.size(), /*activate_last=*/false);
}

Tape::NodeId model_penultimate(Tape& tape, const BoundModel& bound, Tape::NodeId x) {
  return forward_to(tape, bound, x, bound.weights.size() - 1, /*activate_last=*/true);
}

Tensor predict_logits(const ModelParams& model, const Tensor& x) {
  Tape tape;
  BoundModel b = bind_model(tape, model, false);
  return tape.value(model_logits(tape, b, tape.constant(x)));
}

Tensor penultimate_features(const ModelParams& model, const Tensor& x) {
  Tape tape;
  BoundModel b = bind_model(tape, model, false);
  return tape.value(model_penultimate(tape, b, tape.constant(x)));
}

GradMap model_grads(const Tape& tape, const BoundModel& bound) {
  GradMap gm;
  for (std::size_t l = 0; l < bound.weights.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l);
    gm.grads.emplace(prefix + ".weight", tape.grad(bound.weights[l]));
    gm.grads.emplace(prefix + ".bias", tape.grad(bound.biases[l]));
  }
  return gm;
}

std::map<std::string, Tensor*> named_params(ModelParams& model) {
  std::map<std::string, Tensor*> out;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    std::string prefix = "layer" + std::to_string(l);
    out.emplace(prefix + ".weight", &model.weights[l]);
    out.emplace(prefix + ".bias", &model.biases[l]);
  }
  return out;
}

bool same_params(const ModelParams& a, const ModelParams& b) {
  if (!(a.arch == b.arch)) return false;
  if (a.train_eps != b.train_eps || a.init_seed != b.init_seed) return false;
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!bitwise_equal(a.weights[l], b.weights[l])) return false;
    if (!bitwise_equal(a.biases[l], b.biases[l])) return false;
  }
  return true;
}

}  // namespace robustkit
