#include "robustkit/composite.hpp"

#include <cmath>

#include "robustkit/error.hpp"
#include "robustkit/rng.hpp"

namespace robustkit {

CompositeModel make_composite(ModelParams robust, ModelParams natural, std::uint64_t head_seed) {
  if (!(robust.train_eps > natural.train_eps)) {
    throw ContractError("make_composite: robust backbone train_eps (" +
                        std::to_string(robust.train_eps) +
                        ") must exceed natural backbone train_eps (" +
                        std::to_string(natural.train_eps) + ")");
  }
  if (robust.arch.num_classes != natural.arch.num_classes) {
    throw ContractError("make_composite: class-count mismatch: " +
                        std::to_string(robust.arch.num_classes) + " vs " +
                        std::to_string(natural.arch.num_classes));
  }
  if (robust.arch.input_dim != natural.arch.input_dim) {
    throw ContractError("make_composite: input_dim mismatch: " +
                        std::to_string(robust.arch.input_dim) + " vs " +
                        std::to_string(natural.arch.input_dim));
  }
  CompositeModel comp;
  comp.robust_backbone = std::move(robust);
  comp.natural_backbone = std::move(natural);
  comp.head_seed = head_seed;
  std::size_t fan_in = comp.fused_dim();
  std::size_t fan_out = comp.num_classes();
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(head_seed);
  comp.head_weight = Tensor::zeros({fan_out, fan_in});
  for (double& v : comp.head_weight.data) v = rng.uniform(-bound, bound);
  comp.head_bias = Tensor::zeros({fan_out});
  return comp;
}

BoundComposite bind_composite(Tape& tape, const CompositeModel& comp, bool head_trainable) {
  BoundComposite b;
  b.robust = bind_model(tape, comp.robust_backbone, false);
  b.natural = bind_model(tape, comp.natural_backbone, false);
  Tensor hw = comp.head_weight;
  Tensor hb = comp.head_bias;
  hw.requires_grad = head_trainable;
  hb.requires_grad = head_trainable;
  b.head_weight = tape.leaf(std::move(hw));
  b.head_bias = tape.leaf(std::move(hb));
  return b;
}

Tape::NodeId composite_logits_node(Tape& tape, const BoundComposite& bound, Tape::NodeId x) {
  Tape::NodeId fr = model_penultimate(tape, bound.robust, x);
  Tape::NodeId fn = model_penultimate(tape, bound.natural, x);
  Tape::NodeId fused = tape.concat(fr, fn);
  return tape.add(tape.matmul(bound.head_weight, fused), bound.head_bias);
}

Tensor composite_logits(const CompositeModel& comp, const Tensor& x) {
  Tape tape;
  BoundComposite b = bind_composite(tape, comp, false);
  return tape.value(composite_logits_node(tape, b, tape.constant(x)));
}

GradMap composite_head_grads(const Tape& tape, const BoundComposite& bound) {
  GradMap gm;
  gm.grads.emplace("head.weight", tape.grad(bound.head_weight));
  gm.grads.emplace("head.bias", tape.grad(bound.head_bias));
  return gm;
}

std::map<std::string, Tensor*> named_head_params(CompositeModel& comp) {
  return {{"head.weight", &comp.head_weight}, {"head.bias", &comp.head_bias}};
}

bool same_composite(const CompositeModel& a, const CompositeModel& b) {
  return same_params(a.robust_backbone, b.robust_backbone) &&
         same_params(a.natural_backbone, b.natural_backbone) &&
         bitwise_equal(a.head_weight, b.head_weight) && bitwise_equal(a.head_bias, b.head_bias) &&
         a.head_train_eps == b.head_train_eps && a.head_seed == b.head_seed;
}

}  // namespace robustkit
