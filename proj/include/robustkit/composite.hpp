#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "robustkit/model.hpp"

namespace robustkit {

// Robust+natural composite: a linear head over the concatenated penultimate
// features of two frozen backbones. Only the head is ever trained; the
// backbones are immutable after construction.
struct CompositeModel {
  ModelParams robust_backbone;
  ModelParams natural_backbone;
  Tensor head_weight;  // [C x (h_r + h_n)]
  Tensor head_bias;    // [C]
  double head_train_eps = 0.0;  // 0 until the head has been adversarially trained
  std::uint64_t head_seed = 0;

  std::size_t num_classes() const { return robust_backbone.arch.num_classes; }
  std::size_t input_dim() const { return robust_backbone.arch.input_dim; }
  std::size_t fused_dim() const {
    return robust_backbone.arch.penultimate_dim() + natural_backbone.arch.penultimate_dim();
  }
};

// Head initialized per the init_model rule over the concatenated feature
// width. Requires robust.train_eps > natural.train_eps (the first argument is
// the robust backbone by convention), matching class counts and input dims.
CompositeModel make_composite(ModelParams robust, ModelParams natural, std::uint64_t head_seed);

// head_weight * concat(penult_robust(x), penult_natural(x)) + head_bias.
Tensor composite_logits(const CompositeModel& comp, const Tensor& x);

struct BoundComposite {
  BoundModel robust;
  BoundModel natural;
  Tape::NodeId head_weight = Tape::kNoNode;
  Tape::NodeId head_bias = Tape::kNoNode;
};

// Backbone parameters always enter as constants; only the head can be bound
// trainable. Input gradients still flow through both backbones.
BoundComposite bind_composite(Tape& tape, const CompositeModel& comp, bool head_trainable);

Tape::NodeId composite_logits_node(Tape& tape, const BoundComposite& bound, Tape::NodeId x);

// Gradients of the head only, named head.weight / head.bias.
GradMap composite_head_grads(const Tape& tape, const BoundComposite& bound);

std::map<std::string, Tensor*> named_head_params(CompositeModel& comp);

bool same_composite(const CompositeModel& a, const CompositeModel& b);

}  // namespace robustkit
