#pragma once

#include <map>
#include <string>

#include "robustkit/tensor.hpp"

namespace robustkit {

// Gradients keyed by parameter name. std::map keeps iteration order
// deterministic (lexicographic), which the optimizer relies on.
struct GradMap {
  std::map<std::string, Tensor> grads;

  bool empty() const { return grads.empty(); }

  // this += scale * other; shapes must agree entry-wise.
  void add_scaled(const GradMap& other, double scale);
  void scale(double s);
};

// Momentum buffers, one per parameter, created lazily as zeros.
struct SgdState {
  std::map<std::string, Tensor> velocity;
};

// v <- momentum*v + g; p <- p - lr*v, elementwise, visiting parameters in
// name order. ContractError if a parameter has no gradient entry.
void sgd_step(std::map<std::string, Tensor*> params, const GradMap& grads, double lr,
              double momentum, SgdState& state);

}  // namespace robustkit
