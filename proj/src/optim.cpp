#include "robustkit/optim.hpp"

#include "robustkit/error.hpp"

namespace robustkit {

void GradMap::add_scaled(const GradMap& other, double s) {
  for (const auto& [name, g] : other.grads) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      Tensor t = g;
      for (double& v : t.data) v *= s;
      grads.emplace(name, std::move(t));
    } else {
      if (!same_shape(it->second, g)) {
        throw ContractError("gradmap: shape mismatch for '" + name + "': " +
                            it->second.shape_str() + " vs " + g.shape_str());
      }
      for (std::size_t i = 0; i < g.data.size(); ++i) it->second.data[i] += s * g.data[i];
    }
  }
}

void GradMap::scale(double s) {
  for (auto& [name, g] : grads) {
    for (double& v : g.data) v *= s;
  }
}

void sgd_step(std::map<std::string, Tensor*> params, const GradMap& grads, double lr,
              double momentum, SgdState& state) {
  if (lr <= 0.0) throw ContractError("sgd_step: lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ContractError("sgd_step: momentum not in [0,1)");
  for (auto& [name, p] : params) {
    auto git = grads.grads.find(name);
    if (git == grads.grads.end()) {
      throw ContractError("sgd_step: missing gradient for parameter '" + name + "'");
    }
    const Tensor& g = git->second;
    if (!same_shape(*p, g)) {
      throw ContractError("sgd_step: gradient shape " + g.shape_str() + " for '" + name +
                          "' does not match parameter " + p->shape_str());
    }
    auto vit = state.velocity.find(name);
    if (vit == state.velocity.end()) {
      vit = state.velocity.emplace(name, Tensor::zeros(p->shape)).first;
    }
    Tensor& v = vit->second;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      v.data[i] = momentum * v.data[i] + g.data[i];
      p->data[i] -= lr * v.data[i];
    }
  }
}

}  // namespace robustkit
