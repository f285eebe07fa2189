#include "robustkit/ensemble.hpp"

#include <cmath>
#include <string>

#include "robustkit/error.hpp"

namespace robustkit {

SimplexWeights validate_simplex(std::vector<double> w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0.0) {
      throw ValidationError("simplex: negative weight " + std::to_string(w[i]) + " at entry " +
                            std::to_string(i));
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("simplex: weights sum to " + std::to_string(sum) + ", expected 1");
  }
  return SimplexWeights{std::move(w)};
}

EnsemblePredictor::EnsemblePredictor(std::vector<std::shared_ptr<const Predictor>> members,
                                     SimplexWeights weights, CombineRule rule)
    : members_(std::move(members)), weights_(std::move(weights)), rule_(rule) {
  if (members_.empty()) throw ContractError("ensemble: at least one member required");
  if (members_.size() != weights_.w.size()) {
    throw ContractError("ensemble: " + std::to_string(members_.size()) + " members vs " +
                        std::to_string(weights_.w.size()) + " weights");
  }
  for (const auto& m : members_) {
    if (!m) throw ContractError("ensemble: null member");
    if (m->num_classes() != members_[0]->num_classes()) {
      throw ContractError("ensemble: heterogeneous class counts");
    }
    if (m->input_dim() != members_[0]->input_dim()) {
      throw ContractError("ensemble: heterogeneous input dims");
    }
  }
}

std::size_t EnsemblePredictor::input_dim() const { return members_[0]->input_dim(); }

std::size_t EnsemblePredictor::num_classes() const { return members_[0]->num_classes(); }

Tape::NodeId EnsemblePredictor::build_logits(Tape& tape, Tape::NodeId x) const {
  Tape::NodeId acc = Tape::kNoNode;
  if (rule_ == CombineRule::kLogits) {
    for (std::size_t j = 0; j < members_.size(); ++j) {
      Tape::NodeId term = tape.scalar_mul(weights_.w[j], members_[j]->build_logits(tape, x));
      acc = (j == 0) ? term : tape.add(acc, term);
    }
    return acc;
  }
  // Probability averaging: log of the weighted softmax mixture. Argmax
  // matches the mixture's argmax; gradients flow through exp/log.
  for (std::size_t j = 0; j < members_.size(); ++j) {
    Tape::NodeId probs = tape.exp(tape.log_softmax(members_[j]->build_logits(tape, x)));
    Tape::NodeId term = tape.scalar_mul(weights_.w[j], probs);
    acc = (j == 0) ? term : tape.add(acc, term);
  }
  return tape.log(acc);
}

EnsemblePredictor uniform_ensemble(std::vector<std::shared_ptr<const Predictor>> members) {
  if (members.empty()) throw ContractError("uniform_ensemble: empty members");
  std::vector<double> w(members.size(), 1.0 / static_cast<double>(members.size()));
  return EnsemblePredictor(std::move(members), validate_simplex(std::move(w)));
}

EnsemblePredictor uniform_ensemble(const std::vector<ModelParams>& members) {
  std::vector<std::shared_ptr<const Predictor>> preds;
  preds.reserve(members.size());
  for (const ModelParams& m : members) preds.push_back(make_mlp_predictor(m));
  return uniform_ensemble(std::move(preds));
}

EnsemblePredictor composite_ensemble(std::vector<CompositeModel> composites,
                                     SimplexWeights weights) {
  if (composites.empty()) throw ContractError("composite_ensemble: empty members");
  std::vector<std::shared_ptr<const Predictor>> preds;
  preds.reserve(composites.size());
  for (CompositeModel& c : composites) preds.push_back(make_composite_predictor(std::move(c)));
  return EnsemblePredictor(std::move(preds), std::move(weights));
}

Tensor ensemble_logits(const EnsemblePredictor& ens, const Tensor& x) { return ens.logits(x); }

}  // namespace robustkit
