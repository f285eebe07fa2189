#pragma once

#include <memory>
#include <vector>

#include "robustkit/composite.hpp"
#include "robustkit/predictor.hpp"

namespace robustkit {

// Non-negative weights summing to one. Constructed through validate_simplex;
// no silent renormalization ever happens.
struct SimplexWeights {
  std::vector<double> w;
};

// ValidationError on a negative entry (named by index) or when the sum
// deviates from 1 by more than 1e-9.
SimplexWeights validate_simplex(std::vector<double> w);

// How member outputs combine. Logit averaging preserves the Jensen bound
// exactly (cross-entropy is convex in logits); probability averaging is
// exposed for comparison only and carries no such guarantee.
enum class CombineRule { kLogits, kProbabilities };

// Weighted average of member predictors, presented to attacks as a single
// differentiable model. Immutable after construction; members evaluate in
// index order so the reduction is deterministic.
class EnsemblePredictor final : public Predictor {
 public:
  EnsemblePredictor(std::vector<std::shared_ptr<const Predictor>> members, SimplexWeights weights,
                    CombineRule rule = CombineRule::kLogits);

  std::size_t input_dim() const override;
  std::size_t num_classes() const override;
  Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const override;

  std::size_t member_count() const { return members_.size(); }
  const SimplexWeights& weights() const { return weights_; }
  CombineRule rule() const { return rule_; }
  const Predictor& member(std::size_t j) const { return *members_[j]; }

 private:
  std::vector<std::shared_ptr<const Predictor>> members_;
  SimplexWeights weights_;
  CombineRule rule_;
};

// Weights all exactly 1/K.
EnsemblePredictor uniform_ensemble(std::vector<std::shared_ptr<const Predictor>> members);
EnsemblePredictor uniform_ensemble(const std::vector<ModelParams>& members);

// Ensemble over composite models with explicit weights.
EnsemblePredictor composite_ensemble(std::vector<CompositeModel> composites,
                                     SimplexWeights weights);

Tensor ensemble_logits(const EnsemblePredictor& ens, const Tensor& x);

}  // namespace robustkit
