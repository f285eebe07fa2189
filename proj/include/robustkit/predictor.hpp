#pragma once

#include <memory>

#include "robustkit/composite.hpp"
#include "robustkit/model.hpp"
#include "robustkit/tape.hpp"

namespace robustkit {

// Anything mapping an input tensor to class logits differentiably. Attacks
// treat a Predictor as a black box: build_logits appends the forward graph to
// a tape so that gradients flow to the input node x; parameters enter as
// constants.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const = 0;

  // Convenience forward on a throwaway tape. Shares the kernel code with the
  // differentiable path, so values are bit-identical.
  Tensor logits(const Tensor& x) const;
};

class MlpPredictor final : public Predictor {
 public:
  explicit MlpPredictor(ModelParams model) : model_(std::move(model)) {}
  std::size_t input_dim() const override { return model_.arch.input_dim; }
  std::size_t num_classes() const override { return model_.arch.num_classes; }
  Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const override;
  const ModelParams& model() const { return model_; }

 private:
  ModelParams model_;
};

// Non-owning variant for hot loops (training attacks against the live
// parameters). The referenced model must outlive the view.
class MlpView final : public Predictor {
 public:
  explicit MlpView(const ModelParams* model) : model_(model) {}
  std::size_t input_dim() const override { return model_->arch.input_dim; }
  std::size_t num_classes() const override { return model_->arch.num_classes; }
  Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const override;

 private:
  const ModelParams* model_;
};

class CompositePredictor final : public Predictor {
 public:
  explicit CompositePredictor(CompositeModel model) : model_(std::move(model)) {}
  std::size_t input_dim() const override { return model_.input_dim(); }
  std::size_t num_classes() const override { return model_.num_classes(); }
  Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const override;
  const CompositeModel& model() const { return model_; }

 private:
  CompositeModel model_;
};

class CompositeView final : public Predictor {
 public:
  explicit CompositeView(const CompositeModel* model) : model_(model) {}
  std::size_t input_dim() const override { return model_->input_dim(); }
  std::size_t num_classes() const override { return model_->num_classes(); }
  Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const override;

 private:
  const CompositeModel* model_;
};

// Two-class linear predictor with logits [w.x + b, 0]. Test oracle substrate
// and the simplest nontrivial attack target.
class LinearBinaryPredictor final : public Predictor {
 public:
  LinearBinaryPredictor(Tensor w, double b);
  std::size_t input_dim() const override { return w_.size(); }
  std::size_t num_classes() const override { return 2; }
  Tape::NodeId build_logits(Tape& tape, Tape::NodeId x) const override;
  const Tensor& weight() const { return w_; }
  double bias() const { return b_; }

 private:
  Tensor w_;  // stored as a [1 x d] row
  double b_;
};

std::shared_ptr<const Predictor> make_mlp_predictor(ModelParams model);
std::shared_ptr<const Predictor> make_composite_predictor(CompositeModel model);

}  // namespace robustkit
