#include "robustkit/predictor.hpp"

#include "robustkit/error.hpp"

namespace robustkit {

Tensor Predictor::logits(const Tensor& x) const {
  Tape tape;
  return tape.value(build_logits(tape, tape.constant(x)));
}

Tape::NodeId MlpPredictor::build_logits(Tape& tape, Tape::NodeId x) const {
  BoundModel b = bind_model(tape, model_, false);
  return model_logits(tape, b, x);
}

Tape::NodeId MlpView::build_logits(Tape& tape, Tape::NodeId x) const {
  BoundModel b = bind_model(tape, *model_, false);
  return model_logits(tape, b, x);
}

Tape::NodeId CompositePredictor::build_logits(Tape& tape, Tape::NodeId x) const {
  BoundComposite b = bind_composite(tape, model_, false);
  return composite_logits_node(tape, b, x);
}

Tape::NodeId CompositeView::build_logits(Tape& tape, Tape::NodeId x) const {
  BoundComposite b = bind_composite(tape, *model_, false);
  return composite_logits_node(tape, b, x);
}

LinearBinaryPredictor::LinearBinaryPredictor(Tensor w, double b) : b_(b) {
  if (w.rank() != 1 || w.size() == 0) {
    throw ContractError("linear predictor: w must be a nonempty vector, got " + w.shape_str());
  }
  w_ = Tensor({1, w.size()}, std::move(w.data));
}

Tape::NodeId LinearBinaryPredictor::build_logits(Tape& tape, Tape::NodeId x) const {
  Tape::NodeId margin = tape.add(tape.matmul(tape.constant(w_), x),
                                 tape.constant(Tensor::vector({b_})));
  return tape.concat(margin, tape.constant(Tensor::vector({0.0})));
}

std::shared_ptr<const Predictor> make_mlp_predictor(ModelParams model) {
  return std::make_shared<MlpPredictor>(std::move(model));
}

std::shared_ptr<const Predictor> make_composite_predictor(CompositeModel model) {
  return std::make_shared<CompositePredictor>(std::move(model));
}

}  // namespace robustkit
