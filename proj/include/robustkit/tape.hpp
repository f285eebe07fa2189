#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "robustkit/tensor.hpp"

namespace robustkit {

// Reverse-mode autodiff over a define-by-run tape. A Tape is rebuilt for every
// forward pass and consumed by backward(); it is confined to one task. Node
// operands always precede the node itself, so a single reverse sweep visits
// consumers before producers.
//
// Primitives: matmul, add, relu, concat, reshape, scalar_mul, sum,
// log_softmax, exp, log, plus cross_entropy as a fused loss node.
class Tape {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kNoNode = -1;

  // Inserts a tensor; it participates in backward() iff value.requires_grad.
  NodeId leaf(Tensor value);
  // Inserts a tensor that never receives gradients.
  NodeId constant(Tensor value);

  NodeId add(NodeId a, NodeId b);                          // same-shape elementwise
  NodeId matmul(NodeId a, NodeId b);                       // [m,k]x[k,n] or [m,k]x[k]
  NodeId relu(NodeId a);
  NodeId concat(NodeId a, NodeId b);                       // rank-1 operands
  NodeId reshape(NodeId a, std::vector<std::size_t> shape);
  NodeId scalar_mul(double c, NodeId a);
  NodeId sum(NodeId a);                                    // full reduction to a scalar
  NodeId log_softmax(NodeId a);                            // rank-1, max-shift stabilized
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  // -log softmax(logits)[label]; scalar output. IndexError if label >= C.
  NodeId cross_entropy(NodeId logits, std::size_t label);

  const Tensor& value(NodeId id) const;
  bool requires_grad(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss node (ContractError otherwise). After the
  // call grad(id) is valid for every node; nodes that do not participate in
  // the loss report zeros.
  void backward(NodeId loss);
  const Tensor& grad(NodeId id) const;

  // Drops all nodes but keeps allocated capacity, for reuse in attack loops.
  void reset();

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kAdd,
    kMatmul,
    kRelu,
    kConcat,
    kReshape,
    kScalarMul,
    kSum,
    kLogSoftmax,
    kExp,
    kLog,
    kCrossEntropy,
  };

  struct Node {
    Op op = Op::kLeaf;
    std::array<NodeId, 2> args{kNoNode, kNoNode};
    Tensor value;
    bool needs_grad = false;
    double coeff = 0.0;      // scalar_mul
    std::size_t label = 0;   // cross_entropy
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  bool has_grads_ = false;
};

}  // namespace robustkit
