#include "robustkit/tape.hpp"

#include <cmath>
#include <string>

#include "robustkit/error.hpp"

namespace robustkit {

namespace {

std::string shapes(const Tensor& a, const Tensor& b) {
  return a.shape_str() + " vs " + b.shape_str();
}

// Stabilized log-sum-exp of v - max(v); returns the shift in *max_out.
double log_sum_exp(const std::vector<double>& v, double* max_out) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  *max_out = m;
  return std::log(s);
}

}  // namespace

Tape::NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::node(NodeId id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw IndexError("tape: node id " + std::to_string(id) + " out of range");
  }
}

Tape::NodeId Tape::leaf(Tensor value) {
  Node n;
  n.op = Op::kLeaf;
  n.needs_grad = value.requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::NodeId Tape::constant(Tensor value) {
  value.requires_grad = false;
  return leaf(std::move(value));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  if (!same_shape(ta, tb)) {
    throw DimensionError("add: shapes differ: " + shapes(ta, tb));
  }
  Node n;
  n.op = Op::kAdd;
  n.args = {a, b};
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  Tensor out = ta;
  out.requires_grad = false;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  if (ta.rank() != 2 || (tb.rank() != 2 && tb.rank() != 1)) {
    throw DimensionError("matmul: unsupported ranks: " + shapes(ta, tb));
  }
  std::size_t m = ta.shape[0];
  std::size_t k = ta.shape[1];
  Tensor out;
  if (tb.rank() == 2) {
    if (tb.shape[0] != k) {
      throw DimensionError("matmul: inner dimensions differ: " + shapes(ta, tb));
    }
    std::size_t ncols = tb.shape[1];
    out = Tensor::zeros({m, ncols});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t kk = 0; kk < k; ++kk) {
        double av = ta.data[i * k + kk];
        for (std::size_t j = 0; j < ncols; ++j) {
          out.data[i * ncols + j] += av * tb.data[kk * ncols + j];
        }
      }
    }
  } else {
    if (tb.shape[0] != k) {
      throw DimensionError("matmul: inner dimensions differ: " + shapes(ta, tb));
    }
    out = Tensor::zeros({m});
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) acc += ta.data[i * k + kk] * tb.data[kk];
      out.data[i] = acc;
    }
  }
  Node n;
  n.op = Op::kMatmul;
  n.args = {a, b};
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId a) {
  Node n;
  n.op = Op::kRelu;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  Tensor out = node(a).value;
  out.requires_grad = false;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::concat(NodeId a, NodeId b) {
  const Tensor& ta = node(a).value;
  const Tensor& tb = node(b).value;
  if (ta.rank() != 1 || tb.rank() != 1) {
    throw DimensionError("concat: rank-1 operands required: " + shapes(ta, tb));
  }
  Tensor out = Tensor::zeros({ta.size() + tb.size()});
  for (std::size_t i = 0; i < ta.size(); ++i) out.data[i] = ta.data[i];
  for (std::size_t i = 0; i < tb.size(); ++i) out.data[ta.size() + i] = tb.data[i];
  Node n;
  n.op = Op::kConcat;
  n.args = {a, b};
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::reshape(NodeId a, std::vector<std::size_t> shape) {
  const Tensor& ta = node(a).value;
  if (shape_numel(shape) != ta.size()) {
    throw DimensionError("reshape: " + ta.shape_str() + " has " + std::to_string(ta.size()) +
                         " elements, target " + Tensor::zeros(shape).shape_str());
  }
  Node n;
  n.op = Op::kReshape;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  n.value = Tensor(std::move(shape), ta.data);
  return push(std::move(n));
}

Tape::NodeId Tape::scalar_mul(double c, NodeId a) {
  Node n;
  n.op = Op::kScalarMul;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  n.coeff = c;
  Tensor out = node(a).value;
  out.requires_grad = false;
  for (double& v : out.data) v *= c;
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::sum(NodeId a) {
  double s = 0.0;
  for (double v : node(a).value.data) s += v;
  Node n;
  n.op = Op::kSum;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

Tape::NodeId Tape::log_softmax(NodeId a) {
  const Tensor& ta = node(a).value;
  if (ta.rank() != 1 || ta.size() == 0) {
    throw DimensionError("log_softmax: nonempty rank-1 operand required: " + ta.shape_str());
  }
  double m = 0.0;
  double lse = log_sum_exp(ta.data, &m);
  Tensor out = Tensor::zeros({ta.size()});
  for (std::size_t i = 0; i < ta.size(); ++i) out.data[i] = ta.data[i] - m - lse;
  Node n;
  n.op = Op::kLogSoftmax;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::exp(NodeId a) {
  Node n;
  n.op = Op::kExp;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  Tensor out = node(a).value;
  out.requires_grad = false;
  for (double& v : out.data) v = std::exp(v);
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::log(NodeId a) {
  const Tensor& ta = node(a).value;
  for (double v : ta.data) {
    if (!(v > 0.0)) throw NumericError("log: non-positive operand");
  }
  Tensor out = ta;
  out.requires_grad = false;
  for (double& v : out.data) v = std::log(v);
  Node n;
  n.op = Op::kLog;
  n.args = {a, kNoNode};
  n.needs_grad = node(a).needs_grad;
  n.value = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::cross_entropy(NodeId logits, std::size_t label) {
  const Tensor& tl = node(logits).value;
  if (tl.rank() != 1 || tl.size() == 0) {
    throw DimensionError("cross_entropy: nonempty rank-1 logits required: " + tl.shape_str());
  }
  if (label >= tl.size()) {
    throw IndexError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                     std::to_string(tl.size()) + " classes");
  }
  double m = 0.0;
  double lse = log_sum_exp(tl.data, &m);
  // loss = -(z_label - m - lse) >= 0 since softmax[label] <= 1
  Node n;
  n.op = Op::kCrossEntropy;
  n.args = {logits, kNoNode};
  n.needs_grad = node(logits).needs_grad;
  n.label = label;
  n.value = Tensor::scalar(lse + m - tl.data[label]);
  return push(std::move(n));
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

bool Tape::requires_grad(NodeId id) const { return node(id).needs_grad; }

void Tape::backward(NodeId loss) {
  check_id(loss);
  const Node& top = nodes_[static_cast<std::size_t>(loss)];
  if (top.value.size() != 1) {
    throw ContractError("backward: loss node has shape " + top.value.shape_str() +
                        ", scalar required");
  }
  grads_.assign(nodes_.size(), Tensor());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    grads_[i] = Tensor::zeros(nodes_[i].value.shape);
  }
  grads_[static_cast<std::size_t>(loss)].data[0] = 1.0;
  has_grads_ = true;

  for (std::size_t idx = static_cast<std::size_t>(loss) + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (!n.needs_grad || n.op == Op::kLeaf) continue;
    const Tensor& gout = grads_[idx];
    switch (n.op) {
      case Op::kAdd: {
        for (int s = 0; s < 2; ++s) {
          NodeId arg = n.args[static_cast<std::size_t>(s)];
          if (!nodes_[static_cast<std::size_t>(arg)].needs_grad) continue;
          Tensor& g = grads_[static_cast<std::size_t>(arg)];
          for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += gout.data[i];
        }
        break;
      }
      case Op::kMatmul: {
        const Node& na = nodes_[static_cast<std::size_t>(n.args[0])];
        const Node& nb = nodes_[static_cast<std::size_t>(n.args[1])];
        const Tensor& A = na.value;
        const Tensor& B = nb.value;
        std::size_t m = A.shape[0];
        std::size_t k = A.shape[1];
        if (B.rank() == 2) {
          std::size_t ncols = B.shape[1];
          if (na.needs_grad) {  // dA = G * B^T
            Tensor& gA = grads_[static_cast<std::size_t>(n.args[0])];
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t kk = 0; kk < k; ++kk) {
                double acc = 0.0;
                for (std::size_t j = 0; j < ncols; ++j)
                  acc += gout.data[i * ncols + j] * B.data[kk * ncols + j];
                gA.data[i * k + kk] += acc;
              }
          }
          if (nb.needs_grad) {  // dB = A^T * G
            Tensor& gB = grads_[static_cast<std::size_t>(n.args[1])];
            for (std::size_t kk = 0; kk < k; ++kk)
              for (std::size_t j = 0; j < ncols; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                  acc += A.data[i * k + kk] * gout.data[i * ncols + j];
                gB.data[kk * ncols + j] += acc;
              }
          }
        } else {  // y = A v
          if (na.needs_grad) {  // dA = g v^T
            Tensor& gA = grads_[static_cast<std::size_t>(n.args[0])];
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t kk = 0; kk < k; ++kk)
                gA.data[i * k + kk] += gout.data[i] * B.data[kk];
          }
          if (nb.needs_grad) {  // dv = A^T g
            Tensor& gB = grads_[static_cast<std::size_t>(n.args[1])];
            for (std::size_t kk = 0; kk < k; ++kk) {
              double acc = 0.0;
              for (std::size_t i = 0; i < m; ++i) acc += A.data[i * k + kk] * gout.data[i];
              gB.data[kk] += acc;
            }
          }
        }
        break;
      }
      case Op::kRelu: {
        const Node& na = nodes_[static_cast<std::size_t>(n.args[0])];
        if (!na.needs_grad) break;
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          if (na.value.data[i] > 0.0) g.data[i] += gout.data[i];
        }
        break;
      }
      case Op::kConcat: {
        const Node& na = nodes_[static_cast<std::size_t>(n.args[0])];
        const Node& nb = nodes_[static_cast<std::size_t>(n.args[1])];
        std::size_t na_len = na.value.size();
        if (na.needs_grad) {
          Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
          for (std::size_t i = 0; i < na_len; ++i) g.data[i] += gout.data[i];
        }
        if (nb.needs_grad) {
          Tensor& g = grads_[static_cast<std::size_t>(n.args[1])];
          for (std::size_t i = 0; i < nb.value.size(); ++i) g.data[i] += gout.data[na_len + i];
        }
        break;
      }
      case Op::kReshape: {
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += gout.data[i];
        break;
      }
      case Op::kScalarMul: {
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += n.coeff * gout.data[i];
        break;
      }
      case Op::kSum: {
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        double gv = gout.data[0];
        for (double& v : g.data) v += gv;
        break;
      }
      case Op::kLogSoftmax: {
        // dx_i = g_i - softmax_i * sum(g)
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        double gsum = 0.0;
        for (double v : gout.data) gsum += v;
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          g.data[i] += gout.data[i] - std::exp(n.value.data[i]) * gsum;
        }
        break;
      }
      case Op::kExp: {
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += n.value.data[i] * gout.data[i];
        break;
      }
      case Op::kLog: {
        const Node& na = nodes_[static_cast<std::size_t>(n.args[0])];
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += gout.data[i] / na.value.data[i];
        break;
      }
      case Op::kCrossEntropy: {
        // dlogits = (softmax - onehot) * g
        const Node& na = nodes_[static_cast<std::size_t>(n.args[0])];
        Tensor& g = grads_[static_cast<std::size_t>(n.args[0])];
        const std::vector<double>& z = na.value.data;
        double m = 0.0;
        double lse = log_sum_exp(z, &m);
        double gv = gout.data[0];
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          double p = std::exp(z[i] - m - lse);
          g.data[i] += (p - (i == n.label ? 1.0 : 0.0)) * gv;
        }
        break;
      }
      case Op::kLeaf:
        break;
    }
  }
}

const Tensor& Tape::grad(NodeId id) const {
  check_id(id);
  if (!has_grads_) throw ContractError("tape: grad() before backward()");
  return grads_[static_cast<std::size_t>(id)];
}

void Tape::reset() {
  nodes_.clear();
  grads_.clear();
  has_grads_ = false;
}

}  // namespace robustkit
