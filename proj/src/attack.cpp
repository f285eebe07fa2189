#include "robustkit/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "robustkit/error.hpp"

namespace robustkit {

void AttackConfig::validate() const {
  if (epsilon < 0.0) throw ContractError("attack: epsilon must be >= 0");
  if (steps < 1) throw ContractError("attack: steps must be >= 1");
  if (restarts < 1) throw ContractError("attack: restarts must be >= 1");
  if (step_size < 0.0) throw ContractError("attack: step_size must be >= 0");
}

double AttackConfig::effective_step() const {
  return step_size > 0.0 ? step_size : 2.5 * epsilon / static_cast<double>(steps);
}

AttackConfig AttackConfig::for_training(double alpha, std::uint64_t seed) {
  AttackConfig cfg;
  cfg.epsilon = alpha;
  cfg.steps = 10;
  cfg.restarts = 1;
  cfg.random_start = true;
  cfg.seed = seed;
  return cfg;
}

AttackConfig AttackConfig::for_evaluation(double eps, std::uint64_t seed) {
  AttackConfig cfg;
  cfg.epsilon = eps;
  cfg.steps = 50;
  cfg.restarts = 3;
  cfg.random_start = true;
  cfg.seed = seed;
  return cfg;
}

Tensor project_l2(const Tensor& delta, double epsilon) {
  double norm = l2_norm(delta);
  if (norm <= epsilon) return delta;
  Tensor out = delta;
  double scale = epsilon / norm;  // norm > eps >= 0, so norm > 0
  for (double& v : out.data) v *= scale;
  return out;
}

Tensor sample_in_ball(Rng& rng, std::size_t dim, double epsilon) {
  Tensor dir = Tensor::zeros({dim});
  for (double& v : dir.data) v = rng.normal();
  double norm = l2_norm(dir);
  if (norm == 0.0) return dir;  // all-zero draw: probability ~0, stay at center
  double radius = epsilon * std::pow(rng.uniform01(), 1.0 / static_cast<double>(dim));
  for (double& v : dir.data) v *= radius / norm;
  return dir;
}

namespace {

void clip_to_unit_box(const Tensor& x, Tensor& delta) {
  for (std::size_t i = 0; i < delta.data.size(); ++i) {
    double v = std::clamp(x.data[i] + delta.data[i], 0.0, 1.0);
    delta.data[i] = v - x.data[i];
  }
}

struct RestartOutcome {
  Tensor delta;
  double loss = -std::numeric_limits<double>::infinity();
  double start_loss = 0.0;
};

RestartOutcome run_restart(const Predictor& pred, const Tensor& x, std::size_t label,
                           const AttackConfig& cfg, Tensor delta, Tape& tape, int restart_index) {
  double step = cfg.effective_step();
  RestartOutcome best;
  for (int s = 0; s <= cfg.steps; ++s) {
    tape.reset();
    Tape::NodeId xn = tape.constant(x);
    Tensor d = delta;
    d.requires_grad = true;
    Tape::NodeId dn = tape.leaf(std::move(d));
    Tape::NodeId input = tape.add(xn, dn);
    Tape::NodeId loss_node = tape.cross_entropy(pred.build_logits(tape, input), label);
    double loss = tape.value(loss_node).scalar_value();
    if (!std::isfinite(loss)) {
      throw NumericError("pgd_attack: non-finite loss at restart " +
                         std::to_string(restart_index) + ", step " + std::to_string(s));
    }
    if (s == 0) best.start_loss = loss;
    if (loss > best.loss) {
      best.loss = loss;
      best.delta = delta;
    }
    if (s == cfg.steps) break;  // final iterate was only evaluated
    tape.backward(loss_node);
    const Tensor& g = tape.grad(dn);
    double gn = l2_norm(g);
    if (gn == 0.0) break;  // iterate would stay unchanged from here on
    Tensor next = delta;
    for (std::size_t i = 0; i < next.data.size(); ++i) {
      next.data[i] += step * g.data[i] / gn;
    }
    delta = project_l2(next, cfg.epsilon);
    if (cfg.clip_unit_box) clip_to_unit_box(x, delta);
  }
  return best;
}

}  // namespace

AttackResult pgd_attack_detailed(const Predictor& pred, const Tensor& x, std::size_t label,
                                 const AttackConfig& cfg, std::span<const Tensor> warm_starts) {
  cfg.validate();
  if (x.rank() != 1 || x.size() != pred.input_dim()) {
    throw DimensionError("pgd_attack: input shape " + x.shape_str() +
                         " does not match predictor input_dim " +
                         std::to_string(pred.input_dim()));
  }
  if (label >= pred.num_classes()) {
    throw IndexError("pgd_attack: label " + std::to_string(label) + " out of range");
  }

  Tape tape;
  if (cfg.epsilon == 0.0) {
    // Degenerate ball: delta = 0 for any predictor.
    Tape::NodeId xn = tape.constant(x);
    double loss = tape.value(tape.cross_entropy(pred.build_logits(tape, xn), label)).scalar_value();
    if (!std::isfinite(loss)) throw NumericError("pgd_attack: non-finite loss at epsilon 0");
    return {Tensor::zeros(x.shape), loss, loss};
  }

  AttackResult best;
  best.loss = -std::numeric_limits<double>::infinity();
  int total = cfg.restarts + static_cast<int>(warm_starts.size());
  for (int r = 0; r < total; ++r) {
    Tensor delta0;
    if (r < cfg.restarts) {
      if (r == 0 && !cfg.random_start) {
        delta0 = Tensor::zeros(x.shape);
      } else {
        Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        delta0 = sample_in_ball(rng, x.size(), cfg.epsilon);
      }
    } else {
      const Tensor& warm = warm_starts[static_cast<std::size_t>(r - cfg.restarts)];
      if (warm.shape != x.shape) {
        throw DimensionError("pgd_attack: warm start shape " + warm.shape_str() +
                             " does not match input " + x.shape_str());
      }
      delta0 = project_l2(warm, cfg.epsilon);
    }
    if (cfg.clip_unit_box) clip_to_unit_box(x, delta0);
    RestartOutcome out = run_restart(pred, x, label, cfg, std::move(delta0), tape, r);
    if (out.loss > best.loss) {
      best.loss = out.loss;
      best.delta = std::move(out.delta);
      best.start_loss = out.start_loss;
    }
  }
  return best;
}

Tensor pgd_attack(const Predictor& pred, const Tensor& x, std::size_t label,
                  const AttackConfig& cfg) {
  return pgd_attack_detailed(pred, x, label, cfg).delta;
}

Tensor worst_case_linear(const Tensor& w, double b, const Tensor& x, std::size_t label,
                         double epsilon) {
  (void)b;  // the optimal direction does not depend on the offset
  if (w.rank() != 1 || w.size() == 0) {
    throw ContractError("worst_case_linear: w must be a nonempty vector");
  }
  double norm = l2_norm(w);
  if (norm == 0.0) throw ContractError("worst_case_linear: w must be nonzero");
  if (label > 1) throw IndexError("worst_case_linear: label must be 0 or 1");
  if (x.shape != w.shape) {
    throw DimensionError("worst_case_linear: x shape " + x.shape_str() + " does not match w " +
                         w.shape_str());
  }
  // Class 0 carries the logit w.x + b, so increasing w.x favors class 0.
  double sign = (label == 0) ? -1.0 : 1.0;
  Tensor delta = Tensor::zeros(w.shape);
  for (std::size_t i = 0; i < w.size(); ++i) {
    delta.data[i] = sign * epsilon * w.data[i] / norm;
  }
  return delta;
}

}  // namespace robustkit
