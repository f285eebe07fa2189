#include "robustkit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "robustkit/error.hpp"
#include "robustkit/parallel.hpp"
#include "robustkit/rng.hpp"

namespace robustkit {

namespace {

void require_nonempty(const Dataset& data, const char* op) {
  if (data.size() == 0) throw ContractError(std::string(op) + ": dataset is empty");
}

std::string attack_cfg_id(const AttackConfig& cfg) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "pgd-l2;steps=%d;step=%.6g;restarts=%d;rs=%d;seed=%llu;clip=%d",
                cfg.steps, cfg.effective_step(), cfg.restarts, cfg.random_start ? 1 : 0,
                static_cast<unsigned long long>(cfg.seed), cfg.clip_unit_box ? 1 : 0);
  return buf;
}

struct ExampleOutcome {
  bool correct = false;
  double loss = 0.0;
  Tensor delta;
};

ExampleOutcome attack_example(const Predictor& pred, const Dataset& data, std::size_t idx,
                              double epsilon, const AttackConfig& cfg,
                              const Tensor* warm_start) {
  AttackConfig atk = cfg;
  atk.epsilon = epsilon;
  atk.seed = split_seed(cfg.seed, idx);
  std::span<const Tensor> warm;
  if (warm_start != nullptr) warm = std::span<const Tensor>(warm_start, 1);
  AttackResult res = pgd_attack_detailed(pred, data.inputs[idx], data.labels[idx], atk, warm);
  Tensor x_adv = data.inputs[idx];
  for (std::size_t i = 0; i < x_adv.data.size(); ++i) x_adv.data[i] += res.delta.data[i];
  ExampleOutcome out;
  out.correct = argmax_lowest(pred.logits(x_adv)) == data.labels[idx];
  out.loss = res.loss;
  out.delta = std::move(res.delta);
  return out;
}

}  // namespace

double natural_accuracy(const Predictor& pred, const Dataset& data) {
  require_nonempty(data, "natural_accuracy");
  std::vector<unsigned char> correct(data.size(), 0);
  parallel_for(data.size(), [&](std::size_t i) {
    correct[i] = argmax_lowest(pred.logits(data.inputs[i])) == data.labels[i] ? 1 : 0;
  });
  std::size_t hits = 0;
  for (unsigned char c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double adversarial_accuracy(const Predictor& pred, const Dataset& data, double epsilon,
                            const AttackConfig& cfg) {
  require_nonempty(data, "adversarial_accuracy");
  if (epsilon == 0.0) return natural_accuracy(pred, data);
  std::vector<unsigned char> correct(data.size(), 0);
  parallel_for(data.size(), [&](std::size_t i) {
    correct[i] = attack_example(pred, data, i, epsilon, cfg, nullptr).correct ? 1 : 0;
  });
  std::size_t hits = 0;
  for (unsigned char c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double adversarial_loss(const Predictor& pred, const Dataset& data, double epsilon,
                        const AttackConfig& cfg) {
  require_nonempty(data, "adversarial_loss");
  std::vector<double> losses(data.size(), 0.0);
  parallel_for(data.size(), [&](std::size_t i) {
    losses[i] = attack_example(pred, data, i, epsilon, cfg, nullptr).loss;
  });
  double sum = 0.0;
  for (double v : losses) sum += v;
  return sum / static_cast<double>(data.size());
}

PointEval evaluate_point(const Predictor& pred, const Dataset& data, double epsilon,
                         const AttackConfig& cfg) {
  require_nonempty(data, "evaluate_point");
  std::vector<unsigned char> correct(data.size(), 0);
  std::vector<double> losses(data.size(), 0.0);
  parallel_for(data.size(), [&](std::size_t i) {
    ExampleOutcome out = attack_example(pred, data, i, epsilon, cfg, nullptr);
    correct[i] = out.correct ? 1 : 0;
    losses[i] = out.loss;
  });
  PointEval pe;
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    hits += correct[i];
    sum += losses[i];
  }
  pe.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  pe.loss = sum / static_cast<double>(data.size());
  return pe;
}

double mean_over_inits(const std::vector<ModelParams>& models, const Dataset& data, double epsilon,
                       const AttackConfig& cfg) {
  if (models.empty()) throw ContractError("mean_over_inits: no models");
  for (const ModelParams& m : models) {
    if (m.train_eps != models[0].train_eps) {
      throw ContractError("mean_over_inits: mixed train_eps values " +
                          std::to_string(models[0].train_eps) + " and " +
                          std::to_string(m.train_eps));
    }
  }
  double sum = 0.0;
  for (const ModelParams& m : models) {
    MlpView view(&m);
    sum += adversarial_accuracy(view, data, epsilon, cfg);
  }
  return sum / static_cast<double>(models.size());
}

CurveReport accuracy_curve(const Predictor& pred, const Dataset& data,
                           std::span<const double> eps_grid, const AttackConfig& cfg,
                           bool nested_restarts) {
  require_nonempty(data, "accuracy_curve");
  if (eps_grid.empty()) throw ContractError("accuracy_curve: empty grid");
  if (eps_grid[0] != 0.0) throw ContractError("accuracy_curve: grid must start at 0");
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > eps_grid[i - 1])) {
      throw ContractError("accuracy_curve: grid must be strictly increasing");
    }
  }
  std::size_t n = data.size();
  std::size_t g = eps_grid.size();
  CurveReport report;
  report.sample_count = n;
  report.curve.attack_cfg_id = attack_cfg_id(cfg);
  report.example_loss.assign(g, std::vector<double>(n, 0.0));
  std::vector<std::vector<unsigned char>> correct(g, std::vector<unsigned char>(n, 0));

  // Grid points run innermost per example so the previous point's best delta
  // can seed the next one.
  parallel_for(n, [&](std::size_t i) {
    Tensor prev_delta;
    for (std::size_t p = 0; p < g; ++p) {
      const Tensor* warm =
          (nested_restarts && p > 0) ? &prev_delta : nullptr;
      ExampleOutcome out = attack_example(pred, data, i, eps_grid[p], cfg, warm);
      report.example_loss[p][i] = out.loss;
      correct[p][i] = out.correct ? 1 : 0;
      if (nested_restarts) prev_delta = std::move(out.delta);
    }
  });

  for (std::size_t p = 0; p < g; ++p) {
    std::size_t hits = 0;
    for (unsigned char c : correct[p]) hits += c;
    double sum = 0.0;
    for (double v : report.example_loss[p]) sum += v;
    report.curve.points.push_back(
        {eps_grid[p], static_cast<double>(hits) / static_cast<double>(n)});
    report.mean_loss.push_back(sum / static_cast<double>(n));
  }
  return report;
}

double auc(const AccuracyCurve& curve, double eps_target) {
  if (!(eps_target > 0.0)) throw ContractError("auc: eps_target must be positive");
  const auto& pts = curve.points;
  if (pts.empty()) throw ContractError("auc: empty curve");
  if (pts.front().epsilon != 0.0) throw ContractError("auc: curve must start at epsilon 0");
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].epsilon > pts[i - 1].epsilon)) {
      throw ContractError("auc: curve epsilons must be strictly increasing");
    }
  }
  if (pts.back().epsilon < eps_target) {
    throw ContractError("auc: curve covers [0, " + std::to_string(pts.back().epsilon) +
                        "], target " + std::to_string(eps_target));
  }
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double e0 = pts[i].epsilon;
    double e1 = pts[i + 1].epsilon;
    if (e0 >= eps_target) break;
    double a0 = pts[i].accuracy;
    double a1 = pts[i + 1].accuracy;
    double hi = std::min(e1, eps_target);
    double a_hi = a0 + (a1 - a0) * (hi - e0) / (e1 - e0);
    area += (hi - e0) * (a0 + a_hi) / 2.0;
  }
  return area / eps_target;
}

AlphaSearchResult min_alpha_search(const Dataset& train_data, const Dataset& val_data,
                                   const Architecture& arch, std::size_t K, double eps_target,
                                   const ModelParams& reference,
                                   std::span<const double> alpha_grid, const TrainConfig& cfg,
                                   const AttackConfig& eval_attack, std::uint64_t base_seed) {
  if (alpha_grid.empty()) throw ContractError("min_alpha_search: empty alpha grid");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] > 0.0) || alpha_grid[i] > eps_target) {
      throw ContractError("min_alpha_search: alphas must lie in (0, eps_target]");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw ContractError("min_alpha_search: alpha grid must be strictly increasing");
    }
  }
  AlphaSearchResult result;
  MlpView ref_view(&reference);
  PointEval ref_nat = evaluate_point(ref_view, val_data, 0.0, eval_attack);
  PointEval ref_adv = evaluate_point(ref_view, val_data, eps_target, eval_attack);
  result.reference_nat = ref_nat.accuracy;
  result.reference_adv = ref_adv.accuracy;
  result.reference_nat_loss = ref_nat.loss;
  result.reference_adv_loss = ref_adv.loss;

  bool have_star = false;
  double best_margin = -std::numeric_limits<double>::infinity();
  double best_margin_alpha = alpha_grid[0];
  for (double alpha : alpha_grid) {
    TrainConfig tc = cfg;
    tc.train_attack.epsilon = alpha;
    std::vector<ModelParams> members = train_ensemble_members(train_data, arch, tc, base_seed, K);
    EnsemblePredictor ens = uniform_ensemble(members);
    AlphaSearchRow row;
    row.alpha = alpha;
    PointEval nat = evaluate_point(ens, val_data, 0.0, eval_attack);
    PointEval adv = evaluate_point(ens, val_data, eps_target, eval_attack);
    row.ensemble_nat = nat.accuracy;
    row.ensemble_adv = adv.accuracy;
    row.ensemble_nat_loss = nat.loss;
    row.ensemble_adv_loss = adv.loss;
    row.qualifies = row.ensemble_adv >= result.reference_adv;
    if (row.qualifies && !have_star) {
      result.alpha_star = alpha;
      result.feasible = true;
      have_star = true;
    }
    double margin = row.ensemble_adv - result.reference_adv;
    if (margin > best_margin) {
      best_margin = margin;
      best_margin_alpha = alpha;
    }
    result.rows.push_back(row);
  }
  if (!have_star) {
    result.alpha_star = best_margin_alpha;
    result.feasible = false;
  }
  return result;
}

EquivalenceResult equivalence_epsilon(const Predictor& ensemble,
                                      const std::vector<ModelParams>& family, const Dataset& data,
                                      const AttackConfig& cfg) {
  if (family.empty()) throw ContractError("equivalence_epsilon: empty model family");
  for (std::size_t i = 1; i < family.size(); ++i) {
    if (!(family[i].train_eps > family[i - 1].train_eps)) {
      throw ContractError("equivalence_epsilon: family train_eps must be strictly increasing");
    }
  }
  EquivalenceResult result;
  for (const ModelParams& m : family) {
    EquivalenceRow row;
    row.epsilon = m.train_eps;
    MlpView view(&m);
    PointEval self = evaluate_point(view, data, m.train_eps, cfg);
    PointEval ens = evaluate_point(ensemble, data, m.train_eps, cfg);
    row.single_self_acc = self.accuracy;
    row.ensemble_acc = ens.accuracy;
    row.single_self_loss = self.loss;
    row.ensemble_loss = ens.loss;
    result.rows.push_back(row);
  }
  auto diff = [&](std::size_t i) {
    return result.rows[i].ensemble_acc - result.rows[i].single_self_acc;
  };
  std::size_t last = result.rows.size() - 1;
  if (diff(last) >= 0.0) {
    result.eps_eq = result.rows[last].epsilon;
    result.found = true;
    return result;
  }
  for (std::size_t i = last; i-- > 0;) {
    if (diff(i) >= 0.0) {
      // crossing between grid points i and i+1
      double d0 = diff(i);
      double d1 = diff(i + 1);
      double e0 = result.rows[i].epsilon;
      double e1 = result.rows[i + 1].epsilon;
      result.eps_eq = e0 + d0 * (e1 - e0) / (d0 - d1);
      result.found = true;
      return result;
    }
  }
  result.eps_eq = result.rows[0].epsilon;
  result.found = false;
  return result;
}

}  // namespace robustkit
