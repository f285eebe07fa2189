#pragma once

#include <span>
#include <string>
#include <vector>

#include "robustkit/attack.hpp"
#include "robustkit/dataset.hpp"
#include "robustkit/ensemble.hpp"
#include "robustkit/train.hpp"

namespace robustkit {

// Fraction of examples classified correctly with no perturbation. Ties in the
// argmax resolve to the lowest class index.
double natural_accuracy(const Predictor& pred, const Dataset& data);

// Fraction still correct under per-example PGD at radius epsilon. Attack
// seeds derive from (cfg.seed, example index), so evaluation parallelizes
// over examples with bit-identical results. epsilon == 0 takes the
// natural_accuracy code path exactly.
double adversarial_accuracy(const Predictor& pred, const Dataset& data, double epsilon,
                            const AttackConfig& cfg);

// Mean cross-entropy at the PGD-found perturbation.
double adversarial_loss(const Predictor& pred, const Dataset& data, double epsilon,
                        const AttackConfig& cfg);

// Accuracy and mean loss from one attack sweep (one attack per example, both
// statistics from the same perturbations).
struct PointEval {
  double accuracy = 0.0;
  double loss = 0.0;
};
PointEval evaluate_point(const Predictor& pred, const Dataset& data, double epsilon,
                         const AttackConfig& cfg);

// Mean adversarial_accuracy over K models sharing one train_eps, each
// attacked in isolation, reduced in member-index order.
double mean_over_inits(const std::vector<ModelParams>& models, const Dataset& data,
                       double epsilon, const AttackConfig& cfg);

struct CurvePoint {
  double epsilon = 0.0;
  double accuracy = 0.0;
};

// Sampled map epsilon -> accuracy, strictly increasing in epsilon. AUC-ready
// when the first epsilon is 0.
struct AccuracyCurve {
  std::vector<CurvePoint> points;
  std::string attack_cfg_id;
};

struct CurveReport {
  AccuracyCurve curve;
  std::vector<double> mean_loss;                  // per grid point
  std::vector<std::vector<double>> example_loss;  // [grid point][example]
  std::size_t sample_count = 0;
};

// Adversarial accuracy at each grid point with identical attack settings and
// per-example seeds across points. Grid must be strictly increasing and start
// at 0. With nested_restarts (the default), each example's best perturbation
// from the previous grid point seeds one extra restart at the next, which
// makes per-example loss non-decreasing along the grid.
CurveReport accuracy_curve(const Predictor& pred, const Dataset& data,
                           std::span<const double> eps_grid, const AttackConfig& cfg,
                           bool nested_restarts = true);

// Composite trapezoid mean of the curve over [0, eps_target], with linear
// interpolation when eps_target falls inside a segment.
double auc(const AccuracyCurve& curve, double eps_target);

struct AlphaSearchRow {
  double alpha = 0.0;
  double ensemble_nat = 0.0;
  double ensemble_adv = 0.0;
  double ensemble_nat_loss = 0.0;
  double ensemble_adv_loss = 0.0;
  bool qualifies = false;
};

struct AlphaSearchResult {
  double alpha_star = 0.0;
  bool feasible = false;  // false: alpha_star maximizes the constraint margin instead
  double reference_nat = 0.0;
  double reference_adv = 0.0;
  double reference_nat_loss = 0.0;
  double reference_adv_loss = 0.0;
  std::vector<AlphaSearchRow> rows;
};

// For each alpha in the grid, trains a K-member uniform ensemble and returns
// the smallest alpha whose validation adversarial accuracy at eps_target
// matches the reference model's. Member inits derive from base_seed
// identically across alphas, so rows differ only by the training level.
AlphaSearchResult min_alpha_search(const Dataset& train_data, const Dataset& val_data,
                                   const Architecture& arch, std::size_t K, double eps_target,
                                   const ModelParams& reference,
                                   std::span<const double> alpha_grid, const TrainConfig& cfg,
                                   const AttackConfig& eval_attack, std::uint64_t base_seed);

struct EquivalenceRow {
  double epsilon = 0.0;
  double single_self_acc = 0.0;  // f: model trained at eps, attacked at eps
  double ensemble_acc = 0.0;     // g: the ensemble attacked at eps
  double single_self_loss = 0.0;
  double ensemble_loss = 0.0;
};

struct EquivalenceResult {
  double eps_eq = 0.0;
  bool found = false;  // false: g < f on the whole grid; eps_eq is the grid minimum
  std::vector<EquivalenceRow> rows;
};

// Largest epsilon (linear interpolation between grid points) where the
// ensemble's adversarial accuracy matches a single robust model evaluated at
// its own training level. Family models must carry strictly increasing
// train_eps values.
EquivalenceResult equivalence_epsilon(const Predictor& ensemble,
                                      const std::vector<ModelParams>& family, const Dataset& data,
                                      const AttackConfig& cfg);

}  // namespace robustkit
