#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "robustkit/predictor.hpp"
#include "robustkit/rng.hpp"
#include "robustkit/tensor.hpp"

namespace robustkit {

// PGD attack parameters. step_size == 0 selects the 2.5*epsilon/steps
// default. Restart 0 starts at delta = 0 unless random_start; later restarts
// always start at a random point of the ball, otherwise they would repeat the
// first one.
struct AttackConfig {
  double epsilon = 0.0;
  int steps = 10;
  double step_size = 0.0;
  bool random_start = true;
  std::uint64_t seed = 0;
  int restarts = 1;
  // Image data: keep x+delta inside [0,1]. Feasibility then refers to the
  // clipped perturbation, which can only be shorter.
  bool clip_unit_box = false;

  void validate() const;
  double effective_step() const;

  static AttackConfig for_training(double alpha, std::uint64_t seed);    // 10 steps, 1 restart
  static AttackConfig for_evaluation(double eps, std::uint64_t seed);    // 50 steps, 3 restarts
};

// delta if ||delta||_2 <= epsilon, else delta * (epsilon/||delta||_2).
Tensor project_l2(const Tensor& delta, double epsilon);

// Uniform draw from the epsilon-ball: Gaussian direction, radius eps*U^(1/d).
Tensor sample_in_ball(Rng& rng, std::size_t dim, double epsilon);

struct AttackResult {
  Tensor delta;
  double loss = 0.0;        // cross-entropy at x+delta
  double start_loss = 0.0;  // cross-entropy at the winning restart's start
};

// L2 PGD: delta <- project(delta + step * g/||g||), g the input gradient of
// the cross-entropy at x+delta. Returns the best-loss iterate over all steps
// and restarts (ties keep the earliest candidate, so results are
// deterministic). warm_starts are projected into the ball and run as extra
// restarts; the nesting property of evaluation curves depends on them.
AttackResult pgd_attack_detailed(const Predictor& predictor, const Tensor& x, std::size_t label,
                                 const AttackConfig& cfg,
                                 std::span<const Tensor> warm_starts = {});

Tensor pgd_attack(const Predictor& predictor, const Tensor& x, std::size_t label,
                  const AttackConfig& cfg);

// Closed-form worst case for the 2-class linear predictor [w.x + b, 0]:
// delta = -eps * s * w/||w||, s = +1 when increasing w.x favors the true
// label. Exact because the loss is monotone in the margin and the margin is
// linear in delta.
Tensor worst_case_linear(const Tensor& w, double b, const Tensor& x, std::size_t label,
                         double epsilon);

}  // namespace robustkit
