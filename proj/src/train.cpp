#include "robustkit/train.hpp"

#include <cstdio>
#include <future>
#include <numeric>
#include <string>

#include "robustkit/error.hpp"
#include "robustkit/rng.hpp"

namespace robustkit {

void TrainConfig::validate() const {
  if (epochs < 0) throw ContractError("train: epochs must be >= 0");
  if (batch_size == 0) throw ContractError("train: batch_size must be positive");
  if (lr <= 0.0) throw ContractError("train: lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ContractError("train: momentum not in [0,1)");
  train_attack.validate();
}

namespace {

void progress_line(int epoch, double nat_loss, double adv_loss) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "epoch=%d nat_loss=%.6f adv_loss=%.6f\n", epoch, nat_loss,
                adv_loss);
  std::fputs(buf, stderr);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

ModelParams train_mlp(const Dataset& data, const Architecture& arch, const TrainConfig& cfg,
                      std::uint64_t omega) {
  cfg.validate();
  if (data.size() == 0) throw ContractError("train: dataset is empty");
  arch.validate();
  if (data.input_dim() != arch.input_dim) {
    throw ContractError("train: dataset dim " + std::to_string(data.input_dim()) +
                        " does not match architecture input_dim " +
                        std::to_string(arch.input_dim));
  }
  double alpha = cfg.train_attack.epsilon;
  ModelParams model = init_model(arch, omega);
  model.train_eps = alpha;
  SgdState state;
  MlpView view(&model);
  Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order =
        shuffled_indices(data.size(), split_seed(cfg.data_seed, static_cast<std::uint64_t>(epoch)));
    std::uint64_t epoch_attack_seed =
        split_seed(cfg.train_attack.seed, static_cast<std::uint64_t>(epoch));
    double nat_sum = 0.0;
    double adv_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      GradMap acc;
      for (std::size_t k = start; k < stop; ++k) {
        std::size_t idx = order[k];
        const Tensor& x = data.inputs[idx];
        std::size_t label = data.labels[idx];
        Tensor x_in = x;
        if (alpha > 0.0) {
          AttackConfig atk = cfg.train_attack;
          atk.seed = split_seed(epoch_attack_seed, idx);
          AttackResult res = pgd_attack_detailed(view, x, label, atk);
          for (std::size_t i = 0; i < x_in.data.size(); ++i) x_in.data[i] += res.delta.data[i];
          // natural loss for the progress line
          tape.reset();
          double nat = tape.value(tape.cross_entropy(
                                      view.build_logits(tape, tape.constant(x)), label))
                           .scalar_value();
          nat_sum += nat;
        }
        tape.reset();
        BoundModel bound = bind_model(tape, model, true);
        Tape::NodeId loss_node =
            tape.cross_entropy(model_logits(tape, bound, tape.constant(x_in)), label);
        double loss = tape.value(loss_node).scalar_value();
        adv_sum += loss;
        if (alpha == 0.0) nat_sum += loss;
        tape.backward(loss_node);
        acc.add_scaled(model_grads(tape, bound), 1.0);
      }
      acc.scale(1.0 / static_cast<double>(stop - start));
      sgd_step(named_params(model), acc, cfg.lr, cfg.momentum, state);
    }
    double n = static_cast<double>(order.size());
    progress_line(epoch, nat_sum / n, adv_sum / n);
  }
  return model;
}

}  // namespace

ModelParams train_standard(const Dataset& data, const Architecture& arch, const TrainConfig& cfg,
                           std::uint64_t omega) {
  if (cfg.train_attack.epsilon != 0.0) {
    throw ContractError("train_standard: train_attack.epsilon must be 0");
  }
  return train_mlp(data, arch, cfg, omega);
}

ModelParams train_robust(const Dataset& data, const Architecture& arch, const TrainConfig& cfg,
                         std::uint64_t omega) {
  if (!(cfg.train_attack.epsilon > 0.0)) {
    throw ContractError("train_robust: train_attack.epsilon must be positive");
  }
  return train_mlp(data, arch, cfg, omega);
}

CompositeModel train_composite_head(CompositeModel comp, const Dataset& data,
                                    const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw ContractError("train_composite_head: dataset is empty");
  double eps = cfg.train_attack.epsilon;
  if (!(eps > 0.0)) {
    throw ContractError("train_composite_head: train_attack.epsilon must be positive");
  }
  if (data.input_dim() != comp.input_dim()) {
    throw ContractError("train_composite_head: dataset dim does not match composite input_dim");
  }
  SgdState state;
  CompositeView view(&comp);
  Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order =
        shuffled_indices(data.size(), split_seed(cfg.data_seed, static_cast<std::uint64_t>(epoch)));
    std::uint64_t epoch_attack_seed =
        split_seed(cfg.train_attack.seed, static_cast<std::uint64_t>(epoch));
    double nat_sum = 0.0;
    double adv_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      GradMap acc;
      for (std::size_t k = start; k < stop; ++k) {
        std::size_t idx = order[k];
        const Tensor& x = data.inputs[idx];
        std::size_t label = data.labels[idx];
        AttackConfig atk = cfg.train_attack;
        atk.seed = split_seed(epoch_attack_seed, idx);
        AttackResult res = pgd_attack_detailed(view, x, label, atk);
        Tensor x_in = x;
        for (std::size_t i = 0; i < x_in.data.size(); ++i) x_in.data[i] += res.delta.data[i];
        tape.reset();
        double nat =
            tape.value(tape.cross_entropy(view.build_logits(tape, tape.constant(x)), label))
                .scalar_value();
        nat_sum += nat;
        tape.reset();
        BoundComposite bound = bind_composite(tape, comp, true);
        Tape::NodeId loss_node =
            tape.cross_entropy(composite_logits_node(tape, bound, tape.constant(x_in)), label);
        adv_sum += tape.value(loss_node).scalar_value();
        tape.backward(loss_node);
        acc.add_scaled(composite_head_grads(tape, bound), 1.0);
      }
      acc.scale(1.0 / static_cast<double>(stop - start));
      sgd_step(named_head_params(comp), acc, cfg.lr, cfg.momentum, state);
    }
    double n = static_cast<double>(order.size());
    progress_line(epoch, nat_sum / n, adv_sum / n);
  }
  if (cfg.epochs > 0) comp.head_train_eps = eps;
  return comp;
}

std::vector<ModelParams> train_ensemble_members(const Dataset& data, const Architecture& arch,
                                                const TrainConfig& cfg, std::uint64_t base_seed,
                                                std::size_t K, bool parallel) {
  if (K < 1) throw ContractError("train_ensemble_members: K must be >= 1");
  std::vector<ModelParams> members(K);
  if (!parallel) {
    for (std::size_t j = 0; j < K; ++j) {
      members[j] = train_robust(data, arch, cfg, split_seed(base_seed, j + 1));
    }
    return members;
  }
  std::vector<std::future<ModelParams>> futures;
  futures.reserve(K);
  for (std::size_t j = 0; j < K; ++j) {
    futures.push_back(std::async(std::launch::async, [&, j] {
      return train_robust(data, arch, cfg, split_seed(base_seed, j + 1));
    }));
  }
  for (std::size_t j = 0; j < K; ++j) members[j] = futures[j].get();
  return members;
}

}  // namespace robustkit
