#include "robustkit/runner.hpp"

#include <filesystem>
#include <fstream>
#include <future>

#include <json.hpp>

#include "robustkit/checkpoint.hpp"
#include "robustkit/error.hpp"
#include "robustkit/evaluate.hpp"
#include "robustkit/report.hpp"
#include "robustkit/rng.hpp"

namespace robustkit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Sub-stream indices under each run seed.
enum SeedSlot : std::uint64_t {
  kEvalAttackSeed = 2,
  kDataShuffleSeed = 3,
  kTrainAttackSeed = 4,
  kOmegaSeed = 5,
  kHeadSeed = 6,
  kMemberBaseSeed = 7,
  kNaturalOmegaSeed = 8,
  kFamilyOmegaBase = 400,
};

struct LoadedData {
  DatasetSplit split;
  bool clip_unit_box = false;
  double normalized_margin = 0.0;  // gaussians only
};

LoadedData load_data(const ExperimentConfig& cfg) {
  LoadedData out;
  Dataset full;
  if (cfg.dataset_kind == "gaussians") {
    TwoGaussians tg =
        gen_two_gaussians(cfg.gauss_n, cfg.gauss_dim, cfg.gauss_margin, cfg.gauss_sigma,
                          cfg.gen_seed);
    full = std::move(tg.data);
    out.normalized_margin = tg.normalized_margin();
    out.clip_unit_box = false;
  } else if (cfg.dataset_kind == "cifar10") {
    for (std::size_t i = 0; i < cfg.data_paths.size(); ++i) {
      Dataset batch = load_cifar10_binary(cfg.data_paths[i]);
      if (i == 0) {
        full = std::move(batch);
      } else {
        full.inputs.insert(full.inputs.end(), batch.inputs.begin(), batch.inputs.end());
        full.labels.insert(full.labels.end(), batch.labels.begin(), batch.labels.end());
      }
    }
    out.clip_unit_box = true;
  } else {
    full = load_idx(cfg.images_path, cfg.labels_path);
    out.clip_unit_box = true;
  }
  full.validate();
  out.split = split_dataset(full, cfg.fractions, split_seed(cfg.base_seed, 1000003));
  return out;
}

std::vector<double> eval_grid(const ExperimentConfig& cfg) {
  if (!cfg.eps_grid.empty()) return cfg.eps_grid;
  if (cfg.eps_target > 0.0) {
    // Default AUC grid: 11 evenly spaced points on [0, eps_target].
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) {
      grid.push_back(cfg.eps_target * static_cast<double>(i) / 10.0);
    }
    return grid;
  }
  return {0.0};
}

struct RunOutput {
  std::vector<EvalRow> rows;
  ordered_json metrics;
};

AttackConfig eval_attack_for(const ExperimentConfig& cfg, const LoadedData& data,
                             std::uint64_t run_seed) {
  AttackConfig atk = AttackConfig::for_evaluation(0.0, split_seed(run_seed, kEvalAttackSeed));
  atk.steps = cfg.eval_attack_steps;
  atk.restarts = cfg.eval_attack_restarts;
  atk.step_size = cfg.attack_step_size;
  atk.clip_unit_box = data.clip_unit_box;
  return atk;
}

TrainConfig train_config_for(const ExperimentConfig& cfg, const LoadedData& data,
                             std::uint64_t run_seed, double train_eps) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.momentum = cfg.momentum;
  tc.data_seed = split_seed(run_seed, kDataShuffleSeed);
  tc.train_attack = AttackConfig::for_training(train_eps, split_seed(run_seed, kTrainAttackSeed));
  tc.train_attack.steps = cfg.train_attack_steps;
  tc.train_attack.step_size = cfg.attack_step_size;
  tc.train_attack.clip_unit_box = data.clip_unit_box;
  return tc;
}

Architecture arch_for(const ExperimentConfig& cfg, const LoadedData& data) {
  Architecture arch;
  arch.input_dim = data.split.train.input_dim();
  arch.hidden_dims = cfg.hidden;
  arch.num_classes = data.split.train.num_classes;
  arch.validate();
  return arch;
}

// Evaluate a predictor on the test split, appending curve rows plus an AUC
// row when a target is configured, and record validation metrics for the
// best-run selection.
void evaluate_model(const ExperimentConfig& cfg, const LoadedData& data, const Predictor& pred,
                    const std::string& model_id, const AttackConfig& eval_atk,
                    RunOutput& out) {
  std::vector<double> grid = eval_grid(cfg);
  CurveReport curve = accuracy_curve(pred, data.split.test, grid, eval_atk);
  EvalReport report;
  report.model_id = model_id;
  report.curve = std::move(curve);
  report.attack_seed = eval_atk.seed;
  if (cfg.eps_target > 0.0) {
    report.auc_value = auc(report.curve.curve, cfg.eps_target);
    report.auc_target = cfg.eps_target;
  }
  std::vector<EvalRow> rows = report.rows();
  out.rows.insert(out.rows.end(), rows.begin(), rows.end());

  PointEval val_nat = evaluate_point(pred, data.split.val, 0.0, eval_atk);
  out.metrics["val_nat_acc"] = val_nat.accuracy;
  if (cfg.eps_target > 0.0) {
    PointEval val_adv = evaluate_point(pred, data.split.val, cfg.eps_target, eval_atk);
    out.metrics["val_adv_acc"] = val_adv.accuracy;
  }
  ordered_json test_points = ordered_json::array();
  for (const CurvePoint& p : report.curve.curve.points) {
    test_points.push_back({{"eps", p.epsilon}, {"acc", p.accuracy}});
  }
  out.metrics["test_curve"] = std::move(test_points);
  if (report.auc_value.has_value()) out.metrics["test_auc"] = *report.auc_value;
  out.metrics["attack_cfg"] = report.curve.curve.attack_cfg_id;
  out.metrics["sample_count"] = report.curve.sample_count;
}

RunOutput execute_run(const ExperimentConfig& cfg, const LoadedData& data, int run_index,
                      const fs::path& run_dir) {
  std::uint64_t run_seed = split_seed(cfg.base_seed, static_cast<std::uint64_t>(run_index) + 1);
  AttackConfig eval_atk = eval_attack_for(cfg, data, run_seed);
  Architecture arch = arch_for(cfg, data);
  RunOutput out;
  out.metrics["run"] = run_index;
  out.metrics["run_seed"] = run_seed;

  auto ckpt_path = [&](const std::string& name) { return (run_dir / name).string(); };

  switch (cfg.mode) {
    case Mode::kNatural: {
      TrainConfig tc = train_config_for(cfg, data, run_seed, 0.0);
      ModelParams model = train_standard(data.split.train, arch, tc, split_seed(run_seed, kOmegaSeed));
      save_checkpoint(model, ckpt_path("model.ckpt"));
      MlpView view(&model);
      evaluate_model(cfg, data, view, "natural", eval_atk, out);
      break;
    }
    case Mode::kRobust: {
      TrainConfig tc = train_config_for(cfg, data, run_seed, cfg.alpha);
      ModelParams model = train_robust(data.split.train, arch, tc, split_seed(run_seed, kOmegaSeed));
      save_checkpoint(model, ckpt_path("model.ckpt"));
      MlpView view(&model);
      evaluate_model(cfg, data, view, "robust_a" + format_fixed(cfg.alpha), eval_atk, out);
      break;
    }
    case Mode::kEnsemble: {
      TrainConfig tc = train_config_for(cfg, data, run_seed, cfg.alpha);
      std::vector<ModelParams> members = train_ensemble_members(
          data.split.train, arch, tc, split_seed(run_seed, kMemberBaseSeed), cfg.ensemble_k);
      for (std::size_t j = 0; j < members.size(); ++j) {
        save_checkpoint(members[j], ckpt_path("member_" + std::to_string(j) + ".ckpt"));
      }
      std::vector<std::shared_ptr<const Predictor>> preds;
      for (const ModelParams& m : members) preds.push_back(make_mlp_predictor(m));
      SimplexWeights w = cfg.weights.empty()
                             ? validate_simplex(std::vector<double>(
                                   members.size(), 1.0 / static_cast<double>(members.size())))
                             : validate_simplex(cfg.weights);
      EnsemblePredictor ens(std::move(preds), std::move(w));
      evaluate_model(cfg, data, ens,
                     "ensemble_K" + std::to_string(cfg.ensemble_k) + "_a" +
                         format_fixed(cfg.alpha),
                     eval_atk, out);
      break;
    }
    case Mode::kComposite: {
      TrainConfig tc_robust = train_config_for(cfg, data, run_seed, cfg.eps);
      ModelParams robust =
          train_robust(data.split.train, arch, tc_robust, split_seed(run_seed, kOmegaSeed));
      ModelParams natural;
      if (cfg.alpha > 0.0) {
        TrainConfig tc_nat = train_config_for(cfg, data, run_seed, cfg.alpha);
        natural =
            train_robust(data.split.train, arch, tc_nat, split_seed(run_seed, kNaturalOmegaSeed));
      } else {
        TrainConfig tc_nat = train_config_for(cfg, data, run_seed, 0.0);
        natural = train_standard(data.split.train, arch, tc_nat,
                                 split_seed(run_seed, kNaturalOmegaSeed));
      }
      CompositeModel comp =
          make_composite(std::move(robust), std::move(natural), split_seed(run_seed, kHeadSeed));
      TrainConfig tc_head = train_config_for(cfg, data, run_seed, cfg.eps);
      comp = train_composite_head(std::move(comp), data.split.train, tc_head);
      save_checkpoint(comp, ckpt_path("composite.ckpt"));
      CompositeView view(&comp);
      evaluate_model(cfg, data, view,
                     "composite_e" + format_fixed(cfg.eps) + "_a" + format_fixed(cfg.alpha),
                     eval_atk, out);
      break;
    }
    case Mode::kCompositeEnsemble: {
      std::vector<CompositeModel> composites;
      for (std::size_t j = 0; j < cfg.ensemble_k; ++j) {
        std::uint64_t member_seed =
            split_seed(split_seed(run_seed, kMemberBaseSeed), static_cast<std::uint64_t>(j) + 1);
        TrainConfig tc_robust = train_config_for(cfg, data, run_seed, cfg.eps);
        ModelParams robust =
            train_robust(data.split.train, arch, tc_robust, split_seed(member_seed, kOmegaSeed));
        ModelParams natural;
        if (cfg.alpha > 0.0) {
          TrainConfig tc_nat = train_config_for(cfg, data, run_seed, cfg.alpha);
          natural = train_robust(data.split.train, arch, tc_nat,
                                 split_seed(member_seed, kNaturalOmegaSeed));
        } else {
          TrainConfig tc_nat = train_config_for(cfg, data, run_seed, 0.0);
          natural = train_standard(data.split.train, arch, tc_nat,
                                   split_seed(member_seed, kNaturalOmegaSeed));
        }
        CompositeModel comp = make_composite(std::move(robust), std::move(natural),
                                             split_seed(member_seed, kHeadSeed));
        TrainConfig tc_head = train_config_for(cfg, data, run_seed, cfg.eps);
        comp = train_composite_head(std::move(comp), data.split.train, tc_head);
        save_checkpoint(comp, ckpt_path("composite_" + std::to_string(j) + ".ckpt"));
        composites.push_back(std::move(comp));
      }
      SimplexWeights w = cfg.weights.empty()
                             ? validate_simplex(std::vector<double>(
                                   composites.size(), 1.0 / static_cast<double>(composites.size())))
                             : validate_simplex(cfg.weights);
      EnsemblePredictor ens = composite_ensemble(std::move(composites), std::move(w));
      evaluate_model(cfg, data, ens,
                     "composite_ens_K" + std::to_string(cfg.ensemble_k) + "_e" +
                         format_fixed(cfg.eps) + "_a" + format_fixed(cfg.alpha),
                     eval_atk, out);
      break;
    }
    case Mode::kAlphaSearch: {
      TrainConfig tc = train_config_for(cfg, data, run_seed, cfg.eps_target);
      ModelParams reference =
          train_robust(data.split.train, arch, tc, split_seed(run_seed, kOmegaSeed));
      save_checkpoint(reference, ckpt_path("reference.ckpt"));
      AlphaSearchResult res = min_alpha_search(
          data.split.train, data.split.val, arch, cfg.ensemble_k, cfg.eps_target, reference,
          cfg.alpha_grid, tc, eval_atk, split_seed(run_seed, kMemberBaseSeed));
      out.rows.push_back({"reference_e" + format_fixed(cfg.eps_target), 0.0, res.reference_nat,
                          res.reference_nat_loss, 0});
      out.rows.push_back({"reference_e" + format_fixed(cfg.eps_target), cfg.eps_target,
                          res.reference_adv, res.reference_adv_loss, 0});
      ordered_json rows_json = ordered_json::array();
      for (const AlphaSearchRow& row : res.rows) {
        std::string id = "ensemble_K" + std::to_string(cfg.ensemble_k) + "_a" +
                         format_fixed(row.alpha);
        out.rows.push_back({id, 0.0, row.ensemble_nat, row.ensemble_nat_loss, 0});
        out.rows.push_back({id, cfg.eps_target, row.ensemble_adv, row.ensemble_adv_loss, 0});
        rows_json.push_back({{"alpha", row.alpha},
                             {"ensemble_nat", row.ensemble_nat},
                             {"ensemble_adv", row.ensemble_adv},
                             {"qualifies", row.qualifies}});
      }
      out.metrics["alpha_star"] = res.alpha_star;
      out.metrics["feasible"] = res.feasible;
      out.metrics["reference_nat"] = res.reference_nat;
      out.metrics["reference_adv"] = res.reference_adv;
      out.metrics["alpha_rows"] = std::move(rows_json);
      // selection metrics: the chosen ensemble's validation numbers
      for (const AlphaSearchRow& row : res.rows) {
        if (row.alpha == res.alpha_star) {
          out.metrics["val_nat_acc"] = row.ensemble_nat;
          out.metrics["val_adv_acc"] = row.ensemble_adv;
        }
      }
      break;
    }
    case Mode::kEquivalence: {
      std::vector<ModelParams> family;
      for (std::size_t i = 0; i < cfg.family_grid.size(); ++i) {
        TrainConfig tc = train_config_for(cfg, data, run_seed, cfg.family_grid[i]);
        family.push_back(train_robust(data.split.train, arch, tc,
                                      split_seed(run_seed, kFamilyOmegaBase + i)));
        save_checkpoint(family.back(), ckpt_path("family_" + std::to_string(i) + ".ckpt"));
      }
      TrainConfig tc = train_config_for(cfg, data, run_seed, cfg.alpha);
      std::vector<ModelParams> members = train_ensemble_members(
          data.split.train, arch, tc, split_seed(run_seed, kMemberBaseSeed), cfg.ensemble_k);
      for (std::size_t j = 0; j < members.size(); ++j) {
        save_checkpoint(members[j], ckpt_path("member_" + std::to_string(j) + ".ckpt"));
      }
      EnsemblePredictor ens = uniform_ensemble(members);
      EquivalenceResult res = equivalence_epsilon(ens, family, data.split.test, eval_atk);
      for (const EquivalenceRow& row : res.rows) {
        out.rows.push_back({"single_e" + format_fixed(row.epsilon), row.epsilon,
                            row.single_self_acc, row.single_self_loss, 0});
        out.rows.push_back({"ensemble_K" + std::to_string(cfg.ensemble_k) + "_a" +
                                format_fixed(cfg.alpha),
                            row.epsilon, row.ensemble_acc, row.ensemble_loss, 0});
      }
      out.metrics["eps_eq"] = res.eps_eq;
      out.metrics["found"] = res.found;
      PointEval val_nat = evaluate_point(ens, data.split.val, 0.0, eval_atk);
      out.metrics["val_nat_acc"] = val_nat.accuracy;
      PointEval val_adv =
          evaluate_point(ens, data.split.val, cfg.family_grid.back(), eval_atk);
      out.metrics["val_adv_acc"] = val_adv.accuracy;
      break;
    }
    case Mode::kCurve: {
      CheckpointKind kind = peek_checkpoint_kind(cfg.checkpoint);
      if (kind == CheckpointKind::kMlp) {
        ModelParams model = load_model_checkpoint(cfg.checkpoint);
        MlpView view(&model);
        evaluate_model(cfg, data, view, "checkpoint", eval_atk, out);
      } else {
        CompositeModel comp = load_composite_checkpoint(cfg.checkpoint);
        CompositeView view(&comp);
        evaluate_model(cfg, data, view, "checkpoint", eval_atk, out);
      }
      break;
    }
  }
  return out;
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  LoadedData data = load_data(cfg);
  fs::path root(out_dir);
  fs::create_directories(root);

  std::vector<RunOutput> outputs(static_cast<std::size_t>(cfg.run_count));
  std::vector<std::future<void>> futures;
  futures.reserve(outputs.size());
  for (int r = 0; r < cfg.run_count; ++r) {
    futures.push_back(std::async(std::launch::async, [&, r] {
      fs::path run_dir = root / ("run_" + std::to_string(r));
      fs::create_directories(run_dir);
      try {
        RunOutput out = execute_run(cfg, data, r, run_dir);
        write_csv_file((run_dir / "report.csv").string(), out.rows);
        outputs[static_cast<std::size_t>(r)] = std::move(out);
      } catch (...) {
        std::error_code ec;
        fs::remove_all(run_dir, ec);  // drop partial outputs, then propagate
        throw;
      }
    }));
  }
  // collect all failures but report the first; every run either completed or
  // cleaned up after itself
  std::exception_ptr first_error;
  for (auto& f : futures) {
    try {
      f.get();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  ordered_json summary;
  summary["mode"] = mode_name(cfg.mode);
  summary["dataset"] = cfg.dataset_kind;
  summary["base_seed"] = cfg.base_seed;
  summary["run_count"] = cfg.run_count;
  summary["eps_target"] = cfg.eps_target;
  summary["adv_floor"] = cfg.adv_floor;
  ordered_json runs = ordered_json::array();
  for (const RunOutput& out : outputs) runs.push_back(out.metrics);
  summary["runs"] = std::move(runs);

  // best run: highest validation natural accuracy subject to the adversarial
  // floor; if nothing clears the floor, the best adversarial accuracy wins
  // and the summary says so.
  int best = -1;
  bool constraint_met = false;
  double best_nat = -1.0;
  double best_adv = -1.0;
  for (int r = 0; r < cfg.run_count; ++r) {
    const ordered_json& m = outputs[static_cast<std::size_t>(r)].metrics;
    if (!m.contains("val_nat_acc")) continue;
    double nat = m["val_nat_acc"].get<double>();
    double adv = m.contains("val_adv_acc") ? m["val_adv_acc"].get<double>() : 1.0;
    if (adv >= cfg.adv_floor) {
      if (!constraint_met || nat > best_nat) {
        constraint_met = true;
        best = r;
        best_nat = nat;
      }
    } else if (!constraint_met && adv > best_adv) {
      best = r;
      best_adv = adv;
    }
  }
  if (best < 0) best = 0;
  summary["best_run"] = best;
  summary["constraint_met"] = constraint_met;
  std::ofstream out(root / "summary.json", std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + (root / "summary.json").string());
  out << summary.dump(2) << "\n";
  if (!out) throw Error("write failed: " + (root / "summary.json").string());
}

}  // namespace robustkit
