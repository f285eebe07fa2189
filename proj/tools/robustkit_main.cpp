#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "robustkit/config.hpp"
#include "robustkit/error.hpp"
#include "robustkit/runner.hpp"

namespace {

using robustkit::Mode;

bool mode_allowed(const std::string& subcommand, Mode mode) {
  if (subcommand == "train") {
    return mode == Mode::kNatural || mode == Mode::kRobust || mode == Mode::kEnsemble ||
           mode == Mode::kComposite || mode == Mode::kCompositeEnsemble;
  }
  if (subcommand == "eval" || subcommand == "curve") return mode == Mode::kCurve;
  if (subcommand == "alpha-search") return mode == Mode::kAlphaSearch;
  if (subcommand == "equivalence") return mode == Mode::kEquivalence;
  return false;
}

int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_dir) {
  robustkit::ExperimentConfig cfg = robustkit::load_config_file(config_path);
  if (!mode_allowed(subcommand, cfg.mode)) {
    throw robustkit::ValidationError("mode '" + robustkit::mode_name(cfg.mode) +
                                     "' is not valid for subcommand '" + subcommand + "'");
  }
  robustkit::run_experiment(cfg, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale L2 adversarial robustness toolkit"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
  };
  Args args;

  const char* subcommands[] = {"train", "eval", "curve", "alpha-search", "equivalence"};
  const char* descriptions[] = {
      "train models per the config and evaluate them",
      "evaluate a saved checkpoint over an epsilon grid",
      "accuracy curve of a saved checkpoint over an epsilon grid",
      "minimal training level search for a K-ensemble",
      "single-robust-model equivalence level of a K-ensemble",
  };
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(subcommands[i], descriptions[i]);
    sub->add_option("--config", args.config, "experiment config file")->required();
    sub->add_option("--out", args.out, "output directory")->required();
  }

  CLI11_PARSE(app, argc, argv);

  std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    return run(subcommand, args.config, args.out);
  } catch (const robustkit::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const robustkit::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
