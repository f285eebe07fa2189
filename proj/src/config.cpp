#include "robustkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "robustkit/error.hpp"

namespace robustkit {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ParseError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const Entry& e, const std::string& key) {
  const std::string& s = e.value;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(e.line, "malformed number for '" + key + "': '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const Entry& e, const std::string& key) {
  const std::string& s = e.value;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(e.line, "malformed integer for '" + key + "': '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_double_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(e.value)) {
    Entry sub{item, e.line};
    out.push_back(parse_double(sub, key));
  }
  if (out.empty()) fail(e.line, "empty list for '" + key + "'");
  return out;
}

std::vector<std::size_t> parse_size_list(const Entry& e, const std::string& key) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(e.value)) {
    Entry sub{item, e.line};
    out.push_back(static_cast<std::size_t>(parse_u64(sub, key)));
  }
  if (out.empty()) fail(e.line, "empty list for '" + key + "'");
  return out;
}

const std::set<std::string>& vocabulary() {
  static const std::set<std::string> keys = {
      "mode",        "dataset",     "data_path",     "images_path",
      "labels_path", "n",           "dim",           "margin",
      "sigma",       "gen_seed",    "hidden",        "epochs",
      "batch_size",  "lr",          "momentum",      "train_attack_steps",
      "eval_attack_steps",          "eval_attack_restarts",
      "attack_step_size",           "alpha",         "eps",
      "eps_target",  "adv_floor",   "eps_grid",      "alpha_grid",
      "family_grid", "weights",     "K",             "base_seed",
      "run_count",   "train_frac",  "val_frac",      "test_frac",
      "checkpoint",
  };
  return keys;
}

// Keys every mode consumes.
const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {
      "mode",      "dataset",    "data_path",  "images_path", "labels_path",
      "n",         "dim",        "margin",     "sigma",       "gen_seed",
      "base_seed", "run_count",  "train_frac", "val_frac",    "test_frac",
      "eval_attack_steps", "eval_attack_restarts", "attack_step_size", "adv_floor",
  };
  return keys;
}

const std::set<std::string>& training_keys() {
  static const std::set<std::string> keys = {
      "hidden", "epochs", "batch_size", "lr", "momentum", "train_attack_steps",
  };
  return keys;
}

std::set<std::string> consumed_keys(Mode mode) {
  std::set<std::string> keys = common_keys();
  auto add_training = [&keys] {
    for (const auto& k : training_keys()) keys.insert(k);
  };
  switch (mode) {
    case Mode::kNatural:
      add_training();
      keys.insert({"eps_grid", "eps_target"});
      break;
    case Mode::kRobust:
      add_training();
      keys.insert({"alpha", "eps_grid", "eps_target"});
      break;
    case Mode::kEnsemble:
      add_training();
      keys.insert({"K", "alpha", "weights", "eps_grid", "eps_target"});
      break;
    case Mode::kComposite:
      add_training();
      keys.insert({"eps", "alpha", "eps_grid", "eps_target"});
      break;
    case Mode::kCompositeEnsemble:
      add_training();
      keys.insert({"K", "eps", "alpha", "weights", "eps_grid", "eps_target"});
      break;
    case Mode::kAlphaSearch:
      add_training();
      keys.insert({"K", "alpha_grid", "eps_target"});
      break;
    case Mode::kEquivalence:
      add_training();
      keys.insert({"K", "alpha", "family_grid"});
      break;
    case Mode::kCurve:
      keys.insert({"checkpoint", "eps_grid", "eps_target"});
      break;
  }
  return keys;
}

Mode parse_mode(const Entry& e) {
  static const std::map<std::string, Mode> modes = {
      {"natural", Mode::kNatural},
      {"robust", Mode::kRobust},
      {"ensemble", Mode::kEnsemble},
      {"composite", Mode::kComposite},
      {"composite_ensemble", Mode::kCompositeEnsemble},
      {"alpha_search", Mode::kAlphaSearch},
      {"equivalence", Mode::kEquivalence},
      {"curve", Mode::kCurve},
  };
  auto it = modes.find(e.value);
  if (it == modes.end()) fail(e.line, "unknown mode '" + e.value + "'");
  return it->second;
}

void check_increasing(const std::vector<double>& v, const std::string& key) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw ValidationError("config: '" + key + "' must be strictly increasing");
    }
  }
}

}  // namespace

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kNatural: return "natural";
    case Mode::kRobust: return "robust";
    case Mode::kEnsemble: return "ensemble";
    case Mode::kComposite: return "composite";
    case Mode::kCompositeEnsemble: return "composite_ensemble";
    case Mode::kAlphaSearch: return "alpha_search";
    case Mode::kEquivalence: return "equivalence";
    case Mode::kCurve: return "curve";
  }
  return "?";
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value', got '" + trim(raw) + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    if (value.empty()) fail(lineno, "empty value for '" + key + "'");
    if (!vocabulary().count(key)) fail(lineno, "unknown key '" + key + "'");
    if (entries.count(key)) fail(lineno, "duplicate key '" + key + "'");
    entries.emplace(key, Entry{value, lineno});
  }

  auto mode_it = entries.find("mode");
  if (mode_it == entries.end()) throw ParseError("config: missing required key 'mode'");
  ExperimentConfig cfg;
  cfg.mode = parse_mode(mode_it->second);

  std::set<std::string> consumed = consumed_keys(cfg.mode);
  for (const auto& [key, entry] : entries) {
    if (!consumed.count(key)) {
      std::fprintf(stderr, "config: warning: key '%s' (line %d) is ignored in mode %s\n",
                   key.c_str(), entry.line, mode_name(cfg.mode).c_str());
    }
  }

  auto has = [&](const char* key) {
    return entries.count(key) != 0 && consumed.count(key) != 0;
  };
  auto get = [&](const char* key) -> const Entry& { return entries.at(key); };
  auto require = [&](const char* key) {
    if (!has(key)) {
      throw ParseError("config: missing required key '" + std::string(key) + "' for mode " +
                       mode_name(cfg.mode));
    }
  };

  if (has("dataset")) {
    cfg.dataset_kind = get("dataset").value;
    if (cfg.dataset_kind != "gaussians" && cfg.dataset_kind != "cifar10" &&
        cfg.dataset_kind != "idx") {
      fail(get("dataset").line, "dataset must be gaussians, cifar10 or idx");
    }
  }
  if (has("data_path")) cfg.data_paths = split_list(get("data_path").value);
  if (has("images_path")) cfg.images_path = get("images_path").value;
  if (has("labels_path")) cfg.labels_path = get("labels_path").value;
  if (has("n")) cfg.gauss_n = static_cast<std::size_t>(parse_u64(get("n"), "n"));
  if (has("dim")) cfg.gauss_dim = static_cast<std::size_t>(parse_u64(get("dim"), "dim"));
  if (has("margin")) cfg.gauss_margin = parse_double(get("margin"), "margin");
  if (has("sigma")) cfg.gauss_sigma = parse_double(get("sigma"), "sigma");
  if (has("gen_seed")) cfg.gen_seed = parse_u64(get("gen_seed"), "gen_seed");
  if (has("hidden")) cfg.hidden = parse_size_list(get("hidden"), "hidden");
  if (has("epochs")) cfg.epochs = static_cast<int>(parse_u64(get("epochs"), "epochs"));
  if (has("batch_size")) {
    cfg.batch_size = static_cast<std::size_t>(parse_u64(get("batch_size"), "batch_size"));
  }
  if (has("lr")) cfg.lr = parse_double(get("lr"), "lr");
  if (has("momentum")) cfg.momentum = parse_double(get("momentum"), "momentum");
  if (has("train_attack_steps")) {
    cfg.train_attack_steps =
        static_cast<int>(parse_u64(get("train_attack_steps"), "train_attack_steps"));
  }
  if (has("eval_attack_steps")) {
    cfg.eval_attack_steps =
        static_cast<int>(parse_u64(get("eval_attack_steps"), "eval_attack_steps"));
  }
  if (has("eval_attack_restarts")) {
    cfg.eval_attack_restarts =
        static_cast<int>(parse_u64(get("eval_attack_restarts"), "eval_attack_restarts"));
  }
  if (has("attack_step_size")) {
    cfg.attack_step_size = parse_double(get("attack_step_size"), "attack_step_size");
  }
  if (has("alpha")) cfg.alpha = parse_double(get("alpha"), "alpha");
  if (has("eps")) cfg.eps = parse_double(get("eps"), "eps");
  if (has("eps_target")) cfg.eps_target = parse_double(get("eps_target"), "eps_target");
  if (has("adv_floor")) cfg.adv_floor = parse_double(get("adv_floor"), "adv_floor");
  if (has("eps_grid")) cfg.eps_grid = parse_double_list(get("eps_grid"), "eps_grid");
  if (has("alpha_grid")) cfg.alpha_grid = parse_double_list(get("alpha_grid"), "alpha_grid");
  if (has("family_grid")) cfg.family_grid = parse_double_list(get("family_grid"), "family_grid");
  if (has("weights")) cfg.weights = parse_double_list(get("weights"), "weights");
  if (has("K")) cfg.ensemble_k = static_cast<std::size_t>(parse_u64(get("K"), "K"));
  if (has("base_seed")) cfg.base_seed = parse_u64(get("base_seed"), "base_seed");
  if (has("run_count")) cfg.run_count = static_cast<int>(parse_u64(get("run_count"), "run_count"));
  if (has("train_frac")) cfg.fractions.train = parse_double(get("train_frac"), "train_frac");
  if (has("val_frac")) cfg.fractions.val = parse_double(get("val_frac"), "val_frac");
  if (has("test_frac")) cfg.fractions.test = parse_double(get("test_frac"), "test_frac");
  if (has("checkpoint")) cfg.checkpoint = get("checkpoint").value;

  // mode-required keys
  switch (cfg.mode) {
    case Mode::kNatural:
      break;
    case Mode::kRobust:
      require("alpha");
      break;
    case Mode::kEnsemble:
      require("K");
      require("alpha");
      break;
    case Mode::kComposite:
      require("eps");
      require("alpha");
      break;
    case Mode::kCompositeEnsemble:
      require("K");
      require("eps");
      require("alpha");
      break;
    case Mode::kAlphaSearch:
      require("K");
      require("alpha_grid");
      require("eps_target");
      break;
    case Mode::kEquivalence:
      require("K");
      require("alpha");
      require("family_grid");
      break;
    case Mode::kCurve:
      require("checkpoint");
      if (!has("eps_grid") && !has("eps_target")) {
        throw ParseError("config: mode curve requires eps_grid or eps_target");
      }
      break;
  }

  // value-domain checks
  if (cfg.dataset_kind == "cifar10" && cfg.data_paths.empty()) {
    throw ValidationError("config: dataset cifar10 requires data_path");
  }
  if (cfg.dataset_kind == "idx" && (cfg.images_path.empty() || cfg.labels_path.empty())) {
    throw ValidationError("config: dataset idx requires images_path and labels_path");
  }
  if (cfg.epochs < 0) throw ValidationError("config: epochs must be >= 0");
  if (cfg.batch_size == 0) throw ValidationError("config: batch_size must be positive");
  if (cfg.lr <= 0.0) throw ValidationError("config: lr must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
    throw ValidationError("config: momentum must lie in [0,1)");
  }
  if (cfg.train_attack_steps < 1 || cfg.eval_attack_steps < 1 || cfg.eval_attack_restarts < 1) {
    throw ValidationError("config: attack steps and restarts must be >= 1");
  }
  if (cfg.attack_step_size < 0.0) throw ValidationError("config: attack_step_size must be >= 0");
  if (cfg.run_count < 1) throw ValidationError("config: run_count must be >= 1");
  if (cfg.ensemble_k < 1) throw ValidationError("config: K must be >= 1");
  cfg.fractions.validate();
  if (!cfg.eps_grid.empty()) {
    check_increasing(cfg.eps_grid, "eps_grid");
    if (cfg.eps_grid[0] != 0.0) throw ValidationError("config: eps_grid must start at 0");
  }
  check_increasing(cfg.alpha_grid, "alpha_grid");
  check_increasing(cfg.family_grid, "family_grid");
  if (!cfg.family_grid.empty() && !(cfg.family_grid[0] > 0.0)) {
    throw ValidationError("config: family_grid levels must be positive");
  }
  if (!cfg.alpha_grid.empty() && !(cfg.alpha_grid[0] > 0.0)) {
    throw ValidationError("config: alpha_grid levels must be positive");
  }
  switch (cfg.mode) {
    case Mode::kRobust:
    case Mode::kEnsemble:
    case Mode::kEquivalence:
      if (!(cfg.alpha > 0.0)) throw ValidationError("config: alpha must be positive");
      break;
    case Mode::kComposite:
    case Mode::kCompositeEnsemble:
      if (!(cfg.eps > 0.0)) throw ValidationError("config: eps must be positive");
      if (cfg.alpha < 0.0) throw ValidationError("config: alpha must be >= 0");
      if (!(cfg.eps > cfg.alpha)) {
        throw ValidationError("config: composite requires eps > alpha");
      }
      break;
    case Mode::kAlphaSearch:
      if (!(cfg.eps_target > 0.0)) throw ValidationError("config: eps_target must be positive");
      if (cfg.alpha_grid.back() > cfg.eps_target) {
        throw ValidationError("config: alpha_grid must lie within (0, eps_target]");
      }
      break;
    default:
      break;
  }
  if (!cfg.weights.empty()) {
    if (cfg.mode != Mode::kEnsemble && cfg.mode != Mode::kCompositeEnsemble) {
      // already warned as ignored
    } else if (cfg.weights.size() != cfg.ensemble_k) {
      throw ValidationError("config: weights length " + std::to_string(cfg.weights.size()) +
                            " does not match K=" + std::to_string(cfg.ensemble_k));
    }
  }
  if (cfg.eps_target < 0.0) throw ValidationError("config: eps_target must be >= 0");
  if (cfg.eps_target > 0.0 && !cfg.eps_grid.empty() && cfg.eps_grid.back() < cfg.eps_target) {
    throw ValidationError("config: eps_grid does not cover eps_target");
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace robustkit
