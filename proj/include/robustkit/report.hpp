#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "robustkit/evaluate.hpp"

namespace robustkit {

// One CSV record: `model_id,eps,acc,loss,auc_flag`. Ordinary rows carry
// auc_flag=0; a summary row with auc_flag=1 holds the AUC value in the acc
// column (loss column 0).
struct EvalRow {
  std::string model_id;
  double eps = 0.0;
  double acc = 0.0;
  double loss = 0.0;
  int auc_flag = 0;
};

// Six-decimal fixed formatting, as used everywhere in reports.
std::string format_fixed(double v);

void write_csv(std::ostream& out, std::span<const EvalRow> rows);
void write_csv_file(const std::string& path, std::span<const EvalRow> rows);

// Per-model evaluation summary: the curve, the optional AUC, and everything
// needed to regenerate the numbers (seeds, attack id, sample count).
struct EvalReport {
  std::string model_id;
  CurveReport curve;
  std::optional<double> auc_value;
  double auc_target = 0.0;
  std::uint64_t attack_seed = 0;

  std::vector<EvalRow> rows() const;
};

}  // namespace robustkit
