#include "robustkit/report.hpp"

#include <cstdio>
#include <fstream>

#include "robustkit/error.hpp"

namespace robustkit {

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_csv(std::ostream& out, std::span<const EvalRow> rows) {
  out << "model_id,eps,acc,loss,auc_flag\n";
  for (const EvalRow& r : rows) {
    out << r.model_id << ',' << format_fixed(r.eps) << ',' << format_fixed(r.acc) << ','
        << format_fixed(r.loss) << ',' << r.auc_flag << '\n';
  }
}

void write_csv_file(const std::string& path, std::span<const EvalRow> rows) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!out) throw Error("cannot open for writing: " + path);
  write_csv(out, rows);
  if (!out) throw Error("write failed: " + path);
}

std::vector<EvalRow> EvalReport::rows() const {
  std::vector<EvalRow> out;
  const auto& pts = curve.curve.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back({model_id, pts[i].epsilon, pts[i].accuracy, curve.mean_loss[i], 0});
  }
  if (auc_value.has_value()) {
    out.push_back({model_id, auc_target, *auc_value, 0.0, 1});
  }
  return out;
}

}  // namespace robustkit
