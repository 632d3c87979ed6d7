#pragma once

#include <Eigen/Core>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace actrec {

struct RunReport {
  std::vector<std::string> class_names;
  Eigen::MatrixXi confusion;  // rows = actual, cols = predicted
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::map<std::string, double> subset_accuracy;
  std::map<std::string, double> fold_accuracy;
  nlohmann::json config;
  std::map<std::string, double> timings;  // seconds per stage; not part of the emitted report

  /// Recomputes accuracy, precision and recall from the confusion matrix.
  void finalize();
  bool operator==(const RunReport& o) const;
};

enum class ReportFormat { kJson, kCsv };

ReportFormat parse_report_format(std::string_view name);

/// Stable rendering; timings are written only when `include_timings` is set.
std::string emit_report(const RunReport& report, ReportFormat format, bool include_timings = false);
RunReport report_from_json(const nlohmann::json& doc);

}  // namespace actrec
