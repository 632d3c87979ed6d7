#include "actrec/report.hpp"

#include <cstdio>
#include <sstream>

#include "actrec/error.hpp"

namespace actrec {

using nlohmann::json;

void RunReport::finalize() {
  const auto l = confusion.rows();
  precision.assign(static_cast<std::size_t>(l), 0.0);
  recall.assign(static_cast<std::size_t>(l), 0.0);
  const double total = confusion.sum();
  accuracy = total > 0 ? confusion.trace() / total : 0.0;
  for (Eigen::Index k = 0; k < l; ++k) {
    const double row = confusion.row(k).sum();
    const double col = confusion.col(k).sum();
    recall[static_cast<std::size_t>(k)] = row > 0 ? confusion(k, k) / row : 0.0;
    precision[static_cast<std::size_t>(k)] = col > 0 ? confusion(k, k) / col : 0.0;
  }
}

bool RunReport::operator==(const RunReport& o) const {
  return class_names == o.class_names && confusion == o.confusion && accuracy == o.accuracy &&
         precision == o.precision && recall == o.recall && subset_accuracy == o.subset_accuracy &&
         fold_accuracy == o.fold_accuracy && config == o.config;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

namespace {

json confusion_to_json(const Eigen::MatrixXi& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<int> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format, bool include_timings) {
  if (format == ReportFormat::kJson) {
    json doc;
    doc["format"] = "actrec-report";
    doc["version"] = 1;
    doc["class_names"] = report.class_names;
    doc["confusion"] = confusion_to_json(report.confusion);
    doc["accuracy"] = report.accuracy;
    doc["precision"] = report.precision;
    doc["recall"] = report.recall;
    doc["subset_accuracy"] = report.subset_accuracy;
    doc["fold_accuracy"] = report.fold_accuracy;
    doc["config"] = report.config;
    if (include_timings) doc["timings"] = report.timings;
    return doc.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "actual\\predicted";
  for (const auto& name : report.class_names) out << ',' << csv_field(name);
  out << ",recall,precision\n";
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    out << csv_field(report.class_names[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) out << ',' << report.confusion(i, j);
    out << ',' << real(report.recall[static_cast<std::size_t>(i)]) << ','
        << real(report.precision[static_cast<std::size_t>(i)]) << '\n';
  }
  out << "accuracy," << real(report.accuracy) << '\n';
  for (const auto& [name, acc] : report.subset_accuracy)
    out << "subset_accuracy:" << csv_field(name) << ',' << real(acc) << '\n';
  return out.str();
}

RunReport report_from_json(const json& doc) {
  if (doc.value("format", "") != "actrec-report") throw DataError("not a run report");
  RunReport r;
  r.class_names = doc.at("class_names").get<std::vector<std::string>>();
  const auto& rows = doc.at("confusion");
  const auto l = static_cast<Eigen::Index>(rows.size());
  r.confusion.resize(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto row = rows.at(static_cast<std::size_t>(i)).get<std::vector<int>>();
    if (static_cast<Eigen::Index>(row.size()) != l) throw DataError("confusion matrix not square");
    for (Eigen::Index j = 0; j < l; ++j) r.confusion(i, j) = row[static_cast<std::size_t>(j)];
  }
  r.accuracy = doc.at("accuracy").get<double>();
  r.precision = doc.at("precision").get<std::vector<double>>();
  r.recall = doc.at("recall").get<std::vector<double>>();
  r.subset_accuracy = doc.at("subset_accuracy").get<std::map<std::string, double>>();
  r.fold_accuracy = doc.at("fold_accuracy").get<std::map<std::string, double>>();
  r.config = doc.at("config");
  if (doc.contains("timings")) r.timings = doc.at("timings").get<std::map<std::string, double>>();
  return r;
}

}  // namespace actrec
