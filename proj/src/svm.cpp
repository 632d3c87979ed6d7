#include "actrec/svm.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "actrec/error.hpp"
#include "actrec/json_util.hpp"

namespace actrec {

void SvmConfig::validate() const {
  if (!(reg > 0)) throw ConfigError("svm reg must be > 0");
  if (epochs < 1) throw ConfigError("svm epochs must be >= 1");
}

FeatureScaler FeatureScaler::fit(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  if (rows.rows() == 0) throw DataError("cannot fit scaler without rows");
  FeatureScaler s;
  s.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
  s.stdev = (centered.colwise().squaredNorm() / static_cast<double>(rows.rows()))
                .cwiseSqrt()
                .transpose();
  for (Eigen::Index i = 0; i < s.stdev.size(); ++i)
    if (s.stdev(i) <= 1e-12 * std::max(1.0, std::abs(s.mean(i)))) s.stdev(i) = 0.0;
  return s;
}

Eigen::VectorXd FeatureScaler::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != mean.size()) throw DataError("feature dimension mismatch");
  Eigen::VectorXd z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    z(i) = stdev(i) > 0 ? (x(i) - mean(i)) / stdev(i) : 0.0;
  return z;
}

Eigen::VectorXd FeatureScaler::invert(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (z.size() != mean.size()) throw DataError("feature dimension mismatch");
  return (z.array() * stdev.array() + mean.array()).matrix();
}

double svm_objective(const BinarySvm& model, const Eigen::Ref<const Eigen::MatrixXd>& rows,
                     const std::vector<int>& y, double reg) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] *
                                     model.decision(rows.row(i).transpose()));
  return 0.5 * reg * (model.weight.squaredNorm() + model.bias * model.bias) +
         hinge / static_cast<double>(rows.rows());
}

BinarySvm svm_train_binary(const Eigen::Ref<const Eigen::MatrixXd>& rows, const std::vector<int>& y,
                           const SvmConfig& cfg) {
  cfg.validate();
  const auto n = rows.rows();
  if (n == 0) throw DataError("no training rows");
  if (static_cast<Eigen::Index>(y.size()) != n) throw DataError("label count mismatch");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw DataError("binary labels must be +1 or -1");
  }
  if (!pos || !neg) throw DataError("binary SVM needs both labels");

  // w = scale * v keeps the shrink step O(1)
  Eigen::VectorXd v = Eigen::VectorXd::Zero(rows.cols());
  double vb = 0.0;
  double scale = 1.0;
  const double radius2 = 1.0 / cfg.reg;
  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double t = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      t += 1.0;
      const double eta = 1.0 / (cfg.reg * t);
      const double label = y[static_cast<std::size_t>(i)];
      const double margin = label * scale * (v.dot(rows.row(i)) + vb);
      const double shrink = 1.0 - eta * cfg.reg;
      if (shrink <= 0.0) {
        v.setZero();
        vb = 0.0;
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        v.noalias() += (eta * label / scale) * rows.row(i).transpose();
        vb += eta * label / scale;
      }
      const double norm2 = scale * scale * (v.squaredNorm() + vb * vb);
      if (norm2 > radius2) scale *= std::sqrt(radius2 / norm2);
      if (scale < 1e-9) {
        v *= scale;
        vb *= scale;
        scale = 1.0;
      }
    }
  }
  return {scale * v, scale * vb};
}

SvmModel svm_train_ova(const Eigen::Ref<const Eigen::MatrixXd>& rows, const std::vector<int>& labels,
                       int class_count, const SvmConfig& cfg) {
  cfg.validate();
  if (class_count < 2) throw DataError("one-vs-all needs at least 2 classes");
  if (static_cast<Eigen::Index>(labels.size()) != rows.rows()) throw DataError("label count mismatch");
  std::vector<int> seen(static_cast<std::size_t>(class_count), 0);
  for (int l : labels) {
    if (l < 1 || l > class_count) throw DataError("label out of range");
    ++seen[static_cast<std::size_t>(l - 1)];
  }
  for (int k = 0; k < class_count; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      throw DataError("class " + std::to_string(k + 1) + " absent from training data");

  SvmModel model;
  model.config = cfg;
  model.scaler = FeatureScaler::fit(rows);
  Eigen::MatrixXd scaled(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    scaled.row(i) = model.scaler.apply(rows.row(i).transpose()).transpose();

  for (int k = 1; k <= class_count; ++k) {
    std::vector<int> y(labels.size());
    std::transform(labels.begin(), labels.end(), y.begin(), [k](int l) { return l == k ? 1 : -1; });
    SvmConfig binary = cfg;
    binary.seed = cfg.seed + static_cast<std::uint64_t>(k);
    model.classes.push_back(svm_train_binary(scaled, y, binary));
  }
  return model;
}

SvmPrediction svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& variants) {
  const int l = model.class_count();
  if (variants.cols() != model.feature_dim()) throw DataError("feature dimension mismatch");
  if (variants.rows() != l && variants.rows() != 1)
    throw DataError("expected one feature row per class or a single shared row");
  SvmPrediction p;
  p.scores.resize(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    const auto row = variants.rows() == 1 ? 0 : k;
    p.scores[static_cast<std::size_t>(k)] =
        model.classes[static_cast<std::size_t>(k)].decision(model.scaler.apply(variants.row(row).transpose()));
  }
  p.label = static_cast<int>(std::max_element(p.scores.begin(), p.scores.end()) - p.scores.begin()) + 1;
  return p;
}

nlohmann::json to_json(const SvmModel& model) {
  nlohmann::json doc;
  doc["format"] = "actrec-svm";
  doc["version"] = 1;
  doc["config"] = {{"reg", model.config.reg}, {"epochs", model.config.epochs},
                   {"seed", model.config.seed}};
  doc["scaler"] = {{"mean", vector_to_json(model.scaler.mean)},
                   {"stdev", vector_to_json(model.scaler.stdev)}};
  auto& classes = doc["classes"] = nlohmann::json::array();
  for (const auto& c : model.classes)
    classes.push_back({{"weight", vector_to_json(c.weight)}, {"bias", c.bias}});
  return doc;
}

SvmModel svm_from_json(const nlohmann::json& doc) {
  if (doc.at("format") != "actrec-svm") throw DataError("not an SVM model file");
  if (doc.at("version") != 1) throw DataError("unsupported SVM model version");
  SvmModel m;
  m.config.reg = doc.at("config").at("reg").get<double>();
  m.config.epochs = doc.at("config").at("epochs").get<int>();
  m.config.seed = doc.at("config").at("seed").get<std::uint64_t>();
  m.scaler.mean = vector_from_json(doc.at("scaler").at("mean"));
  m.scaler.stdev = vector_from_json(doc.at("scaler").at("stdev"));
  for (const auto& c : doc.at("classes"))
    m.classes.push_back({vector_from_json(c.at("weight")), c.at("bias").get<double>()});
  return m;
}

}  // namespace actrec
