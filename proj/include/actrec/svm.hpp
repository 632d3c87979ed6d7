#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <vector>

namespace actrec {

struct SvmConfig {
  double reg = 1e-4;
  int epochs = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BinarySvm {
  Eigen::VectorXd weight;
  double bias = 0.0;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weight.dot(x) + bias; }
  bool operator==(const BinarySvm&) const = default;
};

/// Per-column standardization; constant columns map to 0.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stdev;  // 0 marks a constant column

  static FeatureScaler fit(const Eigen::Ref<const Eigen::MatrixXd>& rows);
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd invert(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  bool operator==(const FeatureScaler&) const = default;
};

/// Regularized hinge objective reg/2 (||w||^2 + b^2) + mean_i max(0, 1 - y_i (w.x_i + b)).
double svm_objective(const BinarySvm& model, const Eigen::Ref<const Eigen::MatrixXd>& rows,
                     const std::vector<int>& y, double reg);

/// Pegasos-style primal SGD, step 1 / (reg * t), with the bias as an extra unit feature and
/// projection onto the ball of radius 1/sqrt(reg). Rows of `rows` are examples; y is +-1.
BinarySvm svm_train_binary(const Eigen::Ref<const Eigen::MatrixXd>& rows, const std::vector<int>& y,
                           const SvmConfig& cfg);

struct SvmModel {
  std::vector<BinarySvm> classes;  // class k at index k-1
  FeatureScaler scaler;
  SvmConfig config;

  int class_count() const { return static_cast<int>(classes.size()); }
  Eigen::Index feature_dim() const { return scaler.mean.size(); }
  bool operator==(const SvmModel& o) const {
    return classes == o.classes && scaler == o.scaler && config.reg == o.config.reg &&
           config.epochs == o.config.epochs && config.seed == o.config.seed;
  }
};

struct SvmPrediction {
  int label = 0;  // 1-based
  std::vector<double> scores;
};

/// One binary model per class 1..class_count on standardized features. Every class must occur.
SvmModel svm_train_ova(const Eigen::Ref<const Eigen::MatrixXd>& rows, const std::vector<int>& labels,
                       int class_count, const SvmConfig& cfg);

/// `variants` holds one row per class (row k-1 is scored by class k) or a single shared row.
/// Ties go to the smallest class index.
SvmPrediction svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& variants);

nlohmann::json to_json(const SvmModel& model);
SvmModel svm_from_json(const nlohmann::json& doc);

}  // namespace actrec
