#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "actrec/error.hpp"

namespace actrec {

inline nlohmann::json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

/// {"rows": r, "cols": c, "data": [column-major values]}
inline nlohmann::json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::MatrixXd dense = m;
  return {{"rows", dense.rows()},
          {"cols", dense.cols()},
          {"data", std::vector<double>(dense.data(), dense.data() + dense.size())}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw DataError("matrix data size does not match its shape");
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

}  // namespace actrec
