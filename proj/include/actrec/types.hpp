#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace actrec {

struct Joint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::optional<double> confidence;
  bool is_missing = false;

  bool operator==(const Joint&) const = default;
};

struct SkeletonFrame {
  std::vector<Joint> joints;
  std::size_t timestamp_index = 0;

  bool operator==(const SkeletonFrame&) const = default;
};

struct ActionSequence {
  std::vector<SkeletonFrame> frames;
  std::optional<int> label;  // 1-based category
  int subject_id = 0;
  std::string instance_id;

  std::size_t length() const { return frames.size(); }
  bool operator==(const ActionSequence&) const = default;
};

using Dataset = std::vector<ActionSequence>;

/// Per-dataset skeleton layout. `parent` holds the kinematic tree (-1 at the root).
struct DatasetMeta {
  int joint_count = 0;
  int category_count = 0;
  int sequence_count = 0;
  int hip_joint_index = 0;
  int left_hip_index = 0;
  int right_hip_index = 0;
  std::vector<std::string> category_names;
  std::vector<int> parent;

  /// Throws ConfigError when the invariants (l >= 2, indices in range, tree rooted at hip) fail.
  void validate() const;
};

/// Feature sequences are frames-by-dimension matrices: row i is the descriptor of frame i.
template <typename Scalar>
using SequenceMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace actrec
