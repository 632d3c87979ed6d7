#pragma once

#include <Eigen/Core>
#include <vector>

#include "actrec/types.hpp"

namespace actrec {

struct NormalizationConfig {
  int hip_joint_index = 0;
  int left_hip_index = 1;
  int right_hip_index = 2;
  std::vector<int> parent;          // kinematic tree, -1 at the hip root
  SkeletonFrame reference_skeleton;  // bone-length source
  int target_length = 70;
  int chunk_count = 7;

  static NormalizationConfig from_meta(const DatasetMeta& meta, SkeletonFrame reference,
                                       int target_length = 70, int chunk_count = 7);

  void validate() const;
};

/// Translates every joint so the hip joint lands on the origin.
SkeletonFrame hip_center(const SkeletonFrame& frame, const NormalizationConfig& cfg);

/// Rigidly rotates a hip-centered frame so the left->right hip vector points along +x.
SkeletonFrame align_hip_bone(const SkeletonFrame& frame, const NormalizationConfig& cfg);

/// The rotation applied by align_hip_bone.
Eigen::Matrix3d hip_alignment_rotation(const SkeletonFrame& frame, const NormalizationConfig& cfg);

/// Rescales every bone to the reference skeleton's length, keeping bone directions, walking the
/// kinematic tree from the root outward.
ActionSequence scale_normalize(const ActionSequence& sequence, const NormalizationConfig& cfg);

/// Linear interpolation of joint coordinates onto `length` uniformly spaced time points.
/// An output joint is missing when a source frame contributing non-zero weight has it missing.
ActionSequence resample(const ActionSequence& sequence, int length);

/// One-hot vector for the chunk containing `frame_index` (floor(index * chunks / length)).
Eigen::VectorXd temporal_chunk_vector(int frame_index, int length, int chunk_count);

/// One-hot vector of length `category_count` with element `label` (1-based) set.
Eigen::VectorXd one_hot_category(int label, int category_count);

/// (x, y, z) per joint, joint order preserved; missing joints become zeros.
Eigen::VectorXd flatten_frame(const SkeletonFrame& frame);

/// Inverse of flatten_frame; `missing` (optional) restores the flags.
SkeletonFrame unflatten_frame(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const std::vector<bool>& missing = {});

/// Hip-center, hip-bone alignment, bone rescaling and resampling to cfg.target_length. Frames
/// whose hip joints are missing are dropped first; fewer than two usable frames is a DataError.
ActionSequence preprocess_sequence(const ActionSequence& sequence, const NormalizationConfig& cfg);

/// First frame of the training sequence whose instance id sorts first, hip-centered and aligned.
SkeletonFrame choose_reference_frame(const Dataset& training, const DatasetMeta& meta);

}  // namespace actrec
