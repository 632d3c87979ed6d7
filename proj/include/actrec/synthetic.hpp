#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "actrec/types.hpp"

namespace actrec {

/// Labeled synthetic skeleton data: each class is a sinusoidal joint-trajectory motif with a
/// class-specific frequency and per-joint phases. Output is a pure function of the SyntheticSpec.
struct SyntheticSpec {
  int class_count = 5;
  int sequences_per_class = 20;
  int joint_count = 6;
  int min_length = 40;
  int max_length = 60;
  double speed_jitter = 0.2;
  double noise_sigma = 0.02;
  double missing_joint_prob = 0.0;
  std::vector<bool> periodic_classes;  // empty = none periodic
  int subject_count = 10;
  double subject_variation = 0.1;      // body scale / yaw / offset spread per subject
  double class_separation = 1.0;       // 0 = all classes share one motif, 1 = independent phases
  double amplitude = 0.12;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The skeleton used by the generator: joint 0 hip center, 1/2 left/right hip, then three
/// chains (spine up, left and right legs down) filled round-robin.
DatasetMeta synthetic_meta(const SyntheticSpec& spec);

std::pair<Dataset, DatasetMeta> generate_synthetic(const SyntheticSpec& spec);

/// Noise-free, unwarped, canonically posed instance of class `label`'s motif (one repetition
/// for periodic classes).
ActionSequence synthetic_motif(const SyntheticSpec& spec, int label, int length);

}  // namespace actrec
