#pragma once

#include <cstdint>
#include <vector>

#include "actrec/rng.hpp"
#include "actrec/stack.hpp"
#include "actrec/types.hpp"

namespace actrec {

/// Sensor-style damage: whole joints dropped, the rest jittered.
struct CorruptionSpec {
  double joint_drop = 0.2;    // probability a joint is lost in a frame
  double noise_sigma = 0.05;  // Gaussian noise on every kept coordinate

  void validate() const;
};

/// Dropped joints are flagged missing and placed at the origin (the hip after preprocessing).
ActionSequence corrupt_sequence(const ActionSequence& clean, const CorruptionSpec& spec, Rng& rng);

/// Mean squared coordinate difference over every frame, joint and axis.
double coordinate_mse(const Dataset& a, const Dataset& b);

struct RestorationSetup {
  std::vector<int> hidden_sizes{30, 60};
  TrainConfig train;
  int target_length = 70;
  int chunk_count = 7;
  CorruptionSpec corruption;
  std::uint64_t seed = 0;
};

struct RestorationResult {
  Dataset clean;      // preprocessed held-out sequences
  Dataset corrupted;
  Dataset restored;
  double corrupted_mse = 0.0;
  double restored_mse = 0.0;
  double clean_passthrough_mse = 0.0;  // restore(clean) vs clean
  double final_training_loss = 0.0;
};

/// Trains a stack on the subjects in `train_subjects`, corrupts the remaining sequences and
/// restores them.
RestorationResult run_restoration(const Dataset& data, const DatasetMeta& meta,
                                  const std::vector<int>& train_subjects,
                                  const RestorationSetup& setup);

}  // namespace actrec
