#pragma once

#include <cstdint>
#include <vector>

#include "actrec/dae.hpp"
#include "actrec/types.hpp"

namespace actrec {

struct TrainConfig {
  double q = 0.1;  // masking probability
  double lambda = 1.5;
  double beta = 1.5;
  double rho = 0.1;
  double sparsity_weight = 0.1;
  int sparse_layer = 2;  // 1-based layer carrying the KL penalty; 0 disables it
  double learning_rate = 0.05;
  double decay_epochs = 50.0;  // lr_e = learning_rate / (1 + e / decay_epochs)
  int batch_size = 32;
  int epochs = 200;
  int finetune_epochs = 50;
  std::uint64_t seed = 0;

  LossWeights weights(bool sparse) const {
    return {lambda, beta, rho, sparse ? sparsity_weight : 0.0};
  }
  void validate() const;
};

/// Clean inputs and privileged targets for one layer, one example per column.
struct LayerInputs {
  Mat<double> clean;     // d x N
  Mat<double> category;  // l x N
  Mat<double> temporal;  // chunks x N

  Eigen::Index size() const { return clean.cols(); }
};

/// Affine per-coordinate map of joint coordinates into [lo, hi] so the sigmoid skeleton head can
/// reproduce them. Missing coordinates map to 0, matching masking corruption.
struct InputScaler {
  Vec<double> min;
  Vec<double> max;
  double lo = 0.1;
  double hi = 0.9;

  static InputScaler fit(const std::vector<ActionSequence>& sequences);
  Vec<double> apply(const SkeletonFrame& frame) const;
  Vec<double> invert(const Eigen::Ref<const Vec<double>>& scaled) const;

  bool operator==(const InputScaler&) const = default;
};

struct StackedModel {
  std::vector<DaeLayer<double>> layers;
  InputScaler scaler;
  int input_dim = 0;
  int category_count = 0;
  int chunk_count = 7;
  TrainConfig config;

  int output_dim() const {
    return layers.empty() ? input_dim : static_cast<int>(layers.back().hidden_dim());
  }
  /// Clean encoder chain; input is d x n.
  Mat<double> encode(const Eigen::Ref<const Mat<double>>& input) const;
  /// Encoder chain followed by skeleton decoders in reverse layer order.
  Mat<double> reconstruct(const Eigen::Ref<const Mat<double>>& input) const;
};

struct FeatureSequence {
  SequenceMatrix<double> features;  // frames x feature dim
  std::optional<int> label;
  int subject_id = 0;
  std::string instance_id;

  Eigen::Index length() const { return features.rows(); }
};

/// Builds per-frame training columns: scaled skeleton, one-hot category, one-hot chunk.
LayerInputs make_layer_inputs(const std::vector<ActionSequence>& sequences,
                              const InputScaler& scaler, int category_count, int chunk_count);

/// Mini-batch SGD on the three-head loss with fresh corruption each presentation.
/// `history`, when given, receives the mean training loss of every epoch.
DaeLayer<double> train_layer(const LayerInputs& inputs, int hidden, const TrainConfig& cfg,
                             bool sparse = false, std::vector<double>* history = nullptr);

/// Greedy layer-wise training followed by joint fine-tuning of the deep skeleton path and the
/// top layer's category/temporal heads.
StackedModel train_stack(const LayerInputs& inputs, const std::vector<int>& hidden_sizes,
                         const TrainConfig& cfg, InputScaler scaler = {},
                         std::vector<std::vector<double>>* histories = nullptr);

/// Loss optimized during fine-tuning, on clean inputs.
double finetune_loss(const std::vector<DaeLayer<double>>& layers, const LayerInputs& batch,
                     const TrainConfig& cfg);

/// Gradient of finetune_loss; entries for lower layers' category/temporal heads stay zero.
std::vector<DaeGradient<double>> finetune_gradients(const std::vector<DaeLayer<double>>& layers,
                                                    const LayerInputs& batch,
                                                    const TrainConfig& cfg,
                                                    double* loss_out = nullptr);

FeatureSequence encode_sequence(const StackedModel& model, const ActionSequence& sequence);

/// Denoises every frame through the full stack; restored joints are no longer flagged missing.
ActionSequence restore_sequence(const StackedModel& model, const ActionSequence& sequence);

/// Raw flattened coordinates as features (the joint-position baseline).
FeatureSequence joint_position_features(const ActionSequence& sequence);

}  // namespace actrec
