#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "actrec/config.hpp"
#include "actrec/preprocess.hpp"
#include "actrec/report.hpp"
#include "actrec/types.hpp"

namespace actrec {

/// Everything a fold learns from its training split.
struct FoldArtifacts {
  std::string name;
  std::vector<int> class_labels;  // dataset label of local class k at index k-1
  NormalizationConfig normalization;
  std::optional<StackedModel> dae;  // absent for the joint-position variant
  std::vector<PhantomTemplate<double>> phantoms;
  RegistrationConfig registration;
  SvmModel svm;
};

nlohmann::json to_json(const FoldArtifacts& fold);
FoldArtifacts fold_artifacts_from_json(const nlohmann::json& doc);

/// Aborts (std::logic_error) when a test-tagged sequence reaches a training stage.
class LeakGuard {
 public:
  LeakGuard(std::vector<std::size_t> test_indices, bool enabled);
  void check_training(const std::vector<std::size_t>& indices, const char* stage) const;

 private:
  std::vector<std::size_t> test_;  // sorted
  bool enabled_;
};

/// Preprocess -> stacked DAE (or raw joints) -> per-class phantoms -> intra-warp -> FTP -> SVM.
/// `labels` maps every dataset index to its local class 1..class_labels.size(); `class_labels`
/// holds the dataset label of each local class. Every local class needs training sequences.
FoldArtifacts train_fold(const Dataset& data, const DatasetMeta& meta, const std::vector<int>& labels,
                         const std::vector<int>& class_labels, const std::vector<std::size_t>& train,
                         const PipelineConfig& cfg,
                         std::uint64_t fold_seed, const LeakGuard& guard);

/// Local label (1-based) predicted for a raw sequence.
SvmPrediction predict_sequence(const FoldArtifacts& fold, const ActionSequence& raw,
                               const PipelineConfig& cfg);

/// Per-sequence descriptors used by the classifier (DAE codes or normalized joints).
FeatureSequence sequence_features(const FoldArtifacts& fold, const ActionSequence& preprocessed,
                                  Variant variant);

struct PipelineResult {
  RunReport report;
  std::vector<FoldArtifacts> folds;
};

/// Runs every fold (per class subset when configured) and aggregates one report.
PipelineResult run_pipeline(const Dataset& data, const DatasetMeta& meta, const PipelineConfig& cfg);

/// Re-evaluates saved fold artifacts on the protocol's test splits.
RunReport evaluate_pipeline(const Dataset& data, const DatasetMeta& meta, const PipelineConfig& cfg,
                            const std::vector<FoldArtifacts>& folds);

}  // namespace actrec
