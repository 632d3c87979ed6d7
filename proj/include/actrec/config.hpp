#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string_view>
#include <vector>

#include "actrec/ftp.hpp"
#include "actrec/protocol.hpp"
#include "actrec/registration.hpp"
#include "actrec/stack.hpp"
#include "actrec/svm.hpp"

namespace actrec {

/// Feature variants: the DAE family differs only in which privileged heads are weighted;
/// kJointPositions skips the autoencoder and uses normalized coordinates directly.
enum class Variant { kDae, kDaeCc, kDaeTc, kDaeCtc, kJointPositions };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant variant);

/// Master configuration, one section per stage.
struct PipelineConfig {
  TrainConfig train;
  std::vector<int> hidden_sizes{200, 400, 800};
  RegistrationConfig registration;
  bool window_from_chunks = true;  // derive delta/delta_prime from the chunk length
  FtpConfig ftp;
  SvmConfig svm;
  ProtocolSpec protocol;
  int target_length = 70;
  int chunk_count = 7;
  Variant variant = Variant::kDaeCtc;
  std::uint64_t master_seed = 0;
  bool resubstitution = false;  // debug: test on the training split

  /// Train config with lambda/beta zeroed according to the variant.
  TrainConfig variant_train_config() const;
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown sections are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Published MSR-Action3D class subsets (action ids 1..20).
std::vector<ClassSubset> msr_action_subsets();

}  // namespace actrec
