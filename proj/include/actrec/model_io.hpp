#pragma once

#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "actrec/ftp.hpp"
#include "actrec/preprocess.hpp"
#include "actrec/registration.hpp"
#include "actrec/stack.hpp"
#include "actrec/synthetic.hpp"

namespace actrec {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig base = {});

nlohmann::json to_json(const RegistrationConfig& cfg);
RegistrationConfig registration_config_from_json(const nlohmann::json& doc,
                                                 RegistrationConfig base = {});

nlohmann::json to_json(const FtpConfig& cfg);
FtpConfig ftp_config_from_json(const nlohmann::json& doc, FtpConfig base = {});

/// Unknown keys and malformed values raise ConfigError.
nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const DatasetMeta& meta);
DatasetMeta dataset_meta_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SkeletonFrame& frame);
SkeletonFrame frame_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const NormalizationConfig& cfg);
NormalizationConfig normalization_from_json(const nlohmann::json& doc);

/// Self-describing stacked model: version, shapes, parameters, input scaling, training config.
nlohmann::json to_json(const StackedModel& model);
StackedModel stacked_model_from_json(const nlohmann::json& doc);

/// Phantoms for all classes plus the registration config that produced them.
nlohmann::json phantoms_to_json(const std::vector<PhantomTemplate<double>>& phantoms,
                                const RegistrationConfig& cfg);
std::vector<PhantomTemplate<double>> phantoms_from_json(const nlohmann::json& doc);

}  // namespace actrec
