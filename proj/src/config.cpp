#include "actrec/config.hpp"

#include <nlohmann/json.hpp>

#include "actrec/error.hpp"
#include "actrec/model_io.hpp"
#include "actrec/skeleton_io.hpp"

namespace actrec {

using nlohmann::json;

Variant parse_variant(std::string_view name) {
  if (name == "dae") return Variant::kDae;
  if (name == "dae_cc") return Variant::kDaeCc;
  if (name == "dae_tc") return Variant::kDaeTc;
  if (name == "dae_ctc") return Variant::kDaeCtc;
  if (name == "jp") return Variant::kJointPositions;
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kDae: return "dae";
    case Variant::kDaeCc: return "dae_cc";
    case Variant::kDaeTc: return "dae_tc";
    case Variant::kDaeCtc: return "dae_ctc";
    case Variant::kJointPositions: return "jp";
  }
  return "dae_ctc";
}

TrainConfig PipelineConfig::variant_train_config() const {
  TrainConfig t = train;
  if (variant == Variant::kDae || variant == Variant::kDaeTc) t.lambda = 0.0;
  if (variant == Variant::kDae || variant == Variant::kDaeCc) t.beta = 0.0;
  return t;
}

void PipelineConfig::validate() const {
  train.validate();
  registration.validate();
  ftp.validate();
  svm.validate();
  if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must not be empty");
  for (int h : hidden_sizes)
    if (h < 1) throw ConfigError("hidden sizes must be positive");
  if (chunk_count < 1 || target_length < chunk_count || target_length % chunk_count != 0)
    throw ConfigError("target_length must be a positive multiple of chunk_count");
  if (target_length < ftp.segments_per_level.back() * ftp.coeffs_per_segment)
    throw ConfigError("target_length too short for the FTP configuration");
}

std::vector<ClassSubset> msr_action_subsets() {
  // Subset memberships from the MSR-Action3D cross-subject protocol (Li et al., 2010).
  return {{"AS1", {2, 3, 5, 6, 10, 13, 18, 20}},
          {"AS2", {1, 4, 7, 8, 9, 11, 12, 14}},
          {"AS3", {6, 14, 15, 16, 17, 18, 19, 20}}};
}

json to_json(const PipelineConfig& c) {
  json subsets = json::array();
  for (const auto& s : c.protocol.subsets) subsets.push_back({{"name", s.name}, {"classes", s.classes}});
  return {{"seed", c.master_seed},
          {"variant", std::string(to_string(c.variant))},
          {"preprocess", {{"target_length", c.target_length}, {"chunk_count", c.chunk_count}}},
          {"train", [&] {
             json t = to_json(c.train);
             t["hidden_sizes"] = c.hidden_sizes;
             return t;
           }()},
          {"registration", [&] {
             json r = to_json(c.registration);
             r["window_from_chunks"] = c.window_from_chunks;
             return r;
           }()},
          {"ftp", to_json(c.ftp)},
          {"svm", {{"reg", c.svm.reg}, {"epochs", c.svm.epochs}}},
          {"protocol",
           {{"kind", std::string(to_string(c.protocol.kind))},
            {"train_subjects", c.protocol.train_subjects},
            {"subsets", subsets},
            {"seed", c.protocol.seed},
            {"resubstitution", c.resubstitution}}}};
}

PipelineConfig pipeline_config_from_json(const json& doc) {
  static const std::vector<std::string> known = {"seed", "variant", "preprocess", "train",
                                                 "registration", "ftp", "svm", "protocol",
                                                 "dataset", "synthetic", "restore", "comment"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config section '" + key + "'");

  PipelineConfig c;
  try {
    if (doc.contains("seed")) c.master_seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("variant")) c.variant = parse_variant(doc.at("variant").get<std::string>());
    if (doc.contains("preprocess")) {
      const auto& p = doc.at("preprocess");
      c.target_length = p.value("target_length", c.target_length);
      c.chunk_count = p.value("chunk_count", c.chunk_count);
    }
    if (doc.contains("train")) {
      const auto& t = doc.at("train");
      c.train = train_config_from_json(t);
      c.hidden_sizes = t.value("hidden_sizes", c.hidden_sizes);
    }
    if (doc.contains("registration")) {
      const auto& r = doc.at("registration");
      c.registration = registration_config_from_json(r);
      // explicit radii switch off the chunk-derived default
      c.window_from_chunks =
          r.value("window_from_chunks", !(r.contains("delta") || r.contains("delta_prime")));
    }
    if (doc.contains("ftp")) c.ftp = ftp_config_from_json(doc.at("ftp"));
    if (doc.contains("svm")) {
      const auto& s = doc.at("svm");
      c.svm.reg = s.value("reg", c.svm.reg);
      c.svm.epochs = s.value("epochs", c.svm.epochs);
    }
    if (doc.contains("protocol")) {
      const auto& p = doc.at("protocol");
      if (p.contains("kind")) c.protocol.kind = parse_protocol_kind(p.at("kind").get<std::string>());
      c.protocol.train_subjects = p.value("train_subjects", c.protocol.train_subjects);
      c.protocol.seed = p.value("seed", c.protocol.seed);
      c.resubstitution = p.value("resubstitution", c.resubstitution);
      if (p.contains("subsets")) {
        const auto& s = p.at("subsets");
        if (s.is_string()) {
          if (s.get<std::string>() != "msr") throw ConfigError("unknown named subset list");
          c.protocol.subsets = msr_action_subsets();
        } else {
          for (const auto& entry : s)
            c.protocol.subsets.push_back(
                {entry.at("name").get<std::string>(), entry.at("classes").get<std::vector<int>>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(doc);
}

}  // namespace actrec
