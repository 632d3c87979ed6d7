#include "actrec/model_io.hpp"

#include <nlohmann/json.hpp>

#include "actrec/json_util.hpp"

namespace actrec {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

void check_header(const json& doc, const char* format) {
  if (!doc.contains("format") || doc.at("format") != format)
    throw DataError(std::string("expected a '") + format + "' document");
  if (!doc.contains("version") || doc.at("version").get<int>() != kModelFormatVersion)
    throw DataError(std::string("unsupported '") + format + "' version");
}

}  // namespace

json to_json(const TrainConfig& c) {
  return {{"q", c.q},
          {"lambda", c.lambda},
          {"beta", c.beta},
          {"rho", c.rho},
          {"sparsity_weight", c.sparsity_weight},
          {"sparse_layer", c.sparse_layer},
          {"learning_rate", c.learning_rate},
          {"decay_epochs", c.decay_epochs},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"finetune_epochs", c.finetune_epochs},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& doc, TrainConfig c) {
  read_opt(doc, "q", c.q);
  read_opt(doc, "lambda", c.lambda);
  read_opt(doc, "beta", c.beta);
  read_opt(doc, "rho", c.rho);
  read_opt(doc, "sparsity_weight", c.sparsity_weight);
  read_opt(doc, "sparse_layer", c.sparse_layer);
  read_opt(doc, "learning_rate", c.learning_rate);
  read_opt(doc, "decay_epochs", c.decay_epochs);
  read_opt(doc, "batch_size", c.batch_size);
  read_opt(doc, "epochs", c.epochs);
  read_opt(doc, "finetune_epochs", c.finetune_epochs);
  read_opt(doc, "seed", c.seed);
  c.validate();
  return c;
}

json to_json(const RegistrationConfig& c) {
  return {{"delta", c.delta},       {"delta_prime", c.delta_prime},
          {"eta", c.eta},           {"zeta", c.zeta},
          {"max_iters", c.max_iters}, {"seed", c.seed},
          {"method", std::string(to_string(c.method))}};
}

RegistrationConfig registration_config_from_json(const json& doc, RegistrationConfig c) {
  read_opt(doc, "delta", c.delta);
  read_opt(doc, "delta_prime", c.delta_prime);
  read_opt(doc, "eta", c.eta);
  read_opt(doc, "zeta", c.zeta);
  read_opt(doc, "max_iters", c.max_iters);
  read_opt(doc, "seed", c.seed);
  if (doc.contains("method")) c.method = parse_registration(doc.at("method").get<std::string>());
  c.validate();
  return c;
}

json to_json(const FtpConfig& c) {
  return {{"segments_per_level", c.segments_per_level},
          {"coeffs_per_segment", c.coeffs_per_segment}};
}

FtpConfig ftp_config_from_json(const json& doc, FtpConfig c) {
  read_opt(doc, "segments_per_level", c.segments_per_level);
  read_opt(doc, "coeffs_per_segment", c.coeffs_per_segment);
  if (doc.contains("levels") &&
      doc.at("levels").get<std::size_t>() != c.segments_per_level.size())
    throw ConfigError("ftp.levels disagrees with segments_per_level");
  c.validate();
  return c;
}

json to_json(const SyntheticSpec& s) {
  return {{"class_count", s.class_count},
          {"sequences_per_class", s.sequences_per_class},
          {"joint_count", s.joint_count},
          {"min_length", s.min_length},
          {"max_length", s.max_length},
          {"speed_jitter", s.speed_jitter},
          {"noise_sigma", s.noise_sigma},
          {"missing_joint_prob", s.missing_joint_prob},
          {"periodic_classes", s.periodic_classes},
          {"subject_count", s.subject_count},
          {"subject_variation", s.subject_variation},
          {"class_separation", s.class_separation},
          {"amplitude", s.amplitude},
          {"seed", s.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("synthetic spec must be an object");
  const auto known = to_json(SyntheticSpec{});
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key)) throw ConfigError("unknown synthetic key '" + key + "'");
  SyntheticSpec s;
  try {
    read_opt(doc, "class_count", s.class_count);
    read_opt(doc, "sequences_per_class", s.sequences_per_class);
    read_opt(doc, "joint_count", s.joint_count);
    read_opt(doc, "min_length", s.min_length);
    read_opt(doc, "max_length", s.max_length);
    read_opt(doc, "speed_jitter", s.speed_jitter);
    read_opt(doc, "noise_sigma", s.noise_sigma);
    read_opt(doc, "missing_joint_prob", s.missing_joint_prob);
    read_opt(doc, "periodic_classes", s.periodic_classes);
    read_opt(doc, "subject_count", s.subject_count);
    read_opt(doc, "subject_variation", s.subject_variation);
    read_opt(doc, "class_separation", s.class_separation);
    read_opt(doc, "amplitude", s.amplitude);
    read_opt(doc, "seed", s.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const DatasetMeta& m) {
  return {{"joint_count", m.joint_count},
          {"category_count", m.category_count},
          {"sequence_count", m.sequence_count},
          {"hip_joint_index", m.hip_joint_index},
          {"left_hip_index", m.left_hip_index},
          {"right_hip_index", m.right_hip_index},
          {"category_names", m.category_names},
          {"parent", m.parent}};
}

DatasetMeta dataset_meta_from_json(const json& doc) {
  DatasetMeta m;
  try {
    m.joint_count = doc.at("joint_count").get<int>();
    m.category_count = doc.at("category_count").get<int>();
    m.sequence_count = doc.value("sequence_count", 0);
    m.hip_joint_index = doc.at("hip_joint_index").get<int>();
    m.left_hip_index = doc.at("left_hip_index").get<int>();
    m.right_hip_index = doc.at("right_hip_index").get<int>();
    m.category_names = doc.value("category_names", std::vector<std::string>{});
    m.parent = doc.value("parent", std::vector<int>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed dataset meta: ") + e.what());
  }
  m.validate();
  return m;
}

json to_json(const SkeletonFrame& frame) {
  json joints = json::array();
  for (const auto& j : frame.joints)
    joints.push_back({j.position.x(), j.position.y(), j.position.z(),
                      j.confidence ? json(*j.confidence) : json(nullptr), j.is_missing});
  return joints;
}

SkeletonFrame frame_from_json(const json& doc) {
  SkeletonFrame frame;
  for (const auto& jj : doc) {
    Joint j;
    j.position = {jj.at(0).get<double>(), jj.at(1).get<double>(), jj.at(2).get<double>()};
    if (!jj.at(3).is_null()) j.confidence = jj.at(3).get<double>();
    j.is_missing = jj.at(4).get<bool>();
    frame.joints.push_back(j);
  }
  return frame;
}

json to_json(const NormalizationConfig& c) {
  return {{"hip_joint_index", c.hip_joint_index},
          {"left_hip_index", c.left_hip_index},
          {"right_hip_index", c.right_hip_index},
          {"parent", c.parent},
          {"reference_skeleton", to_json(c.reference_skeleton)},
          {"target_length", c.target_length},
          {"chunk_count", c.chunk_count}};
}

NormalizationConfig normalization_from_json(const json& doc) {
  NormalizationConfig c;
  c.hip_joint_index = doc.at("hip_joint_index").get<int>();
  c.left_hip_index = doc.at("left_hip_index").get<int>();
  c.right_hip_index = doc.at("right_hip_index").get<int>();
  c.parent = doc.at("parent").get<std::vector<int>>();
  c.reference_skeleton = frame_from_json(doc.at("reference_skeleton"));
  c.target_length = doc.at("target_length").get<int>();
  c.chunk_count = doc.at("chunk_count").get<int>();
  c.validate();
  return c;
}

json to_json(const StackedModel& model) {
  json layers = json::array();
  for (const auto& layer : model.layers) {
    json entry;
    layer.for_each([&entry](const char* name, const auto& p) { entry[name] = matrix_to_json(p); });
    layers.push_back(std::move(entry));
  }
  return {{"format", "actrec-dae"},
          {"version", kModelFormatVersion},
          {"input_dim", model.input_dim},
          {"category_count", model.category_count},
          {"chunk_count", model.chunk_count},
          {"scaler",
           {{"min", vector_to_json(model.scaler.min)},
            {"max", vector_to_json(model.scaler.max)},
            {"lo", model.scaler.lo},
            {"hi", model.scaler.hi}}},
          {"train_config", to_json(model.config)},
          {"layers", std::move(layers)}};
}

StackedModel stacked_model_from_json(const json& doc) {
  check_header(doc, "actrec-dae");
  StackedModel model;
  model.input_dim = doc.at("input_dim").get<int>();
  model.category_count = doc.at("category_count").get<int>();
  model.chunk_count = doc.at("chunk_count").get<int>();
  const auto& s = doc.at("scaler");
  model.scaler.min = vector_from_json(s.at("min"));
  model.scaler.max = vector_from_json(s.at("max"));
  model.scaler.lo = s.at("lo").get<double>();
  model.scaler.hi = s.at("hi").get<double>();
  model.config = train_config_from_json(doc.at("train_config"));
  Eigen::Index expected_input = model.input_dim;
  for (const auto& entry : doc.at("layers")) {
    DaeLayer<double> layer;
    layer.for_each([&entry](const char* name, auto& p) {
      const Eigen::MatrixXd m = matrix_from_json(entry.at(name));
      if constexpr (std::decay_t<decltype(p)>::ColsAtCompileTime == 1) {
        if (m.cols() != 1) throw DataError(std::string("expected a column vector for ") + name);
        p = m.col(0);
      } else {
        p = m;
      }
    });
    const auto h = layer.hidden_dim();
    if (layer.input_dim() != expected_input || layer.enc_bias.size() != h ||
        layer.dec_x_weight.rows() != expected_input || layer.dec_x_weight.cols() != h ||
        layer.dec_x_bias.size() != expected_input ||
        layer.dec_c_weight.rows() != model.category_count || layer.dec_c_weight.cols() != h ||
        layer.dec_c_bias.size() != model.category_count ||
        layer.dec_t_weight.rows() != model.chunk_count || layer.dec_t_weight.cols() != h ||
        layer.dec_t_bias.size() != model.chunk_count)
      throw DataError("inconsistent layer shapes in model file");
    expected_input = h;
    model.layers.push_back(std::move(layer));
  }
  if (model.scaler.min.size() != model.input_dim || model.scaler.max.size() != model.input_dim)
    throw DataError("scaler size does not match input_dim");
  return model;
}

json phantoms_to_json(const std::vector<PhantomTemplate<double>>& phantoms,
                      const RegistrationConfig& cfg) {
  json list = json::array();
  for (const auto& p : phantoms)
    list.push_back({{"class_id", p.class_id},
                    {"T", p.length()},
                    {"iterations", p.iterations},
                    {"converged", p.converged},
                    {"atoms", matrix_to_json(p.atoms)}});
  return {{"format", "actrec-phantoms"},
          {"version", kModelFormatVersion},
          {"registration", to_json(cfg)},
          {"phantoms", std::move(list)}};
}

std::vector<PhantomTemplate<double>> phantoms_from_json(const json& doc) {
  check_header(doc, "actrec-phantoms");
  std::vector<PhantomTemplate<double>> out;
  for (const auto& entry : doc.at("phantoms")) {
    PhantomTemplate<double> p;
    p.class_id = entry.at("class_id").get<int>();
    p.atoms = matrix_from_json(entry.at("atoms"));
    p.iterations = entry.at("iterations").get<int>();
    p.converged = entry.at("converged").get<bool>();
    if (p.length() != entry.at("T").get<Eigen::Index>())
      throw DataError("phantom length does not match T");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace actrec
