#include "actrec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "actrec/error.hpp"
#include "actrec/ftp.hpp"
#include "actrec/model_io.hpp"
#include "actrec/rng.hpp"

namespace actrec {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer(std::map<std::string, double>& sink, std::string stage)
      : sink_(sink), stage_(std::move(stage)), start_(Clock::now()) {}
  ~StageTimer() {
    sink_[stage_] += std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string stage_;
  Clock::time_point start_;
};

// One unit of work: a fold of the protocol restricted to one class subset.
struct PlannedFold {
  std::string name;
  std::string subset;
  std::vector<int> class_labels;  // local -> dataset label
  std::vector<int> local_labels;  // dataset index -> local label (0 = excluded)
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

std::vector<PlannedFold> plan_folds(const Dataset& data, const DatasetMeta& meta,
                                    const PipelineConfig& cfg) {
  for (const auto& s : data)
    if (!s.label) throw DataError("sequence " + s.instance_id + " has no label");

  std::vector<ClassSubset> subsets = cfg.protocol.subsets;
  if (subsets.empty()) {
    ClassSubset all{"all", {}};
    for (int k = 1; k <= meta.category_count; ++k) all.classes.push_back(k);
    subsets.push_back(std::move(all));
  }

  ProtocolSpec protocol = cfg.protocol;
  protocol.seed = derive_seed(cfg.master_seed, stream::kProtocol ^ cfg.protocol.seed);
  const auto folds = split_protocol(data, protocol);

  std::vector<PlannedFold> plan;
  for (std::size_t si = 0; si < subsets.size(); ++si) {
    const auto& subset = subsets[si];
    std::vector<int> local(data.size(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto it = std::find(subset.classes.begin(), subset.classes.end(), *data[i].label);
      if (it != subset.classes.end()) local[i] = static_cast<int>(it - subset.classes.begin()) + 1;
    }
    for (std::size_t fi = 0; fi < folds.size(); ++fi) {
      PlannedFold p;
      p.subset = subset.name;
      p.name = subsets.size() > 1 ? subset.name + "/" + folds[fi].name : folds[fi].name;
      p.class_labels = subset.classes;
      p.local_labels = local;
      auto keep = [&local](const std::vector<std::size_t>& idx) {
        std::vector<std::size_t> out;
        for (auto i : idx)
          if (local[i] > 0) out.push_back(i);
        return out;
      };
      p.train = keep(folds[fi].train);
      p.test = cfg.resubstitution ? p.train : keep(folds[fi].test);
      p.seed = derive_seed(cfg.master_seed, 1000 + 100 * si + fi);
      plan.push_back(std::move(p));
    }
  }
  return plan;
}

RegistrationConfig effective_registration(const PipelineConfig& cfg) {
  RegistrationConfig r = cfg.registration;
  if (cfg.window_from_chunks) {
    r.delta = r.delta_prime = RegistrationConfig::chunk_radius(cfg.target_length, cfg.chunk_count);
  }
  return r;
}

Eigen::VectorXd feature_row(const SequenceMatrix<double>& warped, const FtpConfig& ftp) {
  return ftp_features(warped, ftp);
}

}  // namespace

LeakGuard::LeakGuard(std::vector<std::size_t> test_indices, bool enabled)
    : test_(std::move(test_indices)), enabled_(enabled) {
  std::sort(test_.begin(), test_.end());
}

void LeakGuard::check_training(const std::vector<std::size_t>& indices, const char* stage) const {
  if (!enabled_) return;
  for (auto i : indices)
    if (std::binary_search(test_.begin(), test_.end(), i))
      throw std::logic_error(std::string("test sequence ") + std::to_string(i) +
                             " reached training stage '" + stage + "'");
}

FeatureSequence sequence_features(const FoldArtifacts& fold, const ActionSequence& preprocessed,
                                  Variant variant) {
  if (variant == Variant::kJointPositions || !fold.dae) return joint_position_features(preprocessed);
  return encode_sequence(*fold.dae, preprocessed);
}

FoldArtifacts train_fold(const Dataset& data, const DatasetMeta& meta, const std::vector<int>& labels,
                         const std::vector<int>& class_labels, const std::vector<std::size_t>& train,
                         const PipelineConfig& cfg, std::uint64_t fold_seed, const LeakGuard& guard) {
  FoldArtifacts fold;
  fold.class_labels = class_labels;
  const int l = static_cast<int>(class_labels.size());
  if (l < 2) throw DataError("fold needs at least 2 classes");
  std::vector<int> count(static_cast<std::size_t>(l), 0);
  for (auto i : train) {
    const int k = labels.at(i);
    if (k < 1 || k > l) throw DataError("training sequence " + data[i].instance_id + " has no local class");
    ++count[static_cast<std::size_t>(k - 1)];
  }
  for (int k = 0; k < l; ++k)
    if (count[static_cast<std::size_t>(k)] == 0)
      throw DataError("class " + std::to_string(class_labels[static_cast<std::size_t>(k)]) +
                      " has no training sequences");

  // preprocessing
  guard.check_training(train, "preprocess");
  Dataset train_raw;
  for (auto i : train) train_raw.push_back(data[i]);
  fold.normalization = NormalizationConfig::from_meta(meta, choose_reference_frame(train_raw, meta),
                                                      cfg.target_length, cfg.chunk_count);
  Dataset train_pre;
  for (std::size_t n = 0; n < train.size(); ++n) {
    train_pre.push_back(preprocess_sequence(train_raw[n], fold.normalization));
    train_pre.back().label = labels[train[n]];
  }

  // representation learning
  if (cfg.variant != Variant::kJointPositions) {
    guard.check_training(train, "dae");
    TrainConfig tcfg = cfg.variant_train_config();
    tcfg.seed = derive_seed(fold_seed, stream::kDae);
    auto scaler = InputScaler::fit(train_pre);
    const auto inputs = make_layer_inputs(train_pre, scaler, l, cfg.chunk_count);
    fold.dae = train_stack(inputs, cfg.hidden_sizes, tcfg, std::move(scaler));
  }
  std::vector<SequenceMatrix<double>> features;
  for (const auto& s : train_pre) features.push_back(sequence_features(fold, s, cfg.variant).features);

  // phantoms
  fold.registration = effective_registration(cfg);
  guard.check_training(train, "registration");
  if (fold.registration.method != RegistrationMethod::kNone) {
    std::vector<std::vector<SequenceMatrix<double>>> by_class(static_cast<std::size_t>(l));
    for (std::size_t n = 0; n < train.size(); ++n)
      by_class[static_cast<std::size_t>(labels[train[n]] - 1)].push_back(features[n]);
    const auto reg_seed = derive_seed(fold_seed, stream::kRegistration);
    for (int k = 0; k < l; ++k) {
      std::vector<std::vector<SequenceMatrix<double>>> others;
      for (int o = 0; o < l; ++o)
        if (o != k) others.push_back(by_class[static_cast<std::size_t>(o)]);
      RegistrationConfig rc = fold.registration;
      rc.seed = derive_seed(reg_seed, static_cast<std::uint64_t>(k + 1));
      fold.phantoms.push_back(
          compute_phantom(k + 1, by_class[static_cast<std::size_t>(k)], others, rc));
    }
  }

  // classifier
  guard.check_training(train, "svm");
  const auto dim = features.front().cols();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(train.size()), cfg.ftp.feature_length(dim));
  std::vector<int> y;
  for (std::size_t n = 0; n < train.size(); ++n) {
    const int label = labels[train[n]];
    const auto warped =
        fold.registration.method == RegistrationMethod::kNone
            ? features[n]
            : warp_sequence(fold.phantoms[static_cast<std::size_t>(label - 1)].atoms, features[n],
                            WarpMode::kIntra, fold.registration);
    rows.row(static_cast<Eigen::Index>(n)) = feature_row(warped, cfg.ftp).transpose();
    y.push_back(label);
  }
  SvmConfig scfg = cfg.svm;
  scfg.seed = derive_seed(fold_seed, stream::kSvm);
  fold.svm = svm_train_ova(rows, y, l, scfg);
  return fold;
}

SvmPrediction predict_sequence(const FoldArtifacts& fold, const ActionSequence& raw,
                               const PipelineConfig& cfg) {
  const auto pre = preprocess_sequence(raw, fold.normalization);
  const auto features = sequence_features(fold, pre, cfg.variant).features;
  if (fold.registration.method == RegistrationMethod::kNone)
    return svm_predict(fold.svm, feature_row(features, cfg.ftp).transpose());
  Eigen::MatrixXd variants(static_cast<Eigen::Index>(fold.phantoms.size()), fold.svm.feature_dim());
  for (std::size_t k = 0; k < fold.phantoms.size(); ++k)
    variants.row(static_cast<Eigen::Index>(k)) =
        feature_row(warp_sequence(fold.phantoms[k].atoms, features, WarpMode::kIntra, fold.registration),
                    cfg.ftp)
            .transpose();
  return svm_predict(fold.svm, variants);
}

namespace {

RunReport assemble_report(const Dataset& data, const DatasetMeta& meta, const PipelineConfig& cfg,
                          const std::vector<PlannedFold>& plan,
                          const std::vector<const FoldArtifacts*>& folds,
                          std::map<std::string, double>& timings) {
  RunReport report;
  report.config = to_json(cfg);
  for (int k = 1; k <= meta.category_count; ++k)
    report.class_names.push_back(static_cast<int>(meta.category_names.size()) >= k
                                     ? meta.category_names[static_cast<std::size_t>(k - 1)]
                                     : "class" + std::to_string(k));
  report.confusion = Eigen::MatrixXi::Zero(meta.category_count, meta.category_count);
  std::map<std::string, std::pair<int, int>> subset_hits;

  for (std::size_t f = 0; f < plan.size(); ++f) {
    StageTimer timer(timings, "test");
    const auto& p = plan[f];
    const auto& fold = *folds[f];
    int hits = 0;
    for (auto i : p.test) {
      const auto pred = predict_sequence(fold, data[i], cfg);
      const int predicted = fold.class_labels.at(static_cast<std::size_t>(pred.label - 1));
      report.confusion(*data[i].label - 1, predicted - 1) += 1;
      if (predicted == *data[i].label) ++hits;
    }
    const int total = static_cast<int>(p.test.size());
    if (total > 0) report.fold_accuracy[p.name] = static_cast<double>(hits) / total;
    subset_hits[p.subset].first += hits;
    subset_hits[p.subset].second += total;
  }
  report.finalize();
  if (!cfg.protocol.subsets.empty()) {
    double mean = 0.0;
    for (const auto& [name, ht] : subset_hits) {
      const double acc = ht.second > 0 ? static_cast<double>(ht.first) / ht.second : 0.0;
      report.subset_accuracy[name] = acc;
      mean += acc;
    }
    report.subset_accuracy["mean"] = mean / static_cast<double>(subset_hits.size());
  }
  report.timings = timings;
  return report;
}

}  // namespace

PipelineResult run_pipeline(const Dataset& data, const DatasetMeta& meta, const PipelineConfig& cfg) {
  cfg.validate();
  meta.validate();
  const auto plan = plan_folds(data, meta, cfg);
  PipelineResult result;
  std::map<std::string, double> timings;
  for (const auto& p : plan) {
    StageTimer timer(timings, "train");
    LeakGuard guard(p.test, !cfg.resubstitution);
    try {
      result.folds.push_back(train_fold(data, meta, p.local_labels, p.class_labels, p.train, cfg, p.seed, guard));
    } catch (const DataError& e) {
      throw DataError("fold " + p.name + ": " + e.what());
    }
    result.folds.back().name = p.name;
  }
  std::vector<const FoldArtifacts*> ptrs;
  for (const auto& f : result.folds) ptrs.push_back(&f);
  result.report = assemble_report(data, meta, cfg, plan, ptrs, timings);
  return result;
}

RunReport evaluate_pipeline(const Dataset& data, const DatasetMeta& meta, const PipelineConfig& cfg,
                            const std::vector<FoldArtifacts>& folds) {
  cfg.validate();
  meta.validate();
  const auto plan = plan_folds(data, meta, cfg);
  std::vector<const FoldArtifacts*> ptrs;
  for (const auto& p : plan) {
    auto it = std::find_if(folds.begin(), folds.end(), [&p](const auto& f) { return f.name == p.name; });
    if (it == folds.end()) throw DataError("no saved artifacts for fold " + p.name);
    ptrs.push_back(&*it);
  }
  std::map<std::string, double> timings;
  return assemble_report(data, meta, cfg, plan, ptrs, timings);
}

json to_json(const FoldArtifacts& fold) {
  return {{"format", "actrec-fold"},
          {"version", kModelFormatVersion},
          {"name", fold.name},
          {"class_labels", fold.class_labels},
          {"normalization", to_json(fold.normalization)},
          {"dae", fold.dae ? to_json(*fold.dae) : json(nullptr)},
          {"phantoms", phantoms_to_json(fold.phantoms, fold.registration)},
          {"svm", to_json(fold.svm)}};
}

FoldArtifacts fold_artifacts_from_json(const json& doc) {
  if (doc.value("format", "") != "actrec-fold") throw DataError("not a fold artifact file");
  if (doc.value("version", 0) != kModelFormatVersion) throw DataError("unsupported fold artifact version");
  FoldArtifacts f;
  f.name = doc.at("name").get<std::string>();
  f.class_labels = doc.at("class_labels").get<std::vector<int>>();
  f.normalization = normalization_from_json(doc.at("normalization"));
  if (!doc.at("dae").is_null()) f.dae = stacked_model_from_json(doc.at("dae"));
  f.phantoms = phantoms_from_json(doc.at("phantoms"));
  f.registration = registration_config_from_json(doc.at("phantoms").at("registration"));
  f.svm = svm_from_json(doc.at("svm"));
  return f;
}

}  // namespace actrec
