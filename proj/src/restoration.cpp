#include "actrec/restoration.hpp"

#include <algorithm>

#include "actrec/error.hpp"
#include "actrec/preprocess.hpp"

namespace actrec {

void CorruptionSpec::validate() const {
  if (!(joint_drop >= 0.0 && joint_drop <= 1.0))
    throw ConfigError("joint_drop must lie in [0,1]");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
}

ActionSequence corrupt_sequence(const ActionSequence& clean, const CorruptionSpec& spec, Rng& rng) {
  spec.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  ActionSequence out = clean;
  for (auto& frame : out.frames) {
    for (auto& joint : frame.joints) {
      if (unit(rng) < spec.joint_drop) {
        joint.position.setZero();
        joint.is_missing = true;
      } else if (spec.noise_sigma > 0.0) {
        for (int a = 0; a < 3; ++a) joint.position(a) += noise(rng);
      }
    }
  }
  return out;
}

double coordinate_mse(const Dataset& a, const Dataset& b) {
  if (a.size() != b.size()) throw DataError("datasets differ in size");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].frames.size() != b[s].frames.size()) throw DataError("sequences differ in length");
    for (std::size_t f = 0; f < a[s].frames.size(); ++f) {
      const auto& ja = a[s].frames[f].joints;
      const auto& jb = b[s].frames[f].joints;
      if (ja.size() != jb.size()) throw DataError("frames differ in joint count");
      for (std::size_t j = 0; j < ja.size(); ++j) {
        sum += (ja[j].position - jb[j].position).squaredNorm();
        count += 3;
      }
    }
  }
  if (count == 0) throw DataError("no coordinates to compare");
  return sum / static_cast<double>(count);
}

RestorationResult run_restoration(const Dataset& data, const DatasetMeta& meta,
                                  const std::vector<int>& train_subjects,
                                  const RestorationSetup& setup) {
  setup.corruption.validate();
  Dataset train_raw;
  Dataset test_raw;
  for (const auto& s : data) {
    const bool train = std::find(train_subjects.begin(), train_subjects.end(), s.subject_id) !=
                       train_subjects.end();
    (train ? train_raw : test_raw).push_back(s);
  }
  if (train_raw.empty() || test_raw.empty())
    throw DataError("restoration needs both training and held-out sequences");

  const auto norm = NormalizationConfig::from_meta(meta, choose_reference_frame(train_raw, meta),
                                                   setup.target_length, setup.chunk_count);
  Dataset train_pre;
  for (const auto& s : train_raw) train_pre.push_back(preprocess_sequence(s, norm));

  TrainConfig cfg = setup.train;
  cfg.seed = derive_seed(setup.seed, stream::kDae);
  auto scaler = InputScaler::fit(train_pre);
  const auto inputs = make_layer_inputs(train_pre, scaler, meta.category_count, setup.chunk_count);
  const auto model = train_stack(inputs, setup.hidden_sizes, cfg, std::move(scaler));

  RestorationResult r;
  r.final_training_loss = finetune_loss(model.layers, inputs, cfg);
  Rng rng(derive_seed(setup.seed, stream::kCorruption));
  Dataset passthrough;
  for (const auto& s : test_raw) {
    r.clean.push_back(preprocess_sequence(s, norm));
    r.corrupted.push_back(corrupt_sequence(r.clean.back(), setup.corruption, rng));
    r.restored.push_back(restore_sequence(model, r.corrupted.back()));
    passthrough.push_back(restore_sequence(model, r.clean.back()));
  }
  r.corrupted_mse = coordinate_mse(r.corrupted, r.clean);
  r.restored_mse = coordinate_mse(r.restored, r.clean);
  r.clean_passthrough_mse = coordinate_mse(passthrough, r.clean);
  return r;
}

}  // namespace actrec
