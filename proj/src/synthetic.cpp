#include "actrec/synthetic.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "actrec/error.hpp"
#include "actrec/rng.hpp"

namespace actrec {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHipHalfWidth = 0.1;
constexpr double kBoneLength = 0.25;

struct ClassMotif {
  double frequency = 1.0;
  bool periodic = false;
  Eigen::MatrixXd phase;  // joint_count x 3
};

struct Skeleton {
  std::vector<int> parent;
  std::vector<Eigen::Vector3d> rest;
};

Skeleton build_skeleton(int joint_count) {
  Skeleton s;
  s.parent.assign(static_cast<std::size_t>(joint_count), 0);
  s.rest.assign(static_cast<std::size_t>(joint_count), Eigen::Vector3d::Zero());
  s.parent[0] = -1;
  s.rest[1] = {-kHipHalfWidth, 0.0, 0.0};
  s.rest[2] = {kHipHalfWidth, 0.0, 0.0};
  int chain_tip[3] = {0, 1, 2};
  const Eigen::Vector3d chain_dir[3] = {
      {0.0, 1.0, 0.0}, Eigen::Vector3d(-0.2, -1.0, 0.1).normalized(),
      Eigen::Vector3d(0.2, -1.0, 0.1).normalized()};
  for (int j = 3; j < joint_count; ++j) {
    const int c = (j - 3) % 3;
    const auto uj = static_cast<std::size_t>(j);
    s.parent[uj] = chain_tip[c];
    s.rest[uj] = s.rest[static_cast<std::size_t>(chain_tip[c])] + kBoneLength * chain_dir[c];
    chain_tip[c] = j;
  }
  return s;
}

std::vector<ClassMotif> draw_motifs(const SyntheticSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto joints = spec.joint_count;
  Eigen::MatrixXd shared(joints, 3);
  for (Eigen::Index i = 0; i < shared.size(); ++i) shared(i) = 2.0 * kPi * unit(rng);

  std::vector<ClassMotif> motifs;
  for (int k = 0; k < spec.class_count; ++k) {
    ClassMotif m;
    m.periodic = !spec.periodic_classes.empty() &&
                 spec.periodic_classes[static_cast<std::size_t>(k)];
    const double f = 0.5 + unit(rng);
    m.frequency = m.periodic ? 1.0 : f;
    m.phase.resize(joints, 3);
    for (Eigen::Index i = 0; i < m.phase.size(); ++i)
      m.phase(i) = shared(i) + spec.class_separation * kPi * (2.0 * unit(rng) - 1.0);
    motifs.push_back(std::move(m));
  }
  return motifs;
}

// Pose of the motif at phase `u` (in repetitions), canonical frame.
std::vector<Eigen::Vector3d> motif_pose(const Skeleton& skel, const ClassMotif& m,
                                        double amplitude, double u) {
  std::vector<Eigen::Vector3d> pose = skel.rest;
  for (std::size_t j = 1; j < pose.size(); ++j) {
    // hips move less so the hip bone stays well defined
    const double a = j <= 2 ? 0.25 * amplitude : amplitude;
    for (int axis = 0; axis < 3; ++axis)
      pose[j][axis] += a * std::sin(2.0 * kPi * m.frequency * u +
                                    m.phase(static_cast<Eigen::Index>(j), axis));
  }
  return pose;
}

double to_float_precision(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void SyntheticSpec::validate() const {
  if (class_count < 2) throw ConfigError("synthetic spec needs class_count >= 2");
  if (sequences_per_class < 1) throw ConfigError("sequences_per_class must be positive");
  if (joint_count < 3) throw ConfigError("synthetic skeleton needs at least 3 joints");
  if (min_length < 2 || max_length < min_length) throw ConfigError("invalid length range");
  if (speed_jitter < 0 || noise_sigma < 0) throw ConfigError("jitter and noise must be >= 0");
  if (missing_joint_prob < 0 || missing_joint_prob > 1)
    throw ConfigError("missing_joint_prob must lie in [0,1]");
  if (!periodic_classes.empty() && static_cast<int>(periodic_classes.size()) != class_count)
    throw ConfigError("periodic_classes must have one flag per class");
  if (subject_count < 1) throw ConfigError("subject_count must be positive");
}

DatasetMeta synthetic_meta(const SyntheticSpec& spec) {
  DatasetMeta meta;
  meta.joint_count = spec.joint_count;
  meta.category_count = spec.class_count;
  meta.sequence_count = spec.class_count * spec.sequences_per_class;
  meta.hip_joint_index = 0;
  meta.left_hip_index = 1;
  meta.right_hip_index = 2;
  meta.parent = build_skeleton(spec.joint_count).parent;
  for (int k = 1; k <= spec.class_count; ++k) meta.category_names.push_back("class" + std::to_string(k));
  return meta;
}

ActionSequence synthetic_motif(const SyntheticSpec& spec, int label, int length) {
  spec.validate();
  if (label < 1 || label > spec.class_count) throw DataError("label out of range");
  if (length < 2) throw DataError("motif length must be >= 2");
  Rng rng(derive_seed(spec.seed, stream::kSynthetic));
  const auto motifs = draw_motifs(spec, rng);
  const auto skel = build_skeleton(spec.joint_count);
  const auto& m = motifs[static_cast<std::size_t>(label - 1)];

  ActionSequence seq;
  seq.label = label;
  seq.instance_id = "motif" + std::to_string(label);
  for (int f = 0; f < length; ++f) {
    const double u = static_cast<double>(f) / (length - 1);
    SkeletonFrame frame;
    frame.timestamp_index = static_cast<std::size_t>(f);
    for (const auto& p : motif_pose(skel, m, spec.amplitude, u)) {
      Joint j;
      j.position = p.unaryExpr(&to_float_precision);
      j.confidence = 1.0;
      frame.joints.push_back(j);
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

std::pair<Dataset, DatasetMeta> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, stream::kSynthetic));
  const auto motifs = draw_motifs(spec, rng);
  const auto skel = build_skeleton(spec.joint_count);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  struct Subject {
    double scale;
    double yaw;
    Eigen::Vector3d offset;
  };
  std::vector<Subject> subjects;
  for (int s = 0; s < spec.subject_count; ++s) {
    const double v = spec.subject_variation;
    subjects.push_back({1.0 + v * (2.0 * unit(rng) - 1.0), v * kPi * (2.0 * unit(rng) - 1.0),
                        Eigen::Vector3d(unit(rng), unit(rng), 2.0 + unit(rng)) * 10.0 * v});
  }

  Dataset data;
  for (int k = 0; k < spec.class_count; ++k) {
    const auto& m = motifs[static_cast<std::size_t>(k)];
    for (int n = 0; n < spec.sequences_per_class; ++n) {
      const int subject_index = n % spec.subject_count;
      const auto& subj = subjects[static_cast<std::size_t>(subject_index)];
      const int length =
          spec.min_length +
          static_cast<int>(unit(rng) * (spec.max_length - spec.min_length + 1) - 1e-12);
      const double reps = m.periodic ? (unit(rng) < 0.5 ? 2.0 : 3.0) : 1.0;
      const double warp = std::clamp(spec.speed_jitter * (2.0 * unit(rng) - 1.0), -0.95, 0.95);
      const Eigen::Matrix3d rot = Eigen::AngleAxisd(subj.yaw, Eigen::Vector3d::UnitY()).matrix();

      ActionSequence seq;
      seq.label = k + 1;
      seq.subject_id = subject_index + 1;
      seq.instance_id = "c" + std::to_string(k + 1) + "_n" + std::to_string(n + 1);
      for (int f = 0; f < length; ++f) {
        const double t = static_cast<double>(f) / (length - 1);
        const double u = reps * (t + warp * std::sin(kPi * t) / kPi);
        SkeletonFrame frame;
        frame.timestamp_index = static_cast<std::size_t>(f);
        for (const auto& p : motif_pose(skel, m, spec.amplitude, u)) {
          Eigen::Vector3d world = rot * (subj.scale * p) + subj.offset;
          for (int a = 0; a < 3; ++a) world[a] += spec.noise_sigma * gauss(rng);
          Joint j;
          j.position = world.unaryExpr(&to_float_precision);
          j.confidence = 1.0;
          if (spec.missing_joint_prob > 0 && unit(rng) < spec.missing_joint_prob) {
            j.is_missing = true;
            j.confidence = 0.0;
          }
          frame.joints.push_back(j);
        }
        seq.frames.push_back(std::move(frame));
      }
      data.push_back(std::move(seq));
    }
  }
  return {std::move(data), synthetic_meta(spec)};
}

}  // namespace actrec
