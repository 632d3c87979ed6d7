#include "actrec/preprocess.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "actrec/error.hpp"

namespace actrec {
namespace {

const Joint& joint_at(const SkeletonFrame& frame, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= frame.joints.size())
    throw DataError("joint index " + std::to_string(index) + " out of range");
  return frame.joints[static_cast<std::size_t>(index)];
}

bool hips_usable(const SkeletonFrame& frame, const NormalizationConfig& cfg) {
  return !joint_at(frame, cfg.hip_joint_index).is_missing &&
         !joint_at(frame, cfg.left_hip_index).is_missing &&
         !joint_at(frame, cfg.right_hip_index).is_missing;
}

// Joints ordered so each parent precedes its children.
std::vector<int> root_outward_order(const std::vector<int>& parent, int root) {
  std::vector<int> order{root};
  for (std::size_t head = 0; head < order.size(); ++head)
    for (std::size_t j = 0; j < parent.size(); ++j)
      if (parent[j] == order[head]) order.push_back(static_cast<int>(j));
  if (order.size() != parent.size()) throw ConfigError("parent map is not a single tree");
  return order;
}

}  // namespace

NormalizationConfig NormalizationConfig::from_meta(const DatasetMeta& meta, SkeletonFrame reference,
                                                   int target_length, int chunk_count) {
  NormalizationConfig cfg;
  cfg.hip_joint_index = meta.hip_joint_index;
  cfg.left_hip_index = meta.left_hip_index;
  cfg.right_hip_index = meta.right_hip_index;
  cfg.parent = meta.parent;
  cfg.reference_skeleton = std::move(reference);
  cfg.target_length = target_length;
  cfg.chunk_count = chunk_count;
  cfg.validate();
  return cfg;
}

void NormalizationConfig::validate() const {
  if (chunk_count < 1) throw ConfigError("chunk_count must be positive");
  if (target_length < chunk_count || target_length % chunk_count != 0)
    throw ConfigError("target_length must be a positive multiple of chunk_count");
}

SkeletonFrame hip_center(const SkeletonFrame& frame, const NormalizationConfig& cfg) {
  const auto& hip = joint_at(frame, cfg.hip_joint_index);
  if (hip.is_missing) throw DataError("hip joint missing; frame unusable");
  const Eigen::Vector3d offset = hip.position;
  SkeletonFrame out = frame;
  for (auto& j : out.joints) j.position -= offset;
  out.joints[static_cast<std::size_t>(cfg.hip_joint_index)].position.setZero();
  return out;
}

Eigen::Matrix3d hip_alignment_rotation(const SkeletonFrame& frame, const NormalizationConfig& cfg) {
  const auto& left = joint_at(frame, cfg.left_hip_index);
  const auto& right = joint_at(frame, cfg.right_hip_index);
  if (left.is_missing || right.is_missing) throw DataError("hip joints missing; frame unusable");
  const Eigen::Vector3d bone = right.position - left.position;
  if (bone.norm() <= 1e-12) throw DataError("coincident hip joints; hip bone undefined");
  return Eigen::Quaterniond::FromTwoVectors(bone, Eigen::Vector3d::UnitX()).toRotationMatrix();
}

SkeletonFrame align_hip_bone(const SkeletonFrame& frame, const NormalizationConfig& cfg) {
  const Eigen::Matrix3d rot = hip_alignment_rotation(frame, cfg);
  SkeletonFrame out = frame;
  for (auto& j : out.joints) j.position = rot * j.position;
  return out;
}

ActionSequence scale_normalize(const ActionSequence& sequence, const NormalizationConfig& cfg) {
  const auto& ref = cfg.reference_skeleton;
  const auto joints = cfg.parent.size();
  if (ref.joints.size() != joints) throw DataError("reference skeleton joint count mismatch");
  const auto order = root_outward_order(cfg.parent, cfg.hip_joint_index);

  std::vector<double> ref_length(joints, 0.0);
  for (std::size_t j = 0; j < joints; ++j) {
    const int p = cfg.parent[j];
    if (p >= 0)
      ref_length[j] = (ref.joints[j].position - ref.joints[static_cast<std::size_t>(p)].position).norm();
  }

  ActionSequence out = sequence;
  for (auto& frame : out.frames) {
    if (frame.joints.size() != joints) throw DataError("frame joint count mismatch");
    const SkeletonFrame original = frame;
    for (int j : order) {
      const auto uj = static_cast<std::size_t>(j);
      const int p = cfg.parent[uj];
      if (p < 0) continue;
      const auto up = static_cast<std::size_t>(p);
      const Eigen::Vector3d bone = original.joints[uj].position - original.joints[up].position;
      const bool unreliable = original.joints[uj].is_missing || original.joints[up].is_missing;
      if (unreliable) {
        frame.joints[uj].position = frame.joints[up].position + bone;
        continue;
      }
      const double len = bone.norm();
      if (len <= 1e-12)
        throw DataError("zero-length bone at joint " + std::to_string(j) + " in " +
                        sequence.instance_id);
      frame.joints[uj].position = frame.joints[up].position + (ref_length[uj] / len) * bone;
    }
  }
  return out;
}

ActionSequence resample(const ActionSequence& sequence, int length) {
  const auto n = sequence.frames.size();
  if (n < 2) throw DataError("resampling needs at least 2 frames");
  if (length < 2) throw DataError("resample length must be >= 2");
  const auto joints = sequence.frames.front().joints.size();

  ActionSequence out = sequence;
  out.frames.assign(static_cast<std::size_t>(length), SkeletonFrame{});
  for (int k = 0; k < length; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(n - 1) / (length - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= n - 1) lo = n - 2;
    const double w = pos - static_cast<double>(lo);
    const auto& a = sequence.frames[lo];
    const auto& b = sequence.frames[lo + 1];
    auto& f = out.frames[static_cast<std::size_t>(k)];
    f.timestamp_index = static_cast<std::size_t>(k);
    f.joints.resize(joints);
    for (std::size_t j = 0; j < joints; ++j) {
      const auto& ja = a.joints[j];
      const auto& jb = b.joints[j];
      auto& o = f.joints[j];
      if (w == 0.0) {
        o = ja;
      } else if (w == 1.0) {
        o = jb;
      } else {
        o.position = (1.0 - w) * ja.position + w * jb.position;
        o.is_missing = ja.is_missing || jb.is_missing;
        if (ja.confidence && jb.confidence)
          o.confidence = (1.0 - w) * *ja.confidence + w * *jb.confidence;
      }
    }
  }
  return out;
}

Eigen::VectorXd temporal_chunk_vector(int frame_index, int length, int chunk_count) {
  if (length < 1 || chunk_count < 1) throw DataError("length and chunk_count must be positive");
  if (frame_index < 0 || frame_index >= length)
    throw DataError("frame index " + std::to_string(frame_index) + " out of range");
  const auto chunk = static_cast<Eigen::Index>(
      (static_cast<long long>(frame_index) * chunk_count) / length);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(chunk_count);
  t(chunk) = 1.0;
  return t;
}

Eigen::VectorXd one_hot_category(int label, int category_count) {
  if (label < 1 || label > category_count)
    throw DataError("label " + std::to_string(label) + " outside 1.." +
                    std::to_string(category_count));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(category_count);
  c(label - 1) = 1.0;
  return c;
}

Eigen::VectorXd flatten_frame(const SkeletonFrame& frame) {
  Eigen::VectorXd x(3 * static_cast<Eigen::Index>(frame.joints.size()));
  for (std::size_t j = 0; j < frame.joints.size(); ++j) {
    const auto& joint = frame.joints[j];
    x.segment<3>(3 * static_cast<Eigen::Index>(j)) =
        joint.is_missing ? Eigen::Vector3d::Zero() : joint.position;
  }
  return x;
}

SkeletonFrame unflatten_frame(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const std::vector<bool>& missing) {
  if (x.size() % 3 != 0) throw DataError("flattened frame size must be a multiple of 3");
  SkeletonFrame frame;
  const auto joints = static_cast<std::size_t>(x.size() / 3);
  frame.joints.resize(joints);
  for (std::size_t j = 0; j < joints; ++j) {
    frame.joints[j].position = x.segment<3>(3 * static_cast<Eigen::Index>(j));
    if (j < missing.size()) frame.joints[j].is_missing = missing[j];
  }
  return frame;
}

ActionSequence preprocess_sequence(const ActionSequence& sequence, const NormalizationConfig& cfg) {
  ActionSequence aligned = sequence;
  aligned.frames.clear();
  for (const auto& frame : sequence.frames) {
    if (!hips_usable(frame, cfg)) continue;
    aligned.frames.push_back(align_hip_bone(hip_center(frame, cfg), cfg));
  }
  if (aligned.frames.size() < 2)
    throw DataError("sequence " + sequence.instance_id + " has fewer than 2 usable frames");
  for (std::size_t i = 0; i < aligned.frames.size(); ++i) aligned.frames[i].timestamp_index = i;
  return resample(scale_normalize(aligned, cfg), cfg.target_length);
}

SkeletonFrame choose_reference_frame(const Dataset& training, const DatasetMeta& meta) {
  if (training.empty()) throw DataError("no training sequences to pick a reference skeleton from");
  NormalizationConfig cfg;
  cfg.hip_joint_index = meta.hip_joint_index;
  cfg.left_hip_index = meta.left_hip_index;
  cfg.right_hip_index = meta.right_hip_index;

  std::vector<const ActionSequence*> sorted;
  for (const auto& s : training) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->instance_id < b->instance_id;
  });
  for (const auto* seq : sorted)
    for (const auto& frame : seq->frames)
      if (hips_usable(frame, cfg)) {
        SkeletonFrame ref = align_hip_bone(hip_center(frame, cfg), cfg);
        ref.timestamp_index = 0;
        return ref;
      }
  throw DataError("no training frame has usable hip joints");
}

}  // namespace actrec
