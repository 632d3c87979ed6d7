#include "actrec/synthetic.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <map>

#include "actrec/error.hpp"
#include "actrec/preprocess.hpp"
#include "actrec/skeleton_io.hpp"

namespace actrec {
namespace {

TEST(Synthetic, DeterministicInSpecAndSeed) {
  SyntheticSpec spec;
  spec.sequences_per_class = 4;
  spec.missing_joint_prob = 0.05;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  EXPECT_EQ(a.first, b.first);
  spec.seed = 1;
  EXPECT_NE(generate_synthetic(spec).first, a.first);
}

TEST(Synthetic, ClassBalancedAndWellFormed) {
  SyntheticSpec spec;
  spec.class_count = 4;
  spec.sequences_per_class = 7;
  spec.subject_count = 3;
  const auto [data, meta] = generate_synthetic(spec);
  EXPECT_NO_THROW(meta.validate());
  ASSERT_EQ(data.size(), 28u);
  std::map<int, int> per_class;
  for (const auto& s : data) {
    ++per_class[*s.label];
    EXPECT_GE(s.subject_id, 1);
    EXPECT_LE(s.subject_id, 3);
    EXPECT_GE(s.length(), 40u);
    EXPECT_LE(s.length(), 60u);
    for (std::size_t f = 0; f < s.frames.size(); ++f) {
      EXPECT_EQ(s.frames[f].timestamp_index, f);
      EXPECT_EQ(static_cast<int>(s.frames[f].joints.size()), meta.joint_count);
    }
  }
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(per_class[k], 7);
}

TEST(Synthetic, RejectsSingleClass) {
  SyntheticSpec spec;
  spec.class_count = 1;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
}

TEST(Synthetic, DegenerateSpecGivesResamplingsOfOneMotif) {
  SyntheticSpec spec;
  spec.noise_sigma = 0.0;
  spec.speed_jitter = 0.0;
  spec.missing_joint_prob = 0.0;
  spec.subject_variation = 0.0;
  spec.sequences_per_class = 5;
  const auto [data, meta] = generate_synthetic(spec);
  for (const auto& s : data) {
    const auto motif = synthetic_motif(spec, *s.label, static_cast<int>(s.length()));
    for (std::size_t f = 0; f < s.frames.size(); ++f)
      for (std::size_t j = 0; j < s.frames[f].joints.size(); ++j)
        EXPECT_TRUE(s.frames[f].joints[j].position.isApprox(motif.frames[f].joints[j].position, 1e-6));
  }
}

TEST(Synthetic, MissingJointsAreFlagged) {
  SyntheticSpec spec;
  spec.sequences_per_class = 2;
  spec.missing_joint_prob = 1.0;
  const auto [data, meta] = generate_synthetic(spec);
  for (const auto& s : data)
    for (const auto& f : s.frames)
      for (const auto& j : f.joints) EXPECT_TRUE(j.is_missing);
}

// Nearest-motif classification of clean data: every sequence lies closest to its own class motif.
TEST(Synthetic, CleanDataIsSeparableByNearestMotif) {
  SyntheticSpec spec;
  spec.class_count = 5;
  spec.sequences_per_class = 20;
  spec.noise_sigma = 0.0;
  const auto [data, meta] = generate_synthetic(spec);
  const auto cfg = NormalizationConfig::from_meta(meta, choose_reference_frame(data, meta), 70, 7);

  std::vector<Eigen::MatrixXd> motifs;
  auto flatten_all = [&cfg](const ActionSequence& s) {
    const auto pre = preprocess_sequence(s, cfg);
    Eigen::MatrixXd m(pre.length(), 3 * static_cast<Eigen::Index>(pre.frames[0].joints.size()));
    for (std::size_t f = 0; f < pre.frames.size(); ++f)
      m.row(static_cast<Eigen::Index>(f)) = flatten_frame(pre.frames[f]).transpose();
    return m;
  };
  for (int k = 1; k <= spec.class_count; ++k) motifs.push_back(flatten_all(synthetic_motif(spec, k, 50)));

  int correct = 0;
  for (const auto& s : data) {
    const auto m = flatten_all(s);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < spec.class_count; ++k) {
      const double d = (m - motifs[static_cast<std::size_t>(k)]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k + 1;
      }
    }
    correct += best == *s.label;
  }
  EXPECT_EQ(correct, 100);
}

}  // namespace
}  // namespace actrec
