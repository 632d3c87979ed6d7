#include "actrec/restoration.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "actrec/error.hpp"
#include "actrec/synthetic.hpp"
#include "test_util.hpp"

namespace actrec {
namespace {

ActionSequence grid_sequence(int frames, int joints) {
  ActionSequence s;
  for (int f = 0; f < frames; ++f) {
    SkeletonFrame frame;
    for (int j = 0; j < joints; ++j) {
      Joint joint;
      joint.position = Eigen::Vector3d(f, j, f * j);
      frame.joints.push_back(joint);
    }
    s.frames.push_back(frame);
  }
  return s;
}

TEST(CorruptSequence, DropRateAndNoiseSpread) {
  const auto clean = grid_sequence(500, 20);
  Rng rng(7);
  const auto bad = corrupt_sequence(clean, {0.2, 0.05}, rng);
  int dropped = 0;
  double sq = 0.0;
  int kept = 0;
  for (std::size_t f = 0; f < clean.frames.size(); ++f)
    for (std::size_t j = 0; j < 20; ++j) {
      const auto& b = bad.frames[f].joints[j];
      if (b.is_missing) {
        ++dropped;
        EXPECT_EQ(b.position, Eigen::Vector3d::Zero());
      } else {
        sq += (b.position - clean.frames[f].joints[j].position).squaredNorm();
        kept += 3;
      }
    }
  const double n = 10000.0;
  EXPECT_NEAR(dropped, 0.2 * n, 3.0 * std::sqrt(n * 0.2 * 0.8));
  EXPECT_NEAR(std::sqrt(sq / kept), 0.05, 0.002);
}

TEST(CorruptSequence, ZeroCorruptionIsIdentity) {
  const auto clean = grid_sequence(4, 3);
  Rng rng(1);
  EXPECT_EQ(corrupt_sequence(clean, {0.0, 0.0}, rng), clean);
}

TEST(CorruptSequence, RejectsBadSpec) {
  Rng rng(1);
  EXPECT_THROW(corrupt_sequence(grid_sequence(2, 2), {1.5, 0.0}, rng), ConfigError);
  EXPECT_THROW(corrupt_sequence(grid_sequence(2, 2), {0.1, -1.0}, rng), ConfigError);
}

TEST(CoordinateMse, MeanOverAxes) {
  const auto a = grid_sequence(2, 2);
  auto b = a;
  b.frames[0].joints[1].position.x() += 2.0;  // one squared error of 4 over 12 coordinates
  EXPECT_DOUBLE_EQ(coordinate_mse({a}, {b}), 4.0 / 12.0);
  EXPECT_DOUBLE_EQ(coordinate_mse({a}, {a}), 0.0);
  EXPECT_THROW(coordinate_mse({a}, {grid_sequence(3, 2)}), DataError);
}

TEST(RunRestoration, SplitsBySubjectAndIsDeterministic) {
  SyntheticSpec spec;
  spec.class_count = 2;
  spec.sequences_per_class = 4;
  spec.subject_count = 4;
  spec.noise_sigma = 0.0;
  const auto [data, meta] = generate_synthetic(spec);
  RestorationSetup setup;
  setup.hidden_sizes = {8};
  setup.train.epochs = 3;
  setup.train.finetune_epochs = 1;
  setup.target_length = 14;
  setup.seed = 3;
  const auto a = run_restoration(data, meta, {1, 2}, setup);
  const auto b = run_restoration(data, meta, {1, 2}, setup);
  ASSERT_FALSE(a.clean.empty());
  for (const auto& s : a.clean) EXPECT_GE(s.subject_id, 3);
  EXPECT_EQ(a.restored, b.restored);
  EXPECT_EQ(a.restored_mse, b.restored_mse);
  EXPECT_GT(a.corrupted_mse, 0.0);
  EXPECT_THROW(run_restoration(data, meta, {1, 2, 3, 4}, setup), DataError);
}

}  // namespace
}  // namespace actrec
