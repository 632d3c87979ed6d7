#include "actrec/registration.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "phantom_reference.hpp"

namespace actrec {
namespace {

using Seq = SequenceMatrix<double>;

Seq column(const std::vector<double>& v) {
  Seq s(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) s(static_cast<Eigen::Index>(i), 0) = v[i];
  return s;
}

Seq random_seq(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  return Seq::NullaryExpr(rows, cols, [&] { return g(rng); });
}

// Minimal cost over every monotone path from (0,0) to (n-1,m-1), by recursion.
double brute_force_dtw(const std::vector<double>& a, const std::vector<double>& b) {
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    const double c = (a[i] - b[j]) * (a[i] - b[j]);
    if (i == a.size() - 1 && j == b.size() - 1) return c;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < a.size()) best = std::min(best, go(i + 1, j));
    if (j + 1 < b.size()) best = std::min(best, go(i, j + 1));
    if (i + 1 < a.size() && j + 1 < b.size()) best = std::min(best, go(i + 1, j + 1));
    return c + best;
  };
  return go(0, 0);
}

void all_sequences(std::size_t length, std::vector<std::vector<double>>& out) {
  std::vector<double> v(length, 0.0);
  std::function<void(std::size_t)> fill = [&](std::size_t k) {
    if (k == length) {
      out.push_back(v);
      return;
    }
    for (double x : {0.0, 1.0, 2.0}) {
      v[k] = x;
      fill(k + 1);
    }
  };
  fill(0);
}

TEST(Dtw, IdenticalSequencesFollowDiagonal) {
  std::mt19937_64 rng(1);
  const auto s = random_seq(rng, 9, 3);
  const auto path = dtw_align(s, s);
  EXPECT_EQ(path.total_cost, 0.0);
  ASSERT_EQ(path.pairs.size(), 9u);
  for (std::size_t k = 0; k < 9; ++k)
    EXPECT_EQ(path.pairs[k], std::make_pair(Eigen::Index(k), Eigen::Index(k)));
}

TEST(Dtw, SingleFrameTemplateForcesPath) {
  std::mt19937_64 rng(2);
  const auto templ = random_seq(rng, 1, 2);
  const auto source = random_seq(rng, 6, 2);
  const auto path = dtw_align(templ, source);
  ASSERT_EQ(path.pairs.size(), 6u);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) expected += (source.row(i) - templ.row(0)).squaredNorm();
  EXPECT_NEAR(path.total_cost, expected, 1e-12);
}

TEST(Dtw, StepsAndEndpoints) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_seq(rng, 3 + trial % 7, 2);
    const auto b = random_seq(rng, 2 + trial % 5, 2);
    const auto path = dtw_align(a, b);
    EXPECT_EQ(path.pairs.front(), std::make_pair(Eigen::Index(0), Eigen::Index(0)));
    EXPECT_EQ(path.pairs.back(), std::make_pair(b.rows() - 1, a.rows() - 1));
    double cost = 0.0;
    for (std::size_t k = 0; k < path.pairs.size(); ++k) {
      const auto [i, j] = path.pairs[k];
      cost += (b.row(i) - a.row(j)).squaredNorm();
      if (k == 0) continue;
      const auto di = i - path.pairs[k - 1].first, dj = j - path.pairs[k - 1].second;
      EXPECT_TRUE((di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1));
    }
    EXPECT_NEAR(cost, path.total_cost, 1e-9);
  }
}

TEST(Dtw, EmptyInputThrows) {
  EXPECT_THROW(dtw_align(Seq(0, 1), column({1.0})), DataError);
}

TEST(Dtw, MatchesExhaustivePathEnumeration) {
  std::vector<std::vector<double>> seqs;
  for (std::size_t len = 1; len <= 4; ++len) all_sequences(len, seqs);
  for (const auto& a : seqs)
    for (const auto& b : seqs)
      ASSERT_EQ(dtw_align(column(a), column(b)).total_cost, brute_force_dtw(b, a));
}

TEST(Lwsr, ZeroRadiusIsIdentity) {
  std::mt19937_64 rng(4);
  const auto p = random_seq(rng, 10, 3), h = random_seq(rng, 10, 3);
  for (Eigen::Index i = 0; i < 10; ++i) {
    EXPECT_EQ(lwsr_intra(p, h, i, 0), i);
    EXPECT_EQ(lwsr_inter(p, h, i, 0), i);
  }
}

TEST(Lwsr, ConstantTemplateTakesWindowStart) {
  std::mt19937_64 rng(5);
  const Seq p = Seq::Constant(12, 2, 0.3);
  const auto h = random_seq(rng, 12, 2);
  for (Eigen::Index i = 0; i < 12; ++i) {
    EXPECT_EQ(lwsr_intra(p, h, i, 3), std::max<Eigen::Index>(0, i - 3));
    EXPECT_EQ(lwsr_inter(p, h, i, 3), std::max<Eigen::Index>(0, i - 3));
  }
}

TEST(Lwsr, MatchesBruteForceWindowScan) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_seq(rng, 8, 3), h = random_seq(rng, 8, 3);
    for (Eigen::Index i = 0; i < 8; ++i) {
      Eigen::Index lo_j = -1, hi_j = -1;
      double lo = 0, hi = 0;
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 2); j <= std::min<Eigen::Index>(7, i + 2); ++j) {
        const double d = (p.row(j) - h.row(i)).squaredNorm();
        if (lo_j < 0 || d < lo) lo = d, lo_j = j;
        if (hi_j < 0 || d > hi) hi = d, hi_j = j;
      }
      EXPECT_EQ(lwsr_intra(p, h, i, 2), lo_j);
      EXPECT_EQ(lwsr_inter(p, h, i, 2), hi_j);
    }
  }
}

TEST(Lwsr, OutOfRangeIndexThrows) {
  const Seq p = Seq::Zero(5, 1);
  EXPECT_THROW(lwsr_intra(p, p, 5, 1), DataError);
  EXPECT_THROW(lwsr_inter(p, p, -1, 1), DataError);
}

TEST(WarpSequence, ZeroRadiusAndSelfWarpAreIdentity) {
  std::mt19937_64 rng(7);
  const auto p = random_seq(rng, 14, 4), h = random_seq(rng, 14, 4);
  RegistrationConfig cfg;
  cfg.delta = cfg.delta_prime = 0;
  EXPECT_EQ(warp_sequence(p, h, WarpMode::kIntra, cfg), h);
  EXPECT_EQ(warp_sequence(p, h, WarpMode::kInter, cfg), h);
  cfg.delta = 3;
  EXPECT_EQ(warp_sequence(p, p, WarpMode::kIntra, cfg), p);
  cfg.method = RegistrationMethod::kNone;
  EXPECT_EQ(warp_sequence(p, h, WarpMode::kIntra, cfg), h);
}

TEST(WarpSequence, FiniteAndTemplateLength) {
  std::mt19937_64 rng(8);
  for (auto method : {RegistrationMethod::kLwsr, RegistrationMethod::kDtw})
    for (int trial = 0; trial < 20; ++trial) {
      RegistrationConfig cfg;
      cfg.method = method;
      cfg.delta = trial % 4;
      const auto p = random_seq(rng, 21, 2), h = random_seq(rng, 21, 2);
      const auto w = warp_sequence(p, h, trial % 2 ? WarpMode::kInter : WarpMode::kIntra, cfg);
      EXPECT_EQ(w.rows(), 21);
      EXPECT_TRUE(w.allFinite());
    }
}

TEST(AssembleSlots, MeansAndInterpolation) {
  const auto src = column({1.0, 3.0, 10.0, 20.0});
  const auto out = assemble_slots(src, {{0, 1}, {1, 1}, {2, 4}, {3, 4}}, 6);
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(out(2, 0), 2.0 + 13.0 / 3.0);
  EXPECT_DOUBLE_EQ(out(3, 0), 2.0 + 26.0 / 3.0);
  EXPECT_DOUBLE_EQ(out(4, 0), 15.0);
  EXPECT_DOUBLE_EQ(out(5, 0), 15.0);
}

// Two repetitions of a motif against a single-motif template: slot-wise error after warping.
// Reference values from tests/oracles/periodic_warp_oracle.py. On this fixture the monotone path
// compresses both repetitions into the template and ends up closer to it than the local window.
TEST(WarpSequence, PeriodicToySlotErrors) {
  const int length = 28;
  Seq p(length, 1), h(length, 1);
  for (int i = 0; i < length; ++i) {
    const double u = static_cast<double>(i) / (length - 1);
    p(i, 0) = std::sin(2 * std::numbers::pi * u);
    h(i, 0) = std::sin(4 * std::numbers::pi * u);
  }
  RegistrationConfig cfg;
  cfg.delta = RegistrationConfig::chunk_radius(length, 7);
  const auto lwsr = warp_sequence(p, h, WarpMode::kIntra, cfg);
  cfg.method = RegistrationMethod::kDtw;
  const auto dtw = warp_sequence(p, h, WarpMode::kIntra, cfg);
  const double lwsr_err = (lwsr - p).squaredNorm() / length;
  const double dtw_err = (dtw - p).squaredNorm() / length;
  EXPECT_NEAR(lwsr_err, 0.4221250413421153, 1e-12);
  EXPECT_NEAR(dtw_err, 0.010141254445799556, 1e-12);
}

std::vector<std::vector<Seq>> fixture_pools() {
  std::vector<std::vector<Seq>> pools;
  for (const auto& cls : testing::phantom_fixture()) {
    pools.emplace_back();
    for (const auto& s : cls) pools.back().push_back(column(s));
  }
  return pools;
}

TEST(ComputePhantom, SingleSequenceIsFixedPoint) {
  std::mt19937_64 rng(9);
  const auto h = random_seq(rng, 10, 3);
  RegistrationConfig cfg;
  cfg.eta = 0.0;
  cfg.delta = 0;
  const auto phantom = compute_phantom<double>(1, {h}, {}, cfg);
  EXPECT_EQ(phantom.atoms, h);
  EXPECT_EQ(phantom.iterations, 1);
  EXPECT_TRUE(phantom.converged);
}

TEST(ComputePhantom, HugeThresholdStopsAfterOneIteration) {
  const auto pools = fixture_pools();
  RegistrationConfig cfg;
  cfg.zeta = 1e300;
  const auto phantom = compute_phantom<double>(1, pools[0], {pools[1]}, cfg);
  EXPECT_EQ(phantom.iterations, 1);
  EXPECT_TRUE(phantom.converged);
}

TEST(ComputePhantom, MatchesStraightLineReference) {
  const auto raw = testing::phantom_fixture();
  const auto pools = fixture_pools();
  RegistrationConfig cfg;
  cfg.delta = cfg.delta_prime = 1;
  cfg.eta = 0.2;
  cfg.max_iters = 10;
  cfg.seed = 17;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<Seq> trace;
    const auto phantom = compute_phantom<double>(cls + 1, pools[cls], {pools[1 - cls]}, cfg, &trace);
    const auto ref = testing::reference_phantom(raw[cls], {raw[1 - cls]}, 1, 1, 0.2, cfg.zeta, 10, 17);
    ASSERT_EQ(trace.size(), ref.candidates.size());
    EXPECT_EQ(phantom.iterations, ref.iterations);
    EXPECT_EQ(phantom.converged, ref.converged);
    for (std::size_t it = 0; it < trace.size(); ++it)
      EXPECT_LE((trace[it] - column(ref.candidates[it])).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((phantom.atoms - column(ref.result)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ComputePhantom, DeterministicAndBounded) {
  std::mt19937_64 rng(10);
  std::vector<Seq> own, other_a, other_b;
  for (int k = 0; k < 4; ++k) {
    own.push_back(random_seq(rng, 14, 3));
    other_a.push_back(random_seq(rng, 14, 3));
    other_b.push_back(random_seq(rng, 14, 3));
  }
  RegistrationConfig cfg;
  cfg.delta = cfg.delta_prime = 2;
  cfg.max_iters = 7;
  cfg.seed = 5;
  std::vector<Seq> trace;
  const auto a = compute_phantom<double>(0, own, {other_a, other_b}, cfg, &trace);
  const auto b = compute_phantom<double>(0, own, {other_a, other_b}, cfg);
  EXPECT_EQ(a.atoms, b.atoms);
  EXPECT_LE(a.iterations, 7);
  if (a.converged) {
    const Seq& before = trace.size() >= 2 ? trace[trace.size() - 2] : own.front();
    EXPECT_LE((trace.back() - before).squaredNorm(), cfg.zeta);
  }
}

TEST(ComputePhantom, ZeroEtaIgnoresOtherClasses) {
  std::mt19937_64 rng(11);
  std::vector<Seq> own, other_a, other_b;
  for (int k = 0; k < 3; ++k) {
    own.push_back(random_seq(rng, 14, 2));
    other_a.push_back(random_seq(rng, 14, 2));
    other_b.push_back(random_seq(rng, 14, 2));
  }
  RegistrationConfig cfg;
  cfg.eta = 0.0;
  cfg.delta = 2;
  EXPECT_EQ(compute_phantom<double>(0, own, {other_a}, cfg).atoms,
            compute_phantom<double>(0, own, {other_b}, cfg).atoms);
}

TEST(ComputePhantom, EmptyClassThrows) {
  EXPECT_THROW(compute_phantom<double>(0, {}, {}, RegistrationConfig{}), DataError);
}

}  // namespace
}  // namespace actrec
