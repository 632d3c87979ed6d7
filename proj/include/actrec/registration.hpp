#pragma once

// Temporal registration of feature sequences (rows = frames) against per-class phantom
// templates. Indices are 0-based throughout.

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "actrec/error.hpp"
#include "actrec/types.hpp"

namespace actrec {

enum class RegistrationMethod { kLwsr, kDtw, kNone };
enum class WarpMode { kIntra, kInter };

RegistrationMethod parse_registration(std::string_view name);
std::string_view to_string(RegistrationMethod method);

struct RegistrationConfig {
  int delta = 5;        // intra window radius
  int delta_prime = 5;  // inter window radius
  double eta = 0.2;     // inter-class blend weight
  double zeta = 1e-6;   // convergence threshold on ||P' - P||^2
  int max_iters = 20;
  std::uint64_t seed = 0;
  RegistrationMethod method = RegistrationMethod::kLwsr;

  /// Window radius covering one temporal chunk: (length / chunk_count) / 2.
  static int chunk_radius(int length, int chunk_count) { return (length / chunk_count) / 2; }

  void validate() const {
    if (delta < 0 || delta_prime < 0) throw ConfigError("window radii must be >= 0");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0,1]");
    if (!(zeta > 0.0)) throw ConfigError("zeta must be > 0");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  }
};

template <typename Scalar>
struct PhantomTemplate {
  int class_id = 0;
  SequenceMatrix<Scalar> atoms;  // T x D
  int iterations = 0;
  bool converged = false;

  Eigen::Index length() const { return atoms.rows(); }
};

struct WarpingPath {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // (source i, template j)
  double total_cost = 0.0;
};

template <typename A, typename B>
auto squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a - b).squaredNorm();
}

/// Minimal-cost monotone alignment of `source` onto `templ` with fixed endpoints and steps
/// (1,0), (0,1), (1,1). Ties prefer the diagonal, then the step that advances the source only.
template <typename Scalar>
WarpingPath dtw_align(const SequenceMatrix<Scalar>& templ, const SequenceMatrix<Scalar>& source) {
  const auto n = source.rows();
  const auto m = templ.rows();
  if (n == 0 || m == 0) throw DataError("dtw_align needs non-empty sequences");
  if (source.cols() != templ.cols()) throw DataError("feature dimensions differ");

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double cost = static_cast<double>(squared_distance(source.row(i), templ.row(j)));
      double best = (i == 0 && j == 0) ? 0.0 : inf;
      if (i > 0 && j > 0) best = std::min(best, acc(i - 1, j - 1));
      if (i > 0) best = std::min(best, acc(i - 1, j));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      acc(i, j) = cost + best;
    }

  WarpingPath path;
  path.total_cost = acc(n - 1, m - 1);
  Eigen::Index i = n - 1, j = m - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

namespace detail {

template <typename Scalar, bool Maximize>
Eigen::Index window_search(const SequenceMatrix<Scalar>& templ, const SequenceMatrix<Scalar>& seq,
                           Eigen::Index i, int radius) {
  const auto length = templ.rows();
  if (seq.rows() != length) throw DataError("sequence and template lengths differ");
  if (seq.cols() != templ.cols()) throw DataError("feature dimensions differ");
  if (i < 0 || i >= length) throw DataError("frame index out of range");
  const auto lo = std::max<Eigen::Index>(0, i - radius);
  const auto hi = std::min<Eigen::Index>(length - 1, i + radius);
  Eigen::Index best_j = lo;
  Scalar best = squared_distance(templ.row(lo), seq.row(i));
  for (Eigen::Index j = lo + 1; j <= hi; ++j) {
    const Scalar d = squared_distance(templ.row(j), seq.row(i));
    if (Maximize ? d > best : d < best) {
      best = d;
      best_j = j;
    }
  }
  return best_j;
}

}  // namespace detail

/// Template index in the clipped window [i - radius, i + radius] closest to frame i of `seq`;
/// ties go to the smallest index.
template <typename Scalar>
Eigen::Index lwsr_intra(const SequenceMatrix<Scalar>& templ, const SequenceMatrix<Scalar>& seq,
                        Eigen::Index i, int radius) {
  return detail::window_search<Scalar, false>(templ, seq, i, radius);
}

/// As lwsr_intra, but picks the farthest template frame.
template <typename Scalar>
Eigen::Index lwsr_inter(const SequenceMatrix<Scalar>& templ, const SequenceMatrix<Scalar>& seq,
                        Eigen::Index i, int radius) {
  return detail::window_search<Scalar, true>(templ, seq, i, radius);
}

/// Builds a template-length sequence from (source, slot) assignments: each slot is the mean of
/// the source frames assigned to it; empty slots are interpolated linearly between the nearest
/// filled slots, or copied from the single nearest one at the borders.
template <typename Scalar>
SequenceMatrix<Scalar> assemble_slots(const SequenceMatrix<Scalar>& source,
                                      const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs,
                                      Eigen::Index slots) {
  SequenceMatrix<Scalar> out = SequenceMatrix<Scalar>::Zero(slots, source.cols());
  std::vector<int> count(static_cast<std::size_t>(slots), 0);
  for (const auto& [i, j] : pairs) {
    out.row(j) += source.row(i);
    ++count[static_cast<std::size_t>(j)];
  }
  std::vector<Eigen::Index> filled;
  for (Eigen::Index j = 0; j < slots; ++j)
    if (count[static_cast<std::size_t>(j)] > 0) {
      out.row(j) /= Scalar(count[static_cast<std::size_t>(j)]);
      filled.push_back(j);
    }
  if (filled.empty()) throw DataError("no frames assigned while warping");
  std::size_t next = 0;
  for (Eigen::Index j = 0; j < slots; ++j) {
    if (count[static_cast<std::size_t>(j)] > 0) {
      ++next;
      continue;
    }
    if (next == 0) {
      out.row(j) = out.row(filled.front());
    } else if (next == filled.size()) {
      out.row(j) = out.row(filled.back());
    } else {
      const auto a = filled[next - 1], b = filled[next];
      const Scalar w = Scalar(j - a) / Scalar(b - a);
      out.row(j) = (Scalar(1) - w) * out.row(a) + w * out.row(b);
    }
  }
  return out;
}

/// Warps `seq` onto the template's time axis with the configured registration method.
/// kNone returns the sequence unchanged.
template <typename Scalar>
SequenceMatrix<Scalar> warp_sequence(const SequenceMatrix<Scalar>& templ,
                                     const SequenceMatrix<Scalar>& seq, WarpMode mode,
                                     const RegistrationConfig& cfg) {
  switch (cfg.method) {
    case RegistrationMethod::kNone:
      return seq;
    case RegistrationMethod::kDtw:
      return assemble_slots(seq, dtw_align(templ, seq).pairs, templ.rows());
    case RegistrationMethod::kLwsr:
      break;
  }
  if (seq.rows() != templ.rows()) throw DataError("sequence and template lengths differ");
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(seq.rows()));
  for (Eigen::Index i = 0; i < seq.rows(); ++i)
    pairs.emplace_back(i, mode == WarpMode::kIntra ? lwsr_intra(templ, seq, i, cfg.delta)
                                                   : lwsr_inter(templ, seq, i, cfg.delta_prime));
  return assemble_slots(seq, pairs, templ.rows());
}

/// Iterative phantom estimation for one class: intra-warp every class sequence to the current
/// template, inter-warp one randomly drawn sequence from each other class, blend
/// P' = (1 - eta) mean(intra) + eta mean(inter), and stop once ||P' - P||^2 <= zeta (the
/// template from before that final update is kept). `trace`, when given, receives every P'.
template <typename Scalar>
PhantomTemplate<Scalar> compute_phantom(
    int class_id, const std::vector<SequenceMatrix<Scalar>>& class_sequences,
    const std::vector<std::vector<SequenceMatrix<Scalar>>>& other_class_pools,
    const RegistrationConfig& cfg, std::vector<SequenceMatrix<Scalar>>* trace = nullptr) {
  cfg.validate();
  if (class_sequences.empty())
    throw DataError("class " + std::to_string(class_id) + " has no training sequences");
  for (const auto& pool : other_class_pools)
    if (pool.empty()) throw DataError("empty inter-class pool for class " + std::to_string(class_id));
  if (other_class_pools.empty() && cfg.eta != 0.0)
    throw ConfigError("eta > 0 requires sequences from other classes");

  std::mt19937_64 rng(cfg.seed);
  PhantomTemplate<Scalar> phantom;
  phantom.class_id = class_id;
  phantom.atoms = class_sequences.front();
  const auto rows = phantom.atoms.rows(), cols = phantom.atoms.cols();

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    SequenceMatrix<Scalar> intra = SequenceMatrix<Scalar>::Zero(rows, cols);
    for (const auto& seq : class_sequences)
      intra += warp_sequence(phantom.atoms, seq, WarpMode::kIntra, cfg);
    intra /= Scalar(class_sequences.size());

    SequenceMatrix<Scalar> inter = SequenceMatrix<Scalar>::Zero(rows, cols);
    for (const auto& pool : other_class_pools) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      inter += warp_sequence(phantom.atoms, pool[pick(rng)], WarpMode::kInter, cfg);
    }
    if (!other_class_pools.empty()) inter /= Scalar(other_class_pools.size());

    const Scalar eta(cfg.eta);
    SequenceMatrix<Scalar> next = (Scalar(1) - eta) * intra + eta * inter;
    if (trace) trace->push_back(next);
    phantom.iterations = iter;
    if (static_cast<double>((next - phantom.atoms).squaredNorm()) <= cfg.zeta) {
      phantom.converged = true;
      break;
    }
    phantom.atoms = std::move(next);
  }
  return phantom;
}

}  // namespace actrec
