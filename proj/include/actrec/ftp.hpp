#pragma once

// Fourier temporal pyramid: low-frequency DFT magnitudes of each feature dimension over
// recursively finer temporal segments.

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <vector>

#include "actrec/error.hpp"
#include "actrec/types.hpp"

namespace actrec {

struct FtpConfig {
  std::vector<int> segments_per_level{1, 2, 4};
  int coeffs_per_segment = 4;

  int total_segments() const {
    int total = 0;
    for (int s : segments_per_level) total += s;
    return total;
  }

  Eigen::Index feature_length(Eigen::Index dim) const {
    return dim * total_segments() * coeffs_per_segment;
  }

  void validate() const {
    if (segments_per_level.empty()) throw ConfigError("FTP needs at least one level");
    if (coeffs_per_segment < 1) throw ConfigError("coeffs_per_segment must be >= 1");
    for (std::size_t i = 0; i < segments_per_level.size(); ++i) {
      if (segments_per_level[i] < 1) throw ConfigError("segment counts must be >= 1");
      if (i > 0 && segments_per_level[i] <= segments_per_level[i - 1])
        throw ConfigError("segment counts must be strictly increasing");
    }
  }
};

/// Real and imaginary DFT rows for frequencies 0..k-1 over n samples (k x n each).
struct DftBasis {
  Eigen::MatrixXd cos_part;
  Eigen::MatrixXd sin_part;

  DftBasis(Eigen::Index n, int k) : cos_part(k, n), sin_part(k, n) {
    const double two_pi = 2.0 * std::numbers::pi;
    for (int f = 0; f < k; ++f)
      for (Eigen::Index t = 0; t < n; ++t) {
        // f*t reduced mod n keeps the angle exact for long signals
        const double angle = two_pi * static_cast<double>((f * t) % n) / static_cast<double>(n);
        cos_part(f, t) = std::cos(angle);
        sin_part(f, t) = -std::sin(angle);
      }
  }

  /// |X_f| / n for each column of `signals` (n x D); result is k x D.
  template <typename Derived>
  Eigen::MatrixXd magnitudes(const Eigen::MatrixBase<Derived>& signals) const {
    const Eigen::MatrixXd x = signals.template cast<double>();
    const Eigen::MatrixXd re = cos_part * x;
    const Eigen::MatrixXd im = sin_part * x;
    return (re.array().square() + im.array().square()).sqrt().matrix() /
           static_cast<double>(cos_part.cols());
  }
};

/// |X_f| / N for f = 0..k-1, where X is the DFT of the N-sample signal.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> dft_low_freq(
    const Eigen::MatrixBase<Derived>& signal, int k) {
  using Scalar = typename Derived::Scalar;
  const auto n = signal.size();
  if (k < 1 || k > n) throw DataError("dft_low_freq needs 1 <= k <= signal length");
  const DftBasis basis(n, k);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> column = signal;
  return basis.magnitudes(column).col(0).template cast<Scalar>();
}

/// [first, last) rows of segment s (0-based) out of m over a sequence of `length` frames.
inline std::pair<Eigen::Index, Eigen::Index> ftp_segment(Eigen::Index length, int m, int s) {
  return {(static_cast<Eigen::Index>(s) * length) / m,
          (static_cast<Eigen::Index>(s + 1) * length) / m};
}

/// Concatenated magnitudes ordered level, segment, dimension, coefficient.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ftp_features(const SequenceMatrix<Scalar>& warped,
                                                      const FtpConfig& cfg) {
  cfg.validate();
  const auto length = warped.rows();
  const auto dim = warped.cols();
  const int k = cfg.coeffs_per_segment;
  if (length < static_cast<Eigen::Index>(cfg.segments_per_level.back()) * k)
    throw DataError("sequence too short for the FTP configuration");

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(cfg.feature_length(dim));
  Eigen::Index pos = 0;
  for (int m : cfg.segments_per_level)
    for (int s = 0; s < m; ++s) {
      const auto [first, last] = ftp_segment(length, m, s);
      const DftBasis basis(last - first, k);
      const Eigen::MatrixXd mags = basis.magnitudes(warped.middleRows(first, last - first));
      // column-major k x D flattens to dimension-major, coefficient-minor
      out.segment(pos, k * dim) =
          Eigen::Map<const Eigen::VectorXd>(mags.data(), mags.size()).template cast<Scalar>();
      pos += k * dim;
    }
  return out;
}

}  // namespace actrec
