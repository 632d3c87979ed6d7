#pragma once

// Single denoising-autoencoder layer with three decoder heads: skeleton reconstruction,
// category reconstruction and temporal-chunk reconstruction. All heads decode the shared
// hidden code h = s(W x~ + b) of the (corrupted) skeleton input.

#include <Eigen/Core>
#include <cmath>
#include <random>

#include "actrec/error.hpp"

namespace actrec {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
}

template <typename Scalar>
struct DaeLayer {
  Mat<Scalar> enc_weight;    // d' x d
  Vec<Scalar> enc_bias;      // d'
  Mat<Scalar> dec_x_weight;  // d x d'
  Vec<Scalar> dec_x_bias;    // d
  Mat<Scalar> dec_c_weight;  // l x d'
  Vec<Scalar> dec_c_bias;    // l
  Mat<Scalar> dec_t_weight;  // chunks x d'
  Vec<Scalar> dec_t_bias;    // chunks

  Eigen::Index input_dim() const { return enc_weight.cols(); }
  Eigen::Index hidden_dim() const { return enc_weight.rows(); }
  Eigen::Index category_dim() const { return dec_c_weight.rows(); }
  Eigen::Index chunk_dim() const { return dec_t_weight.rows(); }

  static DaeLayer zeros(Eigen::Index d, Eigen::Index hidden, Eigen::Index l, Eigen::Index chunks) {
    DaeLayer layer;
    layer.enc_weight = Mat<Scalar>::Zero(hidden, d);
    layer.enc_bias = Vec<Scalar>::Zero(hidden);
    layer.dec_x_weight = Mat<Scalar>::Zero(d, hidden);
    layer.dec_x_bias = Vec<Scalar>::Zero(d);
    layer.dec_c_weight = Mat<Scalar>::Zero(l, hidden);
    layer.dec_c_bias = Vec<Scalar>::Zero(l);
    layer.dec_t_weight = Mat<Scalar>::Zero(chunks, hidden);
    layer.dec_t_bias = Vec<Scalar>::Zero(chunks);
    return layer;
  }

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), offsets zero.
  template <typename Urng>
  static DaeLayer random(Eigen::Index d, Eigen::Index hidden, Eigen::Index l, Eigen::Index chunks,
                         Urng& rng) {
    auto layer = zeros(d, hidden, l, chunks);
    auto fill = [&rng](Mat<Scalar>& m) {
      const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = Scalar(dist(rng));
    };
    fill(layer.enc_weight);
    fill(layer.dec_x_weight);
    fill(layer.dec_c_weight);
    fill(layer.dec_t_weight);
    return layer;
  }

  /// Visits (name, parameter) pairs in a fixed order; used by optimizers, serializers and checks.
  template <typename F>
  void for_each(F&& f) {
    f("enc_weight", enc_weight);
    f("enc_bias", enc_bias);
    f("dec_x_weight", dec_x_weight);
    f("dec_x_bias", dec_x_bias);
    f("dec_c_weight", dec_c_weight);
    f("dec_c_bias", dec_c_bias);
    f("dec_t_weight", dec_t_weight);
    f("dec_t_bias", dec_t_bias);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<DaeLayer*>(this)->for_each(
        [&f](const char* name, const auto& p) { f(name, p); });
  }

  /// Visits matching parameters of two same-shaped layers.
  template <typename F>
  static void zip(DaeLayer& a, const DaeLayer& b, F&& f) {
    f(a.enc_weight, b.enc_weight);
    f(a.enc_bias, b.enc_bias);
    f(a.dec_x_weight, b.dec_x_weight);
    f(a.dec_x_bias, b.dec_x_bias);
    f(a.dec_c_weight, b.dec_c_weight);
    f(a.dec_c_bias, b.dec_c_bias);
    f(a.dec_t_weight, b.dec_t_weight);
    f(a.dec_t_bias, b.dec_t_bias);
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&ok](const char*, const auto& p) { ok = ok && p.allFinite(); });
    return ok;
  }

  bool operator==(const DaeLayer& o) const {
    return enc_weight == o.enc_weight && enc_bias == o.enc_bias &&
           dec_x_weight == o.dec_x_weight && dec_x_bias == o.dec_x_bias &&
           dec_c_weight == o.dec_c_weight && dec_c_bias == o.dec_c_bias &&
           dec_t_weight == o.dec_t_weight && dec_t_bias == o.dec_t_bias;
  }
};

/// Gradients share the parameter layout.
template <typename Scalar>
using DaeGradient = DaeLayer<Scalar>;

/// Column-major mini-batch: one example per column.
template <typename Scalar>
struct DaeBatch {
  Mat<Scalar> clean;      // d x n, reconstruction target x
  Mat<Scalar> corrupted;  // d x n, encoder input x~
  Mat<Scalar> category;   // l x n, one-hot c
  Mat<Scalar> temporal;   // chunks x n, one-hot t

  Eigen::Index size() const { return clean.cols(); }
};

/// Weights of the three reconstruction terms and the KL sparsity penalty.
struct LossWeights {
  double lambda = 1.5;
  double beta = 1.5;
  double rho = 0.1;
  double sparsity_weight = 0.0;  // zero disables the penalty
};

template <typename Scalar>
struct DaeActivations {
  Mat<Scalar> hidden;
  Mat<Scalar> recon_x;
  Mat<Scalar> recon_c;
  Mat<Scalar> recon_t;
};

/// Zeroes each coordinate independently with probability q.
template <typename Derived, typename Urng>
auto corrupt(const Eigen::MatrixBase<Derived>& x, double q, Urng& rng) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("masking probability must lie in [0,1]");
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime> out = x;
  if (q == 0.0) return out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      if (unit(rng) < q) out(i, j) = Scalar(0);
  return out;
}

template <typename Scalar, typename Derived>
Mat<Scalar> encode(const DaeLayer<Scalar>& layer, const Eigen::MatrixBase<Derived>& input) {
  if (input.rows() != layer.input_dim())
    throw DataError("input dimension " + std::to_string(input.rows()) + " != layer input " +
                    std::to_string(layer.input_dim()));
  return sigmoid((layer.enc_weight * input).colwise() + layer.enc_bias);
}

template <typename Scalar, typename Derived>
Mat<Scalar> decode_skeleton(const DaeLayer<Scalar>& layer, const Eigen::MatrixBase<Derived>& hidden) {
  return sigmoid((layer.dec_x_weight * hidden).colwise() + layer.dec_x_bias);
}

template <typename Scalar, typename Derived>
DaeActivations<Scalar> forward(const DaeLayer<Scalar>& layer,
                               const Eigen::MatrixBase<Derived>& corrupted) {
  DaeActivations<Scalar> a;
  a.hidden = encode(layer, corrupted);
  a.recon_x = decode_skeleton(layer, a.hidden);
  a.recon_c = sigmoid((layer.dec_c_weight * a.hidden).colwise() + layer.dec_c_bias);
  a.recon_t = sigmoid((layer.dec_t_weight * a.hidden).colwise() + layer.dec_t_bias);
  return a;
}

/// sum_j KL(rho || mean_j) over hidden units.
template <typename Scalar>
Scalar kl_sparsity(const Vec<Scalar>& mean_activation, double rho) {
  const Scalar r(rho);
  Scalar total(0);
  for (Eigen::Index j = 0; j < mean_activation.size(); ++j) {
    const Scalar m = mean_activation(j);
    total += r * std::log(r / m) + (Scalar(1) - r) * std::log((Scalar(1) - r) / (Scalar(1) - m));
  }
  return total;
}

template <typename Scalar>
void check_batch(const DaeBatch<Scalar>& batch, const DaeLayer<Scalar>& layer) {
  const auto n = batch.size();
  if (n == 0) throw DataError("empty batch");
  if (batch.clean.rows() != layer.input_dim() || batch.corrupted.rows() != layer.input_dim() ||
      batch.corrupted.cols() != n || batch.category.rows() != layer.category_dim() ||
      batch.category.cols() != n || batch.temporal.rows() != layer.chunk_dim() ||
      batch.temporal.cols() != n)
    throw DataError("batch shape does not match layer");
}

/// Plain denoising reconstruction loss: mean over the batch of ||x - r_x||^2.
template <typename Scalar>
Scalar reconstruction_loss(const DaeBatch<Scalar>& batch, const DaeLayer<Scalar>& layer) {
  check_batch(batch, layer);
  const Mat<Scalar> recon = decode_skeleton(layer, encode(layer, batch.corrupted));
  return (batch.clean - recon).squaredNorm() / Scalar(batch.size());
}

/// Mean over the batch of ||x - r_x||^2 + lambda ||c - r_c||^2 + beta ||t - r_t||^2, plus
/// sparsity_weight * sum_j KL(rho || mean h_j).
template <typename Scalar>
Scalar loss(const DaeBatch<Scalar>& batch, const DaeLayer<Scalar>& layer, const LossWeights& w) {
  check_batch(batch, layer);
  const auto a = forward(layer, batch.corrupted);
  const Scalar n(batch.size());
  const Scalar recon = (batch.clean - a.recon_x).squaredNorm() / n;
  const Scalar cat = (batch.category - a.recon_c).squaredNorm() / n;
  const Scalar tmp = (batch.temporal - a.recon_t).squaredNorm() / n;
  Scalar total = recon + Scalar(w.lambda) * cat + Scalar(w.beta) * tmp;
  if (w.sparsity_weight != 0.0)
    total += Scalar(w.sparsity_weight) *
             kl_sparsity<Scalar>(a.hidden.rowwise().mean().transpose(), w.rho);
  return total;
}

/// Analytic gradient of `loss` with respect to every parameter. Optionally returns the loss.
template <typename Scalar>
DaeGradient<Scalar> gradients(const DaeBatch<Scalar>& batch, const DaeLayer<Scalar>& layer,
                              const LossWeights& w, Scalar* loss_out = nullptr) {
  check_batch(batch, layer);
  const auto a = forward(layer, batch.corrupted);
  const Scalar n(batch.size());
  const auto dsig = [](const Mat<Scalar>& s) {
    return s.array() * (Scalar(1) - s.array());
  };

  const Mat<Scalar> err_x = a.recon_x - batch.clean;
  const Mat<Scalar> err_c = a.recon_c - batch.category;
  const Mat<Scalar> err_t = a.recon_t - batch.temporal;

  const Mat<Scalar> delta_x = (Scalar(2) / n) * (err_x.array() * dsig(a.recon_x)).matrix();
  const Mat<Scalar> delta_c =
      (Scalar(2 * w.lambda) / n) * (err_c.array() * dsig(a.recon_c)).matrix();
  const Mat<Scalar> delta_t = (Scalar(2 * w.beta) / n) * (err_t.array() * dsig(a.recon_t)).matrix();

  Mat<Scalar> d_hidden = layer.dec_x_weight.transpose() * delta_x +
                         layer.dec_c_weight.transpose() * delta_c +
                         layer.dec_t_weight.transpose() * delta_t;

  Vec<Scalar> mean_h;
  if (w.sparsity_weight != 0.0) {
    mean_h = a.hidden.rowwise().mean().transpose();
    const Scalar r(w.rho);
    const Vec<Scalar> d_mean =
        (-r / mean_h.array() + (Scalar(1) - r) / (Scalar(1) - mean_h.array())).matrix();
    d_hidden.colwise() += (Scalar(w.sparsity_weight) / n) * d_mean;
  }
  const Mat<Scalar> delta_h = (d_hidden.array() * dsig(a.hidden)).matrix();

  DaeGradient<Scalar> g;
  g.enc_weight = delta_h * batch.corrupted.transpose();
  g.enc_bias = delta_h.rowwise().sum();
  g.dec_x_weight = delta_x * a.hidden.transpose();
  g.dec_x_bias = delta_x.rowwise().sum();
  g.dec_c_weight = delta_c * a.hidden.transpose();
  g.dec_c_bias = delta_c.rowwise().sum();
  g.dec_t_weight = delta_t * a.hidden.transpose();
  g.dec_t_bias = delta_t.rowwise().sum();

  if (loss_out) {
    Scalar total = err_x.squaredNorm() / n + Scalar(w.lambda) * err_c.squaredNorm() / n +
                   Scalar(w.beta) * err_t.squaredNorm() / n;
    if (w.sparsity_weight != 0.0) total += Scalar(w.sparsity_weight) * kl_sparsity(mean_h, w.rho);
    *loss_out = total;
  }
  return g;
}

}  // namespace actrec
