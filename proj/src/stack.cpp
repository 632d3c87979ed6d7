#include "actrec/stack.hpp"

#include <algorithm>
#include <numeric>

#include "actrec/preprocess.hpp"
#include "actrec/rng.hpp"

namespace actrec {
namespace {

Mat<double> gather(const Mat<double>& m, const std::vector<Eigen::Index>& order, std::size_t begin,
                   std::size_t end) {
  Mat<double> out(m.rows(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) out.col(static_cast<Eigen::Index>(i - begin)) = m.col(order[i]);
  return out;
}

double learning_rate_at(double base, double decay_epochs, int epoch) {
  return base / (1.0 + static_cast<double>(epoch) / decay_epochs);
}

template <typename Param>
void sgd_step(Param& p, const Param& g, double lr) {
  p.noalias() -= lr * g;
}

void check_inputs(const LayerInputs& inputs) {
  if (inputs.size() == 0) throw DataError("no training examples");
  if (inputs.category.cols() != inputs.size() || inputs.temporal.cols() != inputs.size())
    throw DataError("target columns do not match input columns");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(q >= 0 && q <= 1)) throw ConfigError("q must lie in [0,1]");
  if (lambda < 0 || beta < 0) throw ConfigError("lambda and beta must be >= 0");
  if (!(rho > 0 && rho < 1)) throw ConfigError("rho must lie in (0,1)");
  if (sparsity_weight < 0) throw ConfigError("sparsity_weight must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  if (!(decay_epochs > 0)) throw ConfigError("decay_epochs must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0 || finetune_epochs < 0) throw ConfigError("epoch counts must be >= 0");
}

InputScaler InputScaler::fit(const std::vector<ActionSequence>& sequences) {
  InputScaler s;
  for (const auto& seq : sequences)
    for (const auto& frame : seq.frames) {
      const auto d = 3 * static_cast<Eigen::Index>(frame.joints.size());
      if (s.min.size() == 0) {
        s.min = Vec<double>::Constant(d, std::numeric_limits<double>::infinity());
        s.max = Vec<double>::Constant(d, -std::numeric_limits<double>::infinity());
      }
      if (d != s.min.size()) throw DataError("inconsistent joint counts while fitting scaler");
      for (std::size_t j = 0; j < frame.joints.size(); ++j) {
        if (frame.joints[j].is_missing) continue;
        const auto k = 3 * static_cast<Eigen::Index>(j);
        s.min.segment<3>(k) = s.min.segment<3>(k).cwiseMin(frame.joints[j].position);
        s.max.segment<3>(k) = s.max.segment<3>(k).cwiseMax(frame.joints[j].position);
      }
    }
  if (s.min.size() == 0) throw DataError("cannot fit scaler on an empty dataset");
  for (Eigen::Index i = 0; i < s.min.size(); ++i)
    if (!std::isfinite(s.min(i))) s.min(i) = s.max(i) = 0.0;  // never observed
  return s;
}

Vec<double> InputScaler::apply(const SkeletonFrame& frame) const {
  const auto d = 3 * static_cast<Eigen::Index>(frame.joints.size());
  if (d != min.size()) throw DataError("frame dimension does not match scaler");
  Vec<double> out(d);
  for (std::size_t j = 0; j < frame.joints.size(); ++j) {
    const auto k = 3 * static_cast<Eigen::Index>(j);
    if (frame.joints[j].is_missing) {
      out.segment<3>(k).setZero();
      continue;
    }
    for (Eigen::Index a = 0; a < 3; ++a) {
      const double range = max(k + a) - min(k + a);
      // clamped to the sigmoid range so off-support coordinates cannot saturate the encoder
      out(k + a) = range > 0 ? std::clamp(lo + (hi - lo) * (frame.joints[j].position(a) - min(k + a)) / range,
                                          0.0, 1.0)
                             : 0.5 * (lo + hi);
    }
  }
  return out;
}

Vec<double> InputScaler::invert(const Eigen::Ref<const Vec<double>>& scaled) const {
  if (scaled.size() != min.size()) throw DataError("dimension does not match scaler");
  Vec<double> out(scaled.size());
  for (Eigen::Index i = 0; i < scaled.size(); ++i) {
    const double range = max(i) - min(i);
    out(i) = range > 0 ? min(i) + (scaled(i) - lo) * range / (hi - lo) : min(i);
  }
  return out;
}

Mat<double> StackedModel::encode(const Eigen::Ref<const Mat<double>>& input) const {
  Mat<double> h = input;
  for (const auto& layer : layers) h = actrec::encode(layer, h);
  return h;
}

Mat<double> StackedModel::reconstruct(const Eigen::Ref<const Mat<double>>& input) const {
  Mat<double> y = encode(input);
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) y = decode_skeleton(*it, y);
  return y;
}

LayerInputs make_layer_inputs(const std::vector<ActionSequence>& sequences,
                              const InputScaler& scaler, int category_count, int chunk_count) {
  Eigen::Index total = 0;
  for (const auto& s : sequences) total += static_cast<Eigen::Index>(s.frames.size());
  LayerInputs in;
  in.clean.resize(scaler.min.size(), total);
  in.category.resize(category_count, total);
  in.temporal.resize(chunk_count, total);
  Eigen::Index col = 0;
  for (const auto& s : sequences) {
    if (!s.label) throw DataError("training sequence " + s.instance_id + " has no label");
    const auto c = one_hot_category(*s.label, category_count);
    const int length = static_cast<int>(s.frames.size());
    for (int f = 0; f < length; ++f, ++col) {
      in.clean.col(col) = scaler.apply(s.frames[static_cast<std::size_t>(f)]);
      in.category.col(col) = c;
      in.temporal.col(col) = temporal_chunk_vector(f, length, chunk_count);
    }
  }
  return in;
}

DaeLayer<double> train_layer(const LayerInputs& inputs, int hidden, const TrainConfig& cfg,
                             bool sparse, std::vector<double>* history) {
  if (hidden < 1) throw ConfigError("hidden size must be >= 1");
  cfg.validate();
  check_inputs(inputs);

  Rng rng(cfg.seed);
  auto layer = DaeLayer<double>::random(inputs.clean.rows(), hidden, inputs.category.rows(),
                                        inputs.temporal.rows(), rng);
  const auto weights = cfg.weights(sparse);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate_at(cfg.learning_rate, cfg.decay_epochs, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const auto end = std::min(order.size(), begin + batch_size);
      DaeBatch<double> batch;
      batch.clean = gather(inputs.clean, order, begin, end);
      batch.corrupted = corrupt(batch.clean, cfg.q, rng);
      batch.category = gather(inputs.category, order, begin, end);
      batch.temporal = gather(inputs.temporal, order, begin, end);
      double batch_loss = 0.0;
      const auto g = gradients(batch, layer, weights, &batch_loss);
      epoch_loss += batch_loss * static_cast<double>(end - begin);
      DaeLayer<double>::zip(layer, g, [lr](auto& p, const auto& gp) { sgd_step(p, gp, lr); });
    }
    if (history) history->push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return layer;
}

double finetune_loss(const std::vector<DaeLayer<double>>& layers, const LayerInputs& batch,
                     const TrainConfig& cfg) {
  double loss = 0.0;
  finetune_gradients(layers, batch, cfg, &loss);
  return loss;
}

std::vector<DaeGradient<double>> finetune_gradients(const std::vector<DaeLayer<double>>& layers,
                                                    const LayerInputs& batch,
                                                    const TrainConfig& cfg, double* loss_out) {
  check_inputs(batch);
  if (layers.empty()) throw ConfigError("fine-tuning needs at least one layer");
  const auto depth = layers.size();
  const double n = static_cast<double>(batch.size());
  const auto dsig = [](const Mat<double>& s) { return (s.array() * (1.0 - s.array())).matrix(); };

  // encoder activations a[0] = x, a[k] = h_k
  std::vector<Mat<double>> a{batch.clean};
  for (const auto& layer : layers) a.push_back(encode(layer, a.back()));
  // decoder outputs y[depth] = h_top, y[k-1] = skeleton head of layer k applied to y[k]
  std::vector<Mat<double>> y(depth + 1);
  y[depth] = a[depth];
  for (std::size_t k = depth; k >= 1; --k) y[k - 1] = decode_skeleton(layers[k - 1], y[k]);

  const auto& top = layers.back();
  const Mat<double> rc = sigmoid((top.dec_c_weight * a[depth]).colwise() + top.dec_c_bias);
  const Mat<double> rt = sigmoid((top.dec_t_weight * a[depth]).colwise() + top.dec_t_bias);
  const Mat<double> err_x = y[0] - batch.clean;
  const Mat<double> err_c = rc - batch.category;
  const Mat<double> err_t = rt - batch.temporal;
  if (loss_out)
    *loss_out = err_x.squaredNorm() / n + cfg.lambda * err_c.squaredNorm() / n +
                cfg.beta * err_t.squaredNorm() / n;

  std::vector<DaeGradient<double>> grads;
  for (const auto& layer : layers)
    grads.push_back(DaeGradient<double>::zeros(layer.input_dim(), layer.hidden_dim(),
                                               layer.category_dim(), layer.chunk_dim()));

  Mat<double> g_y = (2.0 / n) * err_x;
  for (std::size_t k = 1; k <= depth; ++k) {
    const Mat<double> delta = (g_y.array() * dsig(y[k - 1]).array()).matrix();
    grads[k - 1].dec_x_weight = delta * y[k].transpose();
    grads[k - 1].dec_x_bias = delta.rowwise().sum();
    g_y = layers[k - 1].dec_x_weight.transpose() * delta;
  }

  const Mat<double> delta_c = (2.0 * cfg.lambda / n) * (err_c.array() * dsig(rc).array()).matrix();
  const Mat<double> delta_t = (2.0 * cfg.beta / n) * (err_t.array() * dsig(rt).array()).matrix();
  grads.back().dec_c_weight = delta_c * a[depth].transpose();
  grads.back().dec_c_bias = delta_c.rowwise().sum();
  grads.back().dec_t_weight = delta_t * a[depth].transpose();
  grads.back().dec_t_bias = delta_t.rowwise().sum();

  Mat<double> g_a = g_y + top.dec_c_weight.transpose() * delta_c + top.dec_t_weight.transpose() * delta_t;
  for (std::size_t k = depth; k >= 1; --k) {
    const Mat<double> delta = (g_a.array() * dsig(a[k]).array()).matrix();
    grads[k - 1].enc_weight = delta * a[k - 1].transpose();
    grads[k - 1].enc_bias = delta.rowwise().sum();
    if (k > 1) g_a = layers[k - 1].enc_weight.transpose() * delta;
  }
  return grads;
}

StackedModel train_stack(const LayerInputs& inputs, const std::vector<int>& hidden_sizes,
                         const TrainConfig& cfg, InputScaler scaler,
                         std::vector<std::vector<double>>* histories) {
  if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must not be empty");
  cfg.validate();
  check_inputs(inputs);

  StackedModel model;
  model.scaler = std::move(scaler);
  model.input_dim = static_cast<int>(inputs.clean.rows());
  model.category_count = static_cast<int>(inputs.category.rows());
  model.chunk_count = static_cast<int>(inputs.temporal.rows());
  model.config = cfg;

  LayerInputs current = inputs;
  for (std::size_t k = 0; k < hidden_sizes.size(); ++k) {
    TrainConfig layer_cfg = cfg;
    layer_cfg.seed = derive_seed(cfg.seed, k + 1);
    const bool sparse = cfg.sparse_layer == static_cast<int>(k + 1);
    std::vector<double> history;
    model.layers.push_back(train_layer(current, hidden_sizes[k], layer_cfg, sparse,
                                       histories ? &history : nullptr));
    if (histories) histories->push_back(std::move(history));
    if (k + 1 < hidden_sizes.size()) current.clean = encode(model.layers.back(), current.clean);
  }

  if (cfg.finetune_epochs == 0) return model;

  Rng rng(derive_seed(cfg.seed, 0));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  std::vector<double> history;
  for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    const double lr = learning_rate_at(cfg.learning_rate / 10.0, cfg.decay_epochs, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const auto end = std::min(order.size(), begin + batch_size);
      LayerInputs batch{gather(inputs.clean, order, begin, end),
                        gather(inputs.category, order, begin, end),
                        gather(inputs.temporal, order, begin, end)};
      double batch_loss = 0.0;
      const auto grads = finetune_gradients(model.layers, batch, cfg, &batch_loss);
      epoch_loss += batch_loss * static_cast<double>(end - begin);
      for (std::size_t k = 0; k < grads.size(); ++k)
        DaeLayer<double>::zip(model.layers[k], grads[k],
                              [lr](auto& p, const auto& gp) { sgd_step(p, gp, lr); });
    }
    history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  if (histories) histories->push_back(std::move(history));
  return model;
}

FeatureSequence encode_sequence(const StackedModel& model, const ActionSequence& sequence) {
  Mat<double> input(model.input_dim, static_cast<Eigen::Index>(sequence.frames.size()));
  for (std::size_t f = 0; f < sequence.frames.size(); ++f)
    input.col(static_cast<Eigen::Index>(f)) = model.scaler.apply(sequence.frames[f]);
  FeatureSequence out;
  out.features = model.encode(input).transpose();
  out.label = sequence.label;
  out.subject_id = sequence.subject_id;
  out.instance_id = sequence.instance_id;
  return out;
}

ActionSequence restore_sequence(const StackedModel& model, const ActionSequence& sequence) {
  Mat<double> input(model.input_dim, static_cast<Eigen::Index>(sequence.frames.size()));
  for (std::size_t f = 0; f < sequence.frames.size(); ++f)
    input.col(static_cast<Eigen::Index>(f)) = model.scaler.apply(sequence.frames[f]);
  const Mat<double> recon = model.reconstruct(input);
  ActionSequence out = sequence;
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    auto restored = unflatten_frame(model.scaler.invert(recon.col(static_cast<Eigen::Index>(f))));
    restored.timestamp_index = out.frames[f].timestamp_index;
    for (std::size_t j = 0; j < restored.joints.size(); ++j)
      restored.joints[j].confidence = out.frames[f].joints[j].confidence;
    out.frames[f] = std::move(restored);
  }
  return out;
}

FeatureSequence joint_position_features(const ActionSequence& sequence) {
  FeatureSequence out;
  if (sequence.frames.empty()) throw DataError("empty sequence");
  const auto d = 3 * static_cast<Eigen::Index>(sequence.frames.front().joints.size());
  out.features.resize(static_cast<Eigen::Index>(sequence.frames.size()), d);
  for (std::size_t f = 0; f < sequence.frames.size(); ++f)
    out.features.row(static_cast<Eigen::Index>(f)) = flatten_frame(sequence.frames[f]).transpose();
  out.label = sequence.label;
  out.subject_id = sequence.subject_id;
  out.instance_id = sequence.instance_id;
  return out;
}

}  // namespace actrec
