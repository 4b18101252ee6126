#include "owcsim/predictor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace owcsim {

namespace {

// Normalization scales below this are treated as degenerate and left at 1.
constexpr double kDegenerateScale = 1e-6;

Eigen::VectorXd safe_scale(const Eigen::VectorXd& std_dev) {
  Eigen::VectorXd scale = std_dev;
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (!(scale[i] >= kDegenerateScale)) scale[i] = 1.0;
  }
  return scale;
}

MobilityState combine_residual(const MobilityState& baseline, const Eigen::VectorXd& r,
                               const RoomGeometry& room) {
  MobilityState s;
  s.x = clamp(baseline.x + r[0], 0.0, room.L);
  s.y = clamp(baseline.y + r[1], 0.0, room.W);
  s.v = std::max(0.0, baseline.v + r[2]);
  s.psi = wrap_angle(baseline.psi + r[3]);
  s.theta = clamp(baseline.theta + r[4], 0.0, kHalfPi);
  s.phi = wrap_angle(baseline.phi + r[5]);
  return s;
}

}  // namespace

FeatureVec encode_features(const MobilityState& s, const RoomGeometry& room) {
  FeatureVec f;
  f[0] = s.x / room.L;
  f[1] = s.y / room.W;
  f[2] = s.v;
  f[3] = std::sin(s.psi);
  f[4] = std::cos(s.psi);
  f[5] = s.theta;
  f[6] = std::sin(s.phi);
  f[7] = std::cos(s.phi);
  return f;
}

ResidualDataset build_residual_dataset(std::span<const Trajectory> trajectories,
                                       const GmParams& gm, const RoomGeometry& room,
                                       int k, int horizon_steps, int stride) {
  if (k < 1) throw std::invalid_argument("build_residual_dataset: k must be >= 1");
  if (horizon_steps < 1) {
    throw std::invalid_argument("build_residual_dataset: horizon_steps must be >= 1");
  }
  if (stride < 1) throw std::invalid_argument("build_residual_dataset: stride must be >= 1");
  if (trajectories.empty()) {
    throw std::invalid_argument("build_residual_dataset: no trajectories");
  }

  ResidualDataset ds;
  ds.window = k;
  ds.horizon_steps = horizon_steps;
  ds.tick = trajectories.front().tick;
  ds.gm = gm;
  ds.room = room;

  for (std::size_t tid = 0; tid < trajectories.size(); ++tid) {
    const Trajectory& traj = trajectories[tid];
    if (traj.states.empty()) throw std::invalid_argument("build_residual_dataset: empty trajectory");
    if (std::abs(traj.tick - ds.tick) > 1e-12) {
      throw std::invalid_argument("build_residual_dataset: trajectories disagree on tick");
    }
    const auto len = static_cast<long>(traj.states.size());
    if (len < static_cast<long>(k) + horizon_steps) {
      ++ds.skipped_trajectories;
      continue;
    }
    for (long i = k - 1; i + horizon_steps <= len - 1; i += stride) {
      ResidualSample sample;
      sample.trajectory_id = static_cast<int>(tid);
      sample.window.resize(kFeatureDim, k);
      for (int t = 0; t < k; ++t) {
        sample.window.col(t) = encode_features(traj.states[i - k + 1 + t], room);
      }
      const MobilityState baseline =
          gm_predict(traj.states[i], gm, ds.tick, room, horizon_steps);
      const MobilityState& truth = traj.states[i + horizon_steps];
      sample.target[0] = truth.x - baseline.x;
      sample.target[1] = truth.y - baseline.y;
      sample.target[2] = truth.v - baseline.v;
      sample.target[3] = angle_diff(truth.psi, baseline.psi);
      sample.target[4] = angle_diff(truth.theta, baseline.theta);
      sample.target[5] = angle_diff(truth.phi, baseline.phi);
      sample.target[6] = 0.0;
      ds.samples.push_back(std::move(sample));
    }
  }
  return ds;
}

namespace {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// 70/15/15-style split by whole trajectory (leakage-free); datasets built
// from fewer than three trajectories fall back to contiguous sample blocks.
// The test share is left untouched by training.
SplitIndices split_dataset(const ResidualDataset& ds, const TrainConfig& cfg,
                           RandomSource& rng) {
  std::vector<int> traj_ids;
  for (const auto& s : ds.samples) {
    if (std::find(traj_ids.begin(), traj_ids.end(), s.trajectory_id) == traj_ids.end()) {
      traj_ids.push_back(s.trajectory_id);
    }
  }

  SplitIndices split;
  if (traj_ids.size() >= 3) {
    for (std::size_t i = traj_ids.size() - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_below(i + 1);
      std::swap(traj_ids[i], traj_ids[j]);
    }
    const auto n = traj_ids.size();
    auto n_val = static_cast<std::size_t>(std::lround(cfg.validation_fraction * n));
    n_val = std::max<std::size_t>(1, n_val);
    auto n_test = static_cast<std::size_t>(std::lround(cfg.test_fraction * n));
    if (cfg.test_fraction > 0.0) n_test = std::max<std::size_t>(1, n_test);
    if (n_val + n_test >= n) {
      throw std::invalid_argument("train_predictor: too few trajectories for the requested split");
    }
    std::vector<int> val_ids(traj_ids.begin(), traj_ids.begin() + n_val);
    std::vector<int> test_ids(traj_ids.begin() + n_val, traj_ids.begin() + n_val + n_test);
    auto in = [](const std::vector<int>& ids, int id) {
      return std::find(ids.begin(), ids.end(), id) != ids.end();
    };
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      const int id = ds.samples[i].trajectory_id;
      if (in(val_ids, id)) {
        split.val.push_back(i);
      } else if (!in(test_ids, id)) {
        split.train.push_back(i);
      }
    }
  } else {
    const auto n = ds.samples.size();
    auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.validation_fraction * n)));
    auto n_test = static_cast<std::size_t>(std::lround(cfg.test_fraction * n));
    if (n_val + n_test >= n) {
      throw std::invalid_argument("train_predictor: dataset too small for the requested split");
    }
    const std::size_t n_train = n - n_val - n_test;
    for (std::size_t i = 0; i < n_train; ++i) split.train.push_back(i);
    for (std::size_t i = n_train; i < n_train + n_val; ++i) split.val.push_back(i);
  }
  if (split.train.empty() || split.val.empty()) {
    throw std::invalid_argument("train_predictor: empty train or validation split");
  }
  return split;
}

// Packs normalized windows/targets of the chosen samples into per-timestep
// batch matrices.
void pack_batch(const ResidualDataset& ds, std::span<const std::size_t> idx,
                const Eigen::VectorXd& f_mean, const Eigen::VectorXd& f_scale,
                const Eigen::VectorXd& t_mean, const Eigen::VectorXd& t_scale,
                std::vector<Eigen::MatrixXd>& steps, Eigen::MatrixXd& targets) {
  const int k = ds.window;
  const auto b = static_cast<Eigen::Index>(idx.size());
  steps.assign(k, Eigen::MatrixXd(kFeatureDim, b));
  targets.resize(kTargetDim, b);
  for (Eigen::Index col = 0; col < b; ++col) {
    const auto& s = ds.samples[idx[col]];
    for (int t = 0; t < k; ++t) {
      steps[t].col(col) = (s.window.col(t) - f_mean).cwiseQuotient(f_scale);
    }
    targets.col(col) = (s.target - t_mean).cwiseQuotient(t_scale);
  }
}

double uniform_symmetric(RandomSource& rng, double bound) {
  return rng.uniform(-bound, bound);
}

LstmModel init_model(const ResidualDataset& ds, const PredictorArch& arch,
                     RandomSource& rng) {
  LstmModel model;
  model.window = ds.window;
  for (int l = 0; l < arch.num_layers; ++l) {
    const int in = l == 0 ? kFeatureDim : arch.hidden_size;
    const int h = arch.hidden_size;
    LstmLayerWeights layer;
    layer.w_input.resize(4 * h, in);
    layer.w_recurrent.resize(4 * h, h);
    layer.bias = Eigen::VectorXd::Zero(4 * h);
    const double bi = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index j = 0; j < layer.w_input.size(); ++j) {
      layer.w_input.data()[j] = uniform_symmetric(rng, bi);
    }
    const double bh = 1.0 / std::sqrt(static_cast<double>(h));
    for (Eigen::Index j = 0; j < layer.w_recurrent.size(); ++j) {
      layer.w_recurrent.data()[j] = uniform_symmetric(rng, bh);
    }
    layer.bias.segment(h, h).setOnes();  // forget gate bias
    model.layers.push_back(std::move(layer));
  }
  // Zero head: the untrained network starts as the exact zero residual.
  model.head_weights = Eigen::MatrixXd::Zero(kTargetDim, arch.hidden_size);
  model.head_bias = Eigen::VectorXd::Zero(kTargetDim);
  return model;
}

// Raw-unit validation MSE: mean over samples and dims of the de-normalized
// squared error.
double raw_val_loss(const LstmModel& model, const std::vector<Eigen::MatrixXd>& steps,
                    const Eigen::MatrixXd& targets_norm, const Eigen::VectorXd& t_scale) {
  const Eigen::MatrixXd out = lstm_forward_batch(model, steps);
  const Eigen::MatrixXd diff =
      (out - targets_norm).array().colwise() * t_scale.array();
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

}  // namespace

TrainResult train_predictor(const ResidualDataset& ds, const PredictorArch& arch,
                            const TrainConfig& config, RandomSource& rng) {
  validate(config);
  validate(ds.gm);
  if (arch.hidden_size < 1 || arch.num_layers < 1) {
    throw std::invalid_argument("train_predictor: invalid architecture");
  }
  if (ds.samples.size() < 100) {
    throw std::invalid_argument("train_predictor: need >= 100 samples, got " +
                                std::to_string(ds.samples.size()));
  }

  SplitIndices split = split_dataset(ds, config, rng);

  // Normalization statistics from the training split only.
  Eigen::VectorXd f_sum = Eigen::VectorXd::Zero(kFeatureDim);
  Eigen::VectorXd f_sum2 = Eigen::VectorXd::Zero(kFeatureDim);
  Eigen::VectorXd t_sum = Eigen::VectorXd::Zero(kTargetDim);
  Eigen::VectorXd t_sum2 = Eigen::VectorXd::Zero(kTargetDim);
  for (const std::size_t i : split.train) {
    const auto& s = ds.samples[i];
    f_sum += s.window.rowwise().sum();
    f_sum2 += s.window.array().square().matrix().rowwise().sum();
    t_sum += s.target;
    t_sum2 += s.target.array().square().matrix();
  }
  const double n_cols = static_cast<double>(split.train.size()) * ds.window;
  const double n_tgt = static_cast<double>(split.train.size());
  const Eigen::VectorXd f_mean = f_sum / n_cols;
  const Eigen::VectorXd f_var = (f_sum2 / n_cols - f_mean.array().square().matrix()).cwiseMax(0.0);
  const Eigen::VectorXd t_mean = t_sum / n_tgt;
  const Eigen::VectorXd t_var = (t_sum2 / n_tgt - t_mean.array().square().matrix()).cwiseMax(0.0);
  const Eigen::VectorXd f_scale = safe_scale(f_var.cwiseSqrt());
  const Eigen::VectorXd t_scale = safe_scale(t_var.cwiseSqrt());

  LstmModel model = init_model(ds, arch, rng);
  model.feature_mean = f_mean;
  model.feature_scale = f_scale;
  model.target_mean = t_mean;
  model.target_scale = t_scale;
  embed_predictor_meta(model, PredictorMeta{ds.horizon_steps, ds.tick, ds.gm, ds.room});

  std::vector<Eigen::MatrixXd> val_steps;
  Eigen::MatrixXd val_targets;
  pack_batch(ds, split.val, f_mean, f_scale, t_mean, t_scale, val_steps, val_targets);

  TrainResult result;
  result.n_train = static_cast<long>(split.train.size());
  result.n_val = static_cast<long>(split.val.size());
  {
    // Constant-zero residual baseline: raw MSE of the targets themselves.
    double sum2 = 0.0;
    for (const std::size_t i : split.val) {
      sum2 += ds.samples[i].target.squaredNorm();
    }
    result.zero_predictor_val_loss =
        sum2 / (static_cast<double>(split.val.size()) * kTargetDim);
  }

  AdamState opt = make_adam_state(model);
  LstmModel best = model;
  double best_val = raw_val_loss(model, val_steps, val_targets, t_scale);
  int best_epoch = -1;  // -1 marks the untrained initial snapshot
  int since_improvement = 0;

  std::vector<std::size_t> order = split.train;
  std::vector<Eigen::MatrixXd> steps;
  Eigen::MatrixXd targets;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_below(i + 1);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count =
          std::min<std::size_t>(config.batch_size, order.size() - start);
      pack_batch(ds, std::span<const std::size_t>(order).subspan(start, count), f_mean,
                 f_scale, t_mean, t_scale, steps, targets);
      auto [grads, loss] = bptt_gradients(model, steps, targets);
      optimizer_step(model, grads, opt, config);
      epoch_loss += loss * static_cast<double>(count);
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

    const double val = raw_val_loss(model, val_steps, val_targets, t_scale);
    result.val_loss.push_back(val);
    if (val < best_val) {
      best_val = val;
      best = model;
      best_epoch = epoch;
      since_improvement = 0;
    } else {
      ++since_improvement;
      if (since_improvement >= config.early_stop_patience) break;
    }
  }

  result.model = std::move(best);
  result.best_epoch = best_epoch;
  return result;
}

MobilityState hybrid_predict(const LstmModel& model,
                             std::span<const MobilityState> history,
                             const GmParams& gm, int horizon_steps) {
  const PredictorMeta meta = predictor_meta(model);
  if (static_cast<int>(history.size()) != model.window) {
    throw std::invalid_argument("hybrid_predict: history length must equal the model window");
  }
  if (horizon_steps < 1) throw std::invalid_argument("hybrid_predict: horizon_steps must be >= 1");

  const MobilityState baseline =
      gm_predict(history.back(), gm, meta.tick, meta.room, horizon_steps);

  Eigen::MatrixXd window(kFeatureDim, model.window);
  for (int t = 0; t < model.window; ++t) {
    window.col(t) = (encode_features(history[t], meta.room) - model.feature_mean)
                        .cwiseQuotient(model.feature_scale);
  }
  const Eigen::VectorXd out = lstm_forward(model, window);
  const Eigen::VectorXd residual =
      out.cwiseProduct(model.target_scale) + model.target_mean;
  return combine_residual(baseline, residual, meta.room);
}

std::vector<MobilityState> hybrid_predict_batch(const LstmModel& model,
                                                std::span<const MobilityState> states,
                                                const GmParams& gm, int horizon_steps) {
  const PredictorMeta meta = predictor_meta(model);
  const int k = model.window;
  if (static_cast<int>(states.size()) < k) {
    throw std::invalid_argument("hybrid_predict_batch: need at least k states");
  }
  if (horizon_steps < 1) {
    throw std::invalid_argument("hybrid_predict_batch: horizon_steps must be >= 1");
  }
  const auto n = static_cast<Eigen::Index>(states.size());
  const Eigen::Index n_windows = n - k + 1;

  Eigen::MatrixXd feats(kFeatureDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    feats.col(i) = (encode_features(states[i], meta.room) - model.feature_mean)
                       .cwiseQuotient(model.feature_scale);
  }
  std::vector<Eigen::MatrixXd> steps(k);
  for (int t = 0; t < k; ++t) {
    steps[t] = feats.middleCols(t, n_windows);
  }
  const Eigen::MatrixXd out = lstm_forward_batch(model, steps);

  std::vector<MobilityState> predictions;
  predictions.reserve(n_windows);
  for (Eigen::Index j = 0; j < n_windows; ++j) {
    const Eigen::VectorXd residual =
        out.col(j).cwiseProduct(model.target_scale) + model.target_mean;
    const MobilityState baseline =
        gm_predict(states[k - 1 + j], gm, meta.tick, meta.room, horizon_steps);
    predictions.push_back(combine_residual(baseline, residual, meta.room));
  }
  return predictions;
}

PredictedChannel predicted_channel(const LstmModel& model,
                                   std::span<const MobilityState> history,
                                   const GmParams& gm, int horizon_steps,
                                   const Scenario& sc) {
  const MobilityState predicted = hybrid_predict(model, history, gm, horizon_steps);
  PredictedChannel pc;
  pc.ap_id = associate(predicted, sc);
  const AccessPoint* serving = nullptr;
  for (const auto& ap : sc.aps) {
    if (ap.id == pc.ap_id) serving = &ap;
  }
  pc.gain = los_gain(*serving, predicted, sc.receiver, sc.room);
  pc.rate_bps = data_rate(pc.gain, interference(predicted, pc.ap_id, sc), *serving,
                          sc.receiver, sc.noise);
  return pc;
}

void embed_predictor_meta(LstmModel& model, const PredictorMeta& meta) {
  auto& h = model.hyper;
  h["meta.horizon_steps"] = static_cast<double>(meta.horizon_steps);
  h["meta.tick"] = meta.tick;
  h["meta.room_l"] = meta.room.L;
  h["meta.room_w"] = meta.room.W;
  h["meta.room_h"] = meta.room.H;
  h["gm.alpha_v"] = meta.gm.alpha_v;
  h["gm.alpha_psi"] = meta.gm.alpha_psi;
  h["gm.alpha_theta"] = meta.gm.alpha_theta;
  h["gm.alpha_phi"] = meta.gm.alpha_phi;
  h["gm.mean_v"] = meta.gm.mean_v;
  h["gm.mean_theta"] = meta.gm.mean_theta;
  h["gm.sigma_v"] = meta.gm.sigma_v;
  h["gm.sigma_psi"] = meta.gm.sigma_psi;
  h["gm.sigma_theta"] = meta.gm.sigma_theta;
  h["gm.sigma_phi"] = meta.gm.sigma_phi;
}

PredictorMeta predictor_meta(const LstmModel& model) {
  auto get = [&model](const char* key) {
    const auto it = model.hyper.find(key);
    if (it == model.hyper.end()) {
      throw FormatError(std::string("model metadata missing key ") + key);
    }
    return it->second;
  };
  PredictorMeta meta;
  meta.horizon_steps = static_cast<int>(get("meta.horizon_steps"));
  meta.tick = get("meta.tick");
  meta.room.L = get("meta.room_l");
  meta.room.W = get("meta.room_w");
  meta.room.H = get("meta.room_h");
  meta.gm.alpha_v = get("gm.alpha_v");
  meta.gm.alpha_psi = get("gm.alpha_psi");
  meta.gm.alpha_theta = get("gm.alpha_theta");
  meta.gm.alpha_phi = get("gm.alpha_phi");
  meta.gm.mean_v = get("gm.mean_v");
  meta.gm.mean_theta = get("gm.mean_theta");
  meta.gm.sigma_v = get("gm.sigma_v");
  meta.gm.sigma_psi = get("gm.sigma_psi");
  meta.gm.sigma_theta = get("gm.sigma_theta");
  meta.gm.sigma_phi = get("gm.sigma_phi");
  return meta;
}

LstmModel make_zero_residual_model(int k, int hidden, int num_layers,
                                   const PredictorMeta& meta) {
  LstmModel model;
  model.window = k;
  for (int l = 0; l < num_layers; ++l) {
    const int in = l == 0 ? kFeatureDim : hidden;
    LstmLayerWeights layer;
    layer.w_input = Eigen::MatrixXd::Zero(4 * hidden, in);
    layer.w_recurrent = Eigen::MatrixXd::Zero(4 * hidden, hidden);
    layer.bias = Eigen::VectorXd::Zero(4 * hidden);
    model.layers.push_back(std::move(layer));
  }
  model.head_weights = Eigen::MatrixXd::Zero(kTargetDim, hidden);
  model.head_bias = Eigen::VectorXd::Zero(kTargetDim);
  model.feature_mean = Eigen::VectorXd::Zero(kFeatureDim);
  model.feature_scale = Eigen::VectorXd::Ones(kFeatureDim);
  model.target_mean = Eigen::VectorXd::Zero(kTargetDim);
  model.target_scale = Eigen::VectorXd::Ones(kTargetDim);
  embed_predictor_meta(model, meta);
  return model;
}

// ---------------------------------------------------------------------------
// Dataset cache: magic "OWCDSET\0", u32 version, u32 n_samples/window/horizon,
// f64 tick, room (3 f64), GM params (10 f64), u32 skipped count, then per
// sample: u32 trajectory id, window (column-major f64), target (7 f64).
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kDatasetMagic[8] = {'O', 'W', 'C', 'D', 'S', 'E', 'T', '\0'};
constexpr std::uint32_t kDatasetVersion = 1;

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f64(std::vector<std::uint8_t>& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct DatasetReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw FormatError("dataset file truncated");
  }
  std::uint32_t read_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double read_f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(v);
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const ResidualDataset& ds) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kDatasetMagic), std::end(kDatasetMagic));
  append_u32(out, kDatasetVersion);
  append_u32(out, static_cast<std::uint32_t>(ds.samples.size()));
  append_u32(out, static_cast<std::uint32_t>(ds.window));
  append_u32(out, static_cast<std::uint32_t>(ds.horizon_steps));
  append_f64(out, ds.tick);
  append_f64(out, ds.room.L);
  append_f64(out, ds.room.W);
  append_f64(out, ds.room.H);
  const double gm[10] = {ds.gm.alpha_v,  ds.gm.alpha_psi,   ds.gm.alpha_theta,
                         ds.gm.alpha_phi, ds.gm.mean_v,     ds.gm.mean_theta,
                         ds.gm.sigma_v,  ds.gm.sigma_psi,   ds.gm.sigma_theta,
                         ds.gm.sigma_phi};
  for (double g : gm) append_f64(out, g);
  append_u32(out, static_cast<std::uint32_t>(ds.skipped_trajectories));
  for (const auto& s : ds.samples) {
    append_u32(out, static_cast<std::uint32_t>(s.trajectory_id));
    for (Eigen::Index j = 0; j < s.window.size(); ++j) append_f64(out, s.window.data()[j]);
    for (int j = 0; j < kTargetDim; ++j) append_f64(out, s.target[j]);
  }
  return out;
}

ResidualDataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  DatasetReader r{bytes};
  r.need(8);
  if (std::memcmp(bytes.data(), kDatasetMagic, 8) != 0) {
    throw FormatError("dataset file: bad magic");
  }
  r.pos = 8;
  const std::uint32_t version = r.read_u32();
  if (version != kDatasetVersion) {
    throw FormatError("dataset file: unsupported version " + std::to_string(version));
  }
  ResidualDataset ds;
  const std::uint32_t n_samples = r.read_u32();
  ds.window = static_cast<int>(r.read_u32());
  ds.horizon_steps = static_cast<int>(r.read_u32());
  if (ds.window < 1 || ds.window > 65536 || ds.horizon_steps < 1) {
    throw FormatError("dataset file: implausible dimensions");
  }
  ds.tick = r.read_f64();
  ds.room.L = r.read_f64();
  ds.room.W = r.read_f64();
  ds.room.H = r.read_f64();
  ds.gm.alpha_v = r.read_f64();
  ds.gm.alpha_psi = r.read_f64();
  ds.gm.alpha_theta = r.read_f64();
  ds.gm.alpha_phi = r.read_f64();
  ds.gm.mean_v = r.read_f64();
  ds.gm.mean_theta = r.read_f64();
  ds.gm.sigma_v = r.read_f64();
  ds.gm.sigma_psi = r.read_f64();
  ds.gm.sigma_theta = r.read_f64();
  ds.gm.sigma_phi = r.read_f64();
  ds.skipped_trajectories = static_cast<int>(r.read_u32());
  ds.samples.reserve(n_samples);
  for (std::uint32_t i = 0; i < n_samples; ++i) {
    ResidualSample s;
    s.trajectory_id = static_cast<int>(r.read_u32());
    s.window.resize(kFeatureDim, ds.window);
    for (Eigen::Index j = 0; j < s.window.size(); ++j) s.window.data()[j] = r.read_f64();
    for (int j = 0; j < kTargetDim; ++j) s.target[j] = r.read_f64();
    ds.samples.push_back(std::move(s));
  }
  if (r.pos != bytes.size()) throw FormatError("dataset file: trailing bytes");
  return ds;
}

void save_dataset(const std::string& path, const ResidualDataset& ds) {
  const auto bytes = serialize_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

ResidualDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_dataset(bytes);
}

}  // namespace owcsim
