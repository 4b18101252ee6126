#include "owcsim/eval.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "owcsim/parallel.hpp"
#include "owcsim/predictor.hpp"
#include "owcsim/rng.hpp"

namespace owcsim {

namespace {

constexpr int kRwp = 0;
constexpr int kGm = 1;
constexpr int kHybrid = 2;
constexpr int kOracle = 3;
constexpr std::array<const char*, 4> kModelNames = {"rwp", "gm", "hybrid", "oracle"};

double floor_linear(double floor_db) { return std::pow(10.0, floor_db / 10.0); }

double gain_db(double h, double floor_lin) {
  return 10.0 * std::log10(std::max(h, floor_lin));
}

const AccessPoint& ap_by_id(const Scenario& sc, int id) {
  for (const auto& ap : sc.aps) {
    if (ap.id == id) return ap;
  }
  throw std::out_of_range("unknown AP id " + std::to_string(id));
}

struct ErrorAccum {
  double sum_sq = 0.0;
  long n = 0;
};

// Association from the predicted state; error between that AP's gain at the
// predicted and the true state. This couples position, orientation, and
// association errors into the channel estimate the control unit would act on.
void accumulate_error(const Scenario& sc, const MobilityState& predicted,
                      const MobilityState& truth, double floor_lin, ErrorAccum& acc) {
  const int ap_id = associate(predicted, sc);
  const AccessPoint& ap = ap_by_id(sc, ap_id);
  const double predicted_gain = los_gain(ap, predicted, sc.receiver, sc.room).value;
  const double true_gain = los_gain(ap, truth, sc.receiver, sc.room).value;
  const double e = gain_db(predicted_gain, floor_lin) - gain_db(true_gain, floor_lin);
  acc.sum_sq += e * e;
  acc.n += 1;
}

using RealizationErrors = std::array<ErrorAccum, 4>;

// Evaluates all predictors on one held-out realization at one horizon.
RealizationErrors eval_realization(const Scenario& sc, const GmParams& gm_world,
                                   const BehaviourParams& beh, const GmParams& gm_matched,
                                   const LstmModel& model, const GmParams& model_gm,
                                   int horizon_steps, const EvalOptions& opts,
                                   std::uint64_t seed, std::uint64_t stream) {
  RandomSource rng(seed, stream);
  const Trajectory traj = generate_ground_truth(sc, gm_world, beh, opts.duration, rng);
  const int k = model.window;
  const long n = static_cast<long>(traj.states.size());
  if (n < k + horizon_steps + 1) {
    throw std::invalid_argument("eval: realization shorter than window + horizon");
  }

  const std::vector<MobilityState> hybrid =
      hybrid_predict_batch(model, traj.states, model_gm, horizon_steps);

  RealizationErrors errors;
  const double floor_lin = floor_linear(opts.floor_db);
  for (long i = k - 1; i + horizon_steps <= n - 1; ++i) {
    const MobilityState& cur = traj.states[i];
    const MobilityState& truth = traj.states[i + horizon_steps];
    accumulate_error(sc, rwp_predict(cur, sc.tick, sc.room, horizon_steps), truth,
                     floor_lin, errors[kRwp]);
    accumulate_error(sc, gm_predict(cur, gm_matched, sc.tick, sc.room, horizon_steps),
                     truth, floor_lin, errors[kGm]);
    accumulate_error(sc, hybrid[i - (k - 1)], truth, floor_lin, errors[kHybrid]);
    if (opts.include_oracle) {
      accumulate_error(sc, truth, truth, floor_lin, errors[kOracle]);
    }
  }
  return errors;
}

std::vector<RmseRecord> sweep_point_records(const Scenario& sc, const GmParams& gm_world,
                                            const BehaviourParams& beh,
                                            const GmParams& gm_matched,
                                            const LstmModel& model, int horizon_steps,
                                            double sweep_value, const EvalOptions& opts,
                                            std::uint64_t seed) {
  const GmParams model_gm = predictor_meta(model).gm;
  std::vector<RealizationErrors> results(opts.realizations);
  parallel_for(opts.realizations, opts.threads, [&](int r) {
    results[r] =
        eval_realization(sc, gm_world, beh, gm_matched, model, model_gm, horizon_steps,
                         opts, seed, streams::kEvalRealization + static_cast<std::uint64_t>(r));
  });

  const int n_models = opts.include_oracle ? 4 : 3;
  std::vector<RmseRecord> records;
  for (int m = 0; m < n_models; ++m) {
    ErrorAccum total;
    for (const auto& res : results) {  // fixed realization order
      total.sum_sq += res[m].sum_sq;
      total.n += res[m].n;
    }
    RmseRecord rec;
    rec.model_name = kModelNames[m];
    rec.sweep_value = sweep_value;
    rec.rmse_db = total.n > 0 ? std::sqrt(total.sum_sq / static_cast<double>(total.n)) : 0.0;
    rec.n_samples = total.n;
    rec.seed_count = opts.realizations;
    records.push_back(std::move(rec));
  }
  return records;
}

void check_eval_options(const EvalOptions& opts) {
  if (opts.realizations < 1) throw std::invalid_argument("eval: realizations must be >= 1");
  if (!(opts.duration > 0.0)) throw std::invalid_argument("eval: duration must be > 0");
}

}  // namespace

int horizon_to_steps(double horizon_s, double tick) {
  const double ratio = horizon_s / tick;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-6) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "horizon %g s is not a multiple of tick %g s",
                  horizon_s, tick);
    throw UsageError(buf);
  }
  return static_cast<int>(steps);
}

double channel_rmse(std::span<const ChannelGain> true_gains,
                    std::span<const ChannelGain> predicted_gains, double floor_db) {
  if (true_gains.size() != predicted_gains.size()) {
    throw std::invalid_argument("channel_rmse: sequence length mismatch");
  }
  if (true_gains.empty()) {
    throw std::invalid_argument("channel_rmse: empty sequences");
  }
  const double floor_lin = floor_linear(floor_db);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < true_gains.size(); ++i) {
    const double e =
        gain_db(predicted_gains[i].value, floor_lin) - gain_db(true_gains[i].value, floor_lin);
    sum_sq += e * e;
  }
  return std::sqrt(sum_sq / static_cast<double>(true_gains.size()));
}

std::vector<RmseRecord> run_horizon_sweep(const Scenario& sc, const GmParams& gm,
                                          const BehaviourParams& beh,
                                          const std::vector<double>& horizons_s,
                                          const std::map<int, LstmModel>& models,
                                          const EvalOptions& opts, std::uint64_t seed) {
  validate(sc);
  validate(gm);
  validate(beh);
  check_eval_options(opts);
  if (horizons_s.empty()) throw std::invalid_argument("run_horizon_sweep: no horizons");

  std::vector<RmseRecord> records;
  for (const double horizon_s : horizons_s) {
    const int steps = horizon_to_steps(horizon_s, sc.tick);
    const auto it = models.find(steps);
    if (it == models.end()) {
      throw MissingArtifactError("run_horizon_sweep: no trained model for horizon " +
                                 std::to_string(steps) + " steps");
    }
    auto point = sweep_point_records(sc, gm, beh, gm, it->second, steps, horizon_s, opts, seed);
    records.insert(records.end(), point.begin(), point.end());
  }
  return records;
}

std::vector<RmseRecord> run_speed_sweep(const Scenario& sc, const GmParams& gm,
                                        const BehaviourParams& beh,
                                        const std::vector<double>& speeds,
                                        double horizon_s, const LstmModel& model,
                                        const EvalOptions& opts, std::uint64_t seed) {
  validate(sc);
  validate(gm);
  validate(beh);
  check_eval_options(opts);
  if (speeds.empty()) throw std::invalid_argument("run_speed_sweep: no speeds");
  for (const double s : speeds) {
    if (!(s >= 0.0)) throw std::invalid_argument("run_speed_sweep: speeds must be >= 0");
  }
  const int steps = horizon_to_steps(horizon_s, sc.tick);

  std::vector<RmseRecord> records;
  for (const double speed : speeds) {
    GmParams gm_point = gm;
    gm_point.mean_v = speed;
    auto point = sweep_point_records(sc, gm_point, beh, gm_point, model, steps, speed, opts, seed);
    records.insert(records.end(), point.begin(), point.end());
  }
  return records;
}

std::vector<RateSample> run_rate_timeseries(const Scenario& sc, const GmParams& gm,
                                            const BehaviourParams& beh, double speed,
                                            double duration, double horizon_s,
                                            const LstmModel& model,
                                            const EvalOptions& opts, std::uint64_t seed) {
  validate(sc);
  validate(gm);
  validate(beh);
  if (!(duration >= 1.0)) {
    throw std::invalid_argument("run_rate_timeseries: duration must be >= 1 s");
  }
  const int h = horizon_to_steps(horizon_s, sc.tick);
  const int k = model.window;
  const GmParams model_gm = predictor_meta(model).gm;

  GmParams gm_world = gm;
  gm_world.mean_v = speed;
  gm_world.sigma_v = 0.0;  // constant nominal speed

  RandomSource rng(seed, streams::kRateTimeseries);
  const Trajectory traj = generate_ground_truth(sc, gm_world, beh, duration, rng);
  const long n = static_cast<long>(traj.states.size());
  if (n < k + h + 1) {
    throw std::invalid_argument("run_rate_timeseries: duration shorter than window + horizon");
  }

  // Predictions issued at tick i for tick i + h, batched over full windows.
  const std::vector<MobilityState> hybrid_main =
      hybrid_predict_batch(model, traj.states, model_gm, h);

  auto padded_history = [&](long i) {
    std::vector<MobilityState> hist(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
      const long idx = i - (k - 1) + t;
      hist[t] = traj.states[idx < 0 ? 0 : idx];
    }
    return hist;
  };

  // predicted_state[m][j]: state estimate steering the association active at
  // tick j. For j < h no prediction has landed yet; the predictor
  // dead-reckons / mean-rolls from the initial state as a bootstrap.
  const int n_models = opts.include_oracle ? 4 : 3;
  std::vector<std::vector<MobilityState>> predicted(4, std::vector<MobilityState>(n));
  for (long j = 0; j < n; ++j) {
    if (j < h) {
      const MobilityState& s0 = traj.states[0];
      predicted[kRwp][j] = j == 0 ? s0 : rwp_predict(s0, sc.tick, sc.room, static_cast<int>(j));
      predicted[kGm][j] =
          j == 0 ? s0 : gm_predict(s0, gm_world, sc.tick, sc.room, static_cast<int>(j));
      predicted[kHybrid][j] =
          j == 0 ? s0 : gm_predict(s0, model_gm, sc.tick, sc.room, static_cast<int>(j));
    } else {
      const long i = j - h;
      predicted[kRwp][j] = rwp_predict(traj.states[i], sc.tick, sc.room, h);
      predicted[kGm][j] = gm_predict(traj.states[i], gm_world, sc.tick, sc.room, h);
      if (i >= k - 1) {
        predicted[kHybrid][j] = hybrid_main[i - (k - 1)];
      } else {
        const auto hist = padded_history(i);
        predicted[kHybrid][j] = hybrid_predict(model, hist, model_gm, h);
      }
    }
    if (opts.include_oracle) predicted[kOracle][j] = traj.states[j];
  }

  std::vector<RateSample> samples;
  samples.reserve(static_cast<std::size_t>(n_models) * n);
  for (int m = 0; m < n_models; ++m) {
    for (long j = 0; j < n; ++j) {
      const MobilityState& truth = traj.states[j];
      const int ap_id = associate(predicted[m][j], sc);
      const AccessPoint& ap = ap_by_id(sc, ap_id);
      const ChannelGain gain = los_gain(ap, truth, sc.receiver, sc.room);
      RateSample sample;
      sample.t = static_cast<double>(j) * sc.tick;
      sample.model_name = kModelNames[m];
      sample.rate_bps =
          data_rate(gain, interference(truth, ap_id, sc), ap, sc.receiver, sc.noise);
      sample.ap_id = ap_id;
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_rmse_csv(const std::string& path, std::span<const RmseRecord> records,
                    const std::string& sweep_column) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "model," << sweep_column << ",rmse_db,n,seeds\n";
  for (const auto& r : records) {
    out << r.model_name << ',' << fmt9(r.sweep_value) << ',' << fmt9(r.rmse_db) << ','
        << r.n_samples << ',' << r.seed_count << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_rate_csv(const std::string& path, std::span<const RateSample> samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "model,t_s,rate_bps,ap_id\n";
  for (const auto& s : samples) {
    out << s.model_name << ',' << fmt9(s.t) << ',' << fmt9(s.rate_bps) << ',' << s.ap_id
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace owcsim
