#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "owcsim/channel.hpp"
#include "owcsim/errors.hpp"
#include "owcsim/mobility.hpp"
#include "owcsim/nn.hpp"
#include "owcsim/types.hpp"

namespace owcsim {

struct RmseRecord {
  std::string model_name;
  double sweep_value = 0.0;  // horizon in seconds, or speed in m/s
  double rmse_db = 0.0;
  long n_samples = 0;
  int seed_count = 0;  // number of realizations averaged
};

struct RateSample {
  double t = 0.0;  // s
  std::string model_name;
  double rate_bps = 0.0;
  int ap_id = 0;
};

/// RMSE between gain sequences on the dB scale. Each sample error is
/// 10 log10(max(pred, floor)) - 10 log10(max(true, floor)); floor_db guards
/// zero gains.
double channel_rmse(std::span<const ChannelGain> true_gains,
                    std::span<const ChannelGain> predicted_gains,
                    double floor_db = -120.0);

struct EvalOptions {
  int realizations = 100;
  double duration = 10.0;    // s of held-out ground truth per realization
  double floor_db = -120.0;
  int threads = 1;
  bool include_oracle = false;  // adds the ground-truth-fed sanity ceiling
};

/// Channel-prediction RMSE versus horizon for the RWP, GM, and hybrid
/// predictors. `models` maps horizon_steps to the horizon-matched trained
/// model; a missing entry raises MissingArtifactError. For each step the
/// predicted state selects the association and the error compares that AP's
/// gain at the predicted versus the true state, pooling all realizations.
std::vector<RmseRecord> run_horizon_sweep(const Scenario& sc, const GmParams& gm,
                                          const BehaviourParams& beh,
                                          const std::vector<double>& horizons_s,
                                          const std::map<int, LstmModel>& models,
                                          const EvalOptions& opts, std::uint64_t seed);

/// As the horizon sweep at one fixed horizon, with gm.mean_v set per sweep
/// point and behavioural parameters held fixed. Realization streams are
/// shared across sweep points (common random numbers).
std::vector<RmseRecord> run_speed_sweep(const Scenario& sc, const GmParams& gm,
                                        const BehaviourParams& beh,
                                        const std::vector<double>& speeds,
                                        double horizon_s, const LstmModel& model,
                                        const EvalOptions& opts, std::uint64_t seed);

/// Realized per-user data rate over time on one shared constant-speed
/// ground-truth trajectory (gm.mean_v = speed, sigma_v = 0): each tick the
/// association comes from the state predicted one horizon earlier and the
/// rate is computed with the true state under that association. Emits one
/// sample per tick per predictor.
std::vector<RateSample> run_rate_timeseries(const Scenario& sc, const GmParams& gm,
                                            const BehaviourParams& beh, double speed,
                                            double duration, double horizon_s,
                                            const LstmModel& model,
                                            const EvalOptions& opts, std::uint64_t seed);

/// CSV writers; headers are exactly
///   model,<sweep_column>,rmse_db,n,seeds   and   model,t_s,rate_bps,ap_id
/// with numbers at 9 significant digits.
void write_rmse_csv(const std::string& path, std::span<const RmseRecord> records,
                    const std::string& sweep_column);
void write_rate_csv(const std::string& path, std::span<const RateSample> samples);

/// Rounds horizon_s to ticks; throws UsageError if it is not a multiple.
int horizon_to_steps(double horizon_s, double tick);

}  // namespace owcsim
