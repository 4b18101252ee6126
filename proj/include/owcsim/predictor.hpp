#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "owcsim/channel.hpp"
#include "owcsim/mobility.hpp"
#include "owcsim/nn.hpp"
#include "owcsim/rng.hpp"
#include "owcsim/types.hpp"

namespace owcsim {

/// Per-timestep input encoding: x/L, y/W, v, sin psi, cos psi, theta,
/// sin phi, cos phi. Wrap-safe by construction.
inline constexpr int kFeatureDim = 8;

/// Residual target: dx, dy, dv, dpsi, dtheta, dphi (angle components
/// wrap-aware), plus one reserved dimension held at zero.
inline constexpr int kTargetDim = 7;

using FeatureVec = Eigen::Matrix<double, kFeatureDim, 1>;

FeatureVec encode_features(const MobilityState& s, const RoomGeometry& room);

/// One supervised example: the k most recent encoded states (raw, not yet
/// normalized) and the residual between the ground truth at +horizon and the
/// Gauss-Markov prediction.
struct ResidualSample {
  Eigen::MatrixXd window;                     // [kFeatureDim x k]
  Eigen::Matrix<double, kTargetDim, 1> target;
  int trajectory_id = 0;
};

struct ResidualDataset {
  std::vector<ResidualSample> samples;
  int window = 0;        // k
  int horizon_steps = 0;
  double tick = 0.0;
  GmParams gm;           // baseline the residuals were computed against
  RoomGeometry room;
  int skipped_trajectories = 0;  // inputs too short for one sample
};

/// Slides a length-k window over each trajectory: for every index i (stepping
/// by stride) the target is state[i + horizon] minus gm_predict(state[i]),
/// component-wise with wrap-aware angle differences. Trajectories shorter
/// than k + horizon states are skipped and counted.
ResidualDataset build_residual_dataset(std::span<const Trajectory> trajectories,
                                       const GmParams& gm, const RoomGeometry& room,
                                       int k, int horizon_steps, int stride = 1);

struct PredictorArch {
  int hidden_size = 32;
  int num_layers = 2;
};

struct TrainResult {
  LstmModel model;                 // best-validation snapshot
  std::vector<double> train_loss;  // per epoch, raw (de-normalized) units
  std::vector<double> val_loss;    // per epoch, raw units
  double zero_predictor_val_loss = 0.0;  // val loss of the constant-zero residual
  int best_epoch = -1;
  long n_train = 0;
  long n_val = 0;
};

/// Trains the residual network: splits train/val/test by whole trajectory,
/// computes normalization statistics on the training split only, optimizes
/// with clipped Adam, and returns the snapshot with the best validation loss.
/// Deterministic for a fixed random source state.
TrainResult train_predictor(const ResidualDataset& dataset, const PredictorArch& arch,
                            const TrainConfig& config, RandomSource& rng);

/// Hybrid prediction: gm_predict from the last history state plus the
/// de-normalized network residual, combined wrap-aware, speed clamped >= 0
/// and position clamped into the room. history must hold exactly k states.
MobilityState hybrid_predict(const LstmModel& model,
                             std::span<const MobilityState> history,
                             const GmParams& gm, int horizon_steps);

/// Batched hybrid prediction over every full window of a state sequence.
/// Element j of the result predicts from index i = k - 1 + j. Matches
/// hybrid_predict to floating-point reassociation tolerance.
std::vector<MobilityState> hybrid_predict_batch(const LstmModel& model,
                                                std::span<const MobilityState> states,
                                                const GmParams& gm, int horizon_steps);

struct PredictedChannel {
  int ap_id = 0;
  ChannelGain gain;
  double rate_bps = 0.0;
};

/// Predicted association, gain, and rate from the hybrid state estimate.
PredictedChannel predicted_channel(const LstmModel& model,
                                   std::span<const MobilityState> history,
                                   const GmParams& gm, int horizon_steps,
                                   const Scenario& sc);

/// Metadata embedded in a trained model (hyper record keys "meta.*" and
/// "gm.*"); everything hybrid inference needs beyond the weights.
struct PredictorMeta {
  int horizon_steps = 0;
  double tick = 0.0;
  GmParams gm;
  RoomGeometry room;
};

void embed_predictor_meta(LstmModel& model, const PredictorMeta& meta);
PredictorMeta predictor_meta(const LstmModel& model);  // throws FormatError if absent

/// Model whose residual is identically zero (zero weights, identity
/// normalization): hybrid_predict reduces to gm_predict exactly.
LstmModel make_zero_residual_model(int k, int hidden, int num_layers,
                                   const PredictorMeta& meta);

/// Versioned binary dataset cache, same byte-level conventions as the model
/// format. Identical inputs serialize to identical bytes.
std::vector<std::uint8_t> serialize_dataset(const ResidualDataset& dataset);
ResidualDataset deserialize_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const std::string& path, const ResidualDataset& dataset);
ResidualDataset load_dataset(const std::string& path);

}  // namespace owcsim
