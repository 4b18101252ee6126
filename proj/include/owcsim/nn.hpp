#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "owcsim/errors.hpp"

namespace owcsim {

/// One LSTM layer. Gate order in the stacked dimension: input, forget, cell
/// candidate, output.
struct LstmLayerWeights {
  Eigen::MatrixXd w_input;      // [4 * hidden x input]
  Eigen::MatrixXd w_recurrent;  // [4 * hidden x hidden]
  Eigen::VectorXd bias;         // [4 * hidden]

  int input_dim() const { return static_cast<int>(w_input.cols()); }
  int hidden_dim() const { return static_cast<int>(w_recurrent.cols()); }
};

/// Stacked LSTM with a dense head applied to the final timestep's top hidden
/// state. Carries the per-feature input/target normalization statistics of
/// its training split and a free-form numeric metadata record.
struct LstmModel {
  std::vector<LstmLayerWeights> layers;
  Eigen::MatrixXd head_weights;  // [output x hidden]
  Eigen::VectorXd head_bias;     // [output]
  Eigen::VectorXd feature_mean;  // [input]
  Eigen::VectorXd feature_scale; // [input], strictly positive
  Eigen::VectorXd target_mean;   // [output]
  Eigen::VectorXd target_scale;  // [output], strictly positive
  int window = 0;                // expected input sequence length k
  std::map<std::string, double> hyper;  // metadata (horizon, tick, ...)

  int input_dim() const { return layers.empty() ? 0 : layers.front().input_dim(); }
  int hidden_dim() const { return layers.empty() ? 0 : layers.back().hidden_dim(); }
  int output_dim() const { return static_cast<int>(head_bias.size()); }
  int num_layers() const { return static_cast<int>(layers.size()); }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 128;
  int epochs = 25;
  double grad_clip_norm = 5.0;
  double validation_fraction = 0.15;
  double test_fraction = 0.15;
  int early_stop_patience = 4;
};

void validate(const TrainConfig& c);

/// Gradient (or moment) record mirroring a model's parameter shapes.
struct LstmGradients {
  std::vector<LstmLayerWeights> layers;
  Eigen::MatrixXd head_weights;
  Eigen::VectorXd head_bias;
};

LstmGradients zero_gradients(const LstmModel& model);

/// Adam moment state; t counts completed optimizer steps.
struct AdamState {
  LstmGradients m;
  LstmGradients v;
  long t = 0;
};

AdamState make_adam_state(const LstmModel& model);

/// One (already normalized) training example: a [input x k] window and its
/// [output] target.
struct SequenceExample {
  Eigen::MatrixXd window;
  Eigen::VectorXd target;
};

/// Forward pass over one [input x k] window; zero initial hidden/cell state;
/// dense head on the final timestep of the top layer.
Eigen::VectorXd lstm_forward(const LstmModel& model, const Eigen::MatrixXd& window);

/// Batched forward: steps[t] is the [input x batch] slice at timestep t.
/// Returns [output x batch].
Eigen::MatrixXd lstm_forward_batch(const LstmModel& model,
                                   const std::vector<Eigen::MatrixXd>& steps);

/// Mean-squared-error loss (mean over batch and output dims) of the batch.
double sequence_loss(const LstmModel& model, const std::vector<Eigen::MatrixXd>& steps,
                     const Eigen::MatrixXd& targets);

/// Exact gradients of the batch MSE loss w.r.t. every parameter via
/// backpropagation through time. Returns (gradients, loss).
std::pair<LstmGradients, double> bptt_gradients(const LstmModel& model,
                                                const std::vector<Eigen::MatrixXd>& steps,
                                                const Eigen::MatrixXd& targets);

/// Convenience overload for a list of (window, target) examples.
std::pair<LstmGradients, double> bptt_gradients(const LstmModel& model,
                                                std::span<const SequenceExample> batch);

/// Global-norm gradient clipping followed by an Adam update with bias
/// correction. Mutates model and opt_state.
void optimizer_step(LstmModel& model, const LstmGradients& grads, AdamState& opt_state,
                    const TrainConfig& config);

/// Max over parameters of the relative error between central finite
/// differences (with the given step) and the BPTT gradient.
double gradient_check(const LstmModel& model, const SequenceExample& sample, double step);

/// Versioned little-endian binary model format; round-trips bit-exactly.
std::vector<std::uint8_t> serialize_model(const LstmModel& model);
LstmModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const std::string& path, const LstmModel& model);
LstmModel load_model(const std::string& path);

}  // namespace owcsim
