#pragma once

#include <string>
#include <vector>

#include "owcsim/errors.hpp"
#include "owcsim/mobility.hpp"
#include "owcsim/nn.hpp"
#include "owcsim/types.hpp"

namespace owcsim {

/// Training pipeline settings ([train] section).
struct TrainSettings {
  int n_trajectories = 80;
  double duration = 120.0;  // s per trajectory
  double speed_min = 0.2;   // per-trajectory mean-speed range of the corpus
  double speed_max = 1.6;
  int hidden_size = 32;
  int num_layers = 2;
  int window = 10;  // k
  int max_samples = 12000;
  TrainConfig optimizer;
};

/// Experiment settings ([eval] section).
struct EvalSettings {
  int realizations = 100;
  double duration = 10.0;            // s per held-out realization
  double base_horizon_ms = 100.0;    // horizon for the speed/rate experiments
  std::vector<double> horizons_ms = {100.0, 200.0, 300.0, 400.0, 500.0};
  std::vector<double> speeds = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
  double rate_speed = 1.0;     // m/s
  double rate_duration = 60.0; // s
  double floor_db = -120.0;
};

struct AppConfig {
  Scenario scenario;
  GmParams gm;
  BehaviourParams behaviour;
  RwpParams rwp;
  TrainSettings train;
  EvalSettings eval;
};

/// The built-in reference scenario: 5 x 5 x 3 m room, 2 x 2 AP grid,
/// 10 ms tick, 100 ms horizon.
AppConfig default_config();

/// Parses the sectioned `key = value` text format. Sections [room], [ap.N],
/// [receiver], [noise], [sim] are required; [gm], [behaviour], [rwp],
/// [train], [eval] fall back to defaults. Unknown sections or keys are
/// errors (fail-closed); missing keys inside a present section keep their
/// defaults. Angles are radians, SI units throughout.
AppConfig parse_config(const std::string& text, const std::string& origin);

/// Loads and parses a config file. Throws IoError / ConfigError.
AppConfig load_config(const std::string& path);

}  // namespace owcsim
