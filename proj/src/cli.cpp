#include "owcsim/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "owcsim/config.hpp"
#include "owcsim/eval.hpp"
#include "owcsim/hashing.hpp"
#include "owcsim/predictor.hpp"
#include "owcsim/trajectory_io.hpp"

namespace owcsim {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;  // empty: built-in defaults
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

struct LoadedConfig {
  AppConfig config;
  std::string config_origin;   // path or "(builtin defaults)"
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

LoadedConfig resolve_config(const CommonArgs& common) {
  LoadedConfig loaded;
  if (common.config_path.empty()) {
    loaded.config = default_config();
    loaded.config_origin = "(builtin defaults)";
    loaded.config_hash = fnv1a64(std::string("builtin defaults ") + kToolVersion);
  } else {
    std::ifstream in(common.config_path);
    if (!in) throw IoError("cannot open config file " + common.config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    loaded.config = parse_config(text, common.config_path);
    loaded.config_origin = common.config_path;
    loaded.config_hash = fnv1a64(text);
  }
  loaded.seed = common.seed_given ? common.seed : loaded.config.scenario.seed;
  return loaded;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

struct OutputRecord {
  std::string path;  // relative to the manifest location
  std::uint64_t hash = 0;
};

void write_manifest(const std::string& path, const std::string& command,
                    const LoadedConfig& loaded, const std::vector<OutputRecord>& outputs,
                    double duration_s) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = {{"path", loaded.config_origin}, {"fnv1a64", hex64(loaded.config_hash)}};
  j["seed"] = loaded.seed;
  j["version"] = kToolVersion;
  j["outputs"] = nlohmann::json::array();
  for (const auto& rec : outputs) {
    j["outputs"].push_back({{"path", rec.path}, {"fnv1a64", hex64(rec.hash)}});
  }
  j["duration_seconds"] = duration_s;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

std::string trajectory_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "traj_%04d.csv", index);
  return buf;
}

std::string model_filename(double horizon_ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "model_h%g.owcm", horizon_ms);
  return buf;
}

// ---------------------------------------------------------------------------
// gen-data: synthetic ground-truth corpus. Each trajectory gets its own
// random stream and a per-trajectory nominal speed drawn from
// [train.speed_min, train.speed_max] so the corpus spans the speed range the
// predictor will face.
// ---------------------------------------------------------------------------
int cmd_gen_data(const CommonArgs& common, const std::string& out_dir) {
  Stopwatch watch;
  const LoadedConfig loaded = resolve_config(common);
  const AppConfig& cfg = loaded.config;
  ensure_directory(out_dir);

  std::vector<OutputRecord> outputs;
  for (int j = 0; j < cfg.train.n_trajectories; ++j) {
    RandomSource rng(loaded.seed, streams::kTrainingTrajectory + static_cast<std::uint64_t>(j));
    GmParams gm = cfg.gm;
    gm.mean_v = rng.uniform(cfg.train.speed_min, cfg.train.speed_max);
    const Trajectory traj =
        generate_ground_truth(cfg.scenario, gm, cfg.behaviour, cfg.train.duration, rng);
    const std::string name = trajectory_filename(j);
    const std::string path = (fs::path(out_dir) / name).string();
    write_trajectory_csv(path, traj);
    outputs.push_back({name, fnv1a64_file(path)});
  }
  write_manifest((fs::path(out_dir) / "manifest.json").string(), "gen-data", loaded,
                 outputs, watch.seconds());
  std::printf("gen-data: wrote %zu trajectories to %s\n", outputs.size(), out_dir.c_str());
  return 0;
}

std::vector<std::string> sorted_trajectory_files(const std::string& data_dir) {
  if (!fs::is_directory(data_dir)) {
    throw IoError("data directory not found: " + data_dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw MissingArtifactError("no trajectory CSV files in " + data_dir);
  }
  return files;
}

// ---------------------------------------------------------------------------
// train: residual dataset + supervised training for one horizon.
// ---------------------------------------------------------------------------
int cmd_train(const CommonArgs& common, const std::string& data_dir, double horizon_ms,
              const std::string& out_model, const std::string& dataset_cache) {
  Stopwatch watch;
  const LoadedConfig loaded = resolve_config(common);
  const AppConfig& cfg = loaded.config;
  const int horizon_steps = horizon_to_steps(horizon_ms / 1000.0, cfg.scenario.tick);

  ResidualDataset dataset;
  bool from_cache = false;
  if (!dataset_cache.empty() && fs::exists(dataset_cache)) {
    dataset = load_dataset(dataset_cache);
    if (dataset.window != cfg.train.window || dataset.horizon_steps != horizon_steps ||
        std::abs(dataset.tick - cfg.scenario.tick) > 1e-12) {
      throw ConfigError("dataset cache " + dataset_cache +
                        " does not match the configured window/horizon/tick");
    }
    from_cache = true;
  } else {
    const auto files = sorted_trajectory_files(data_dir);
    std::vector<Trajectory> trajectories;
    trajectories.reserve(files.size());
    for (const auto& f : files) trajectories.push_back(read_trajectory_csv(f));

    long possible = 0;
    for (const auto& t : trajectories) {
      possible += std::max<long>(0, static_cast<long>(t.states.size()) - horizon_steps -
                                        cfg.train.window + 1);
    }
    const long stride =
        std::max<long>(1, (possible + cfg.train.max_samples - 1) / cfg.train.max_samples);
    dataset = build_residual_dataset(trajectories, cfg.gm, cfg.scenario.room,
                                     cfg.train.window, horizon_steps,
                                     static_cast<int>(stride));
    if (dataset.skipped_trajectories > 0) {
      std::fprintf(stderr, "warning: skipped %d trajectories shorter than window + horizon\n",
                   dataset.skipped_trajectories);
    }
    if (!dataset_cache.empty()) save_dataset(dataset_cache, dataset);
  }

  RandomSource rng(loaded.seed, streams::kModelInit + static_cast<std::uint64_t>(horizon_steps));
  PredictorArch arch{cfg.train.hidden_size, cfg.train.num_layers};
  const TrainResult result = train_predictor(dataset, arch, cfg.train.optimizer, rng);
  save_model(out_model, result.model);

  std::vector<OutputRecord> outputs;
  outputs.push_back({fs::path(out_model).filename().string(), fnv1a64_file(out_model)});
  write_manifest(out_model + ".manifest.json", "train", loaded, outputs, watch.seconds());

  const double final_train = result.train_loss.empty() ? 0.0 : result.train_loss.back();
  const double best_val = result.val_loss.empty()
                              ? result.zero_predictor_val_loss
                              : *std::min_element(result.val_loss.begin(), result.val_loss.end());
  std::printf("train: horizon %g ms, %zu samples (%s), train objective mse %.6e, "
              "val mse %.6e (best epoch %d), zero-residual val mse %.6e\n",
              horizon_ms, dataset.samples.size(), from_cache ? "cached" : "built",
              final_train, best_val, result.best_epoch, result.zero_predictor_val_loss);
  return 0;
}

// ---------------------------------------------------------------------------
// eval: the three experiments, reading trained models from a directory.
// ---------------------------------------------------------------------------
LstmModel load_model_checked(const fs::path& path, const AppConfig& cfg,
                             int expect_horizon_steps) {
  if (!fs::exists(path)) {
    throw MissingArtifactError("missing model file " + path.string());
  }
  LstmModel model = load_model(path.string());
  const PredictorMeta meta = predictor_meta(model);
  if (std::abs(meta.tick - cfg.scenario.tick) > 1e-12) {
    throw ConfigError("model " + path.string() + " was trained at a different tick");
  }
  if (meta.horizon_steps != expect_horizon_steps) {
    throw ConfigError("model " + path.string() + " was trained for horizon " +
                      std::to_string(meta.horizon_steps) + " steps, expected " +
                      std::to_string(expect_horizon_steps));
  }
  return model;
}

int cmd_eval(const CommonArgs& common, const std::string& models_dir,
             const std::string& experiment, const std::string& out_dir) {
  Stopwatch watch;
  const LoadedConfig loaded = resolve_config(common);
  const AppConfig& cfg = loaded.config;
  ensure_directory(out_dir);

  EvalOptions opts;
  opts.realizations = cfg.eval.realizations;
  opts.duration = cfg.eval.duration;
  opts.floor_db = cfg.eval.floor_db;
  opts.threads = common.threads;

  std::vector<OutputRecord> outputs;
  if (experiment == "horizon") {
    std::map<int, LstmModel> models;
    std::vector<double> horizons_s;
    for (const double ms : cfg.eval.horizons_ms) {
      const int steps = horizon_to_steps(ms / 1000.0, cfg.scenario.tick);
      models.emplace(steps, load_model_checked(fs::path(models_dir) / model_filename(ms),
                                               cfg, steps));
      horizons_s.push_back(ms / 1000.0);
    }
    const auto records = run_horizon_sweep(cfg.scenario, cfg.gm, cfg.behaviour, horizons_s,
                                           models, opts, loaded.seed);
    const std::string path = (fs::path(out_dir) / "rmse_horizon.csv").string();
    write_rmse_csv(path, records, "horizon_s");
    outputs.push_back({"rmse_horizon.csv", fnv1a64_file(path)});
  } else if (experiment == "speed") {
    const int steps = horizon_to_steps(cfg.eval.base_horizon_ms / 1000.0, cfg.scenario.tick);
    const LstmModel model = load_model_checked(
        fs::path(models_dir) / model_filename(cfg.eval.base_horizon_ms), cfg, steps);
    const auto records =
        run_speed_sweep(cfg.scenario, cfg.gm, cfg.behaviour, cfg.eval.speeds,
                        cfg.eval.base_horizon_ms / 1000.0, model, opts, loaded.seed);
    const std::string path = (fs::path(out_dir) / "rmse_speed.csv").string();
    write_rmse_csv(path, records, "speed_mps");
    outputs.push_back({"rmse_speed.csv", fnv1a64_file(path)});
  } else if (experiment == "rate") {
    const int steps = horizon_to_steps(cfg.eval.base_horizon_ms / 1000.0, cfg.scenario.tick);
    const LstmModel model = load_model_checked(
        fs::path(models_dir) / model_filename(cfg.eval.base_horizon_ms), cfg, steps);
    const auto samples = run_rate_timeseries(
        cfg.scenario, cfg.gm, cfg.behaviour, cfg.eval.rate_speed, cfg.eval.rate_duration,
        cfg.eval.base_horizon_ms / 1000.0, model, opts, loaded.seed);
    const std::string path = (fs::path(out_dir) / "rate_time.csv").string();
    write_rate_csv(path, samples);
    outputs.push_back({"rate_time.csv", fnv1a64_file(path)});
  } else {
    throw UsageError("unknown experiment '" + experiment +
                     "' (expected horizon, speed, or rate)");
  }

  write_manifest((fs::path(out_dir) / ("manifest_" + experiment + ".json")).string(),
                 "eval " + experiment, loaded, outputs, watch.seconds());
  std::printf("eval: %s experiment written to %s\n", experiment.c_str(), out_dir.c_str());
  return 0;
}

void add_common_options(CLI::App* sub, CommonArgs& common) {
  sub->add_option("--config", common.config_path,
                  "Scenario configuration file (built-in defaults when omitted)");
  sub->add_option("--seed", common.seed, "Seed override (defaults to [sim] seed)");
  sub->add_option("--threads", common.threads, "Worker thread cap")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Indoor optical wireless mobility prediction and channel evaluation toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string out_dir;
  std::string data_dir;
  std::string out_model;
  std::string models_dir;
  std::string experiment;
  std::string dataset_cache;
  double horizon_ms = 100.0;

  CLI::App* gen = app.add_subcommand("gen-data", "Generate ground-truth trajectory CSVs");
  add_common_options(gen, common);
  gen->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train the residual predictor for one horizon");
  add_common_options(train, common);
  train->add_option("--data", data_dir, "Directory of trajectory CSVs")->required();
  train->add_option("--horizon-ms", horizon_ms, "Prediction horizon in milliseconds");
  train->add_option("--out-model", out_model, "Output model file")->required();
  train->add_option("--dataset-cache", dataset_cache,
                    "Binary residual-dataset cache (reused when present)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Run an experiment and write its CSV");
  add_common_options(eval_cmd, common);
  eval_cmd->add_option("--models", models_dir, "Directory of trained model files")->required();
  eval_cmd->add_option("--experiment", experiment, "One of: horizon, speed, rate")->required();
  eval_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  common.seed_given = gen->count("--seed") || train->count("--seed") || eval_cmd->count("--seed");

  try {
    if (app.got_subcommand(gen)) return cmd_gen_data(common, out_dir);
    if (app.got_subcommand(train)) {
      return cmd_train(common, data_dir, horizon_ms, out_model, dataset_cache);
    }
    return cmd_eval(common, models_dir, experiment, out_dir);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const MissingArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("owcsim");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& a : full) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace owcsim
