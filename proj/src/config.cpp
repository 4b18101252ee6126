#include "owcsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace owcsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

struct ParsedFile {
  std::map<std::string, Section> sections;  // section name -> entries
  std::string origin;
};

ParsedFile tokenize(const std::string& text, const std::string& origin) {
  ParsedFile file;
  file.origin = origin;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      current = trim(stripped.substr(1, stripped.size() - 2));
      if (current.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
      }
      file.sections[current];  // sections may legitimately be empty
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (current.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    auto& section = file.sections[current];
    if (section.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                        "' in section [" + current + "]");
    }
    section[key] = {value, line_no};
  }
  return file;
}

// Tracks which keys were consumed so leftovers can be reported (fail-closed).
class SectionReader {
 public:
  SectionReader(const ParsedFile& file, const std::string& name, Section* section)
      : origin_(file.origin), name_(name), section_(section) {}

  bool has(const std::string& key) const { return section_ && section_->count(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_number(key);
  }

  long integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const double v = parse_number(key);
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v) {
      fail(key, "expected an integer");
    }
    return i;
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Entry& e = consume(key);
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument(e.value);
      return v;
    } catch (const std::exception&) {
      fail(key, "expected an unsigned integer");
    }
    return fallback;
  }

  std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const Entry& e = consume(key);
    std::vector<double> values;
    std::istringstream in(e.value);
    std::string cell;
    while (std::getline(in, cell, ',')) {
      const std::string t = trim(cell);
      try {
        std::size_t used = 0;
        values.push_back(std::stod(t, &used));
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        fail(key, "expected a comma-separated list of numbers");
      }
    }
    if (values.empty()) fail(key, "empty list");
    return values;
  }

  void finish() const {
    if (!section_) return;
    for (const auto& [key, entry] : *section_) {
      if (!consumed_.count(key)) {
        throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                          key + "' in section [" + name_ + "]");
      }
    }
  }

 private:
  const Entry& consume(const std::string& key) {
    consumed_.insert(key);
    return section_->at(key);
  }

  double parse_number(const std::string& key) {
    const Entry& e = consume(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument(e.value);
      return v;
    } catch (const std::exception&) {
      fail(key, "expected a number");
    }
    return 0.0;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) {
    const int line = section_->at(key).line;
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": key '" + key + "': " + what);
  }

  std::string origin_;
  std::string name_;
  Section* section_;
  std::set<std::string> consumed_;
};

}  // namespace

AppConfig default_config() {
  AppConfig cfg;
  cfg.scenario.room = {5.0, 5.0, 3.0};
  cfg.scenario.tick = 0.01;
  cfg.scenario.seed = 42;
  cfg.scenario.aps.clear();
  int id = 0;
  for (const double y : {1.25, 3.75}) {
    for (const double x : {1.25, 3.75}) {
      AccessPoint ap;
      ap.id = id++;
      ap.position = {x, y, cfg.scenario.room.H};
      ap.lambertian_order = 20.0;
      ap.transmit_power = 0.01;
      cfg.scenario.aps.push_back(ap);
    }
  }
  cfg.scenario.receiver = ReceiverConfig{};
  cfg.scenario.noise = NoiseConfig{};
  return cfg;
}

AppConfig parse_config(const std::string& text, const std::string& origin) {
  ParsedFile file = tokenize(text, origin);
  AppConfig cfg = default_config();

  const char* required[] = {"room", "receiver", "noise", "sim"};
  for (const char* name : required) {
    if (!file.sections.count(name)) {
      throw ConfigError(origin + ": missing required section [" + std::string(name) + "]");
    }
  }

  std::set<std::string> known = {"room", "receiver", "noise", "sim", "gm",
                                 "behaviour", "rwp", "train", "eval"};
  std::vector<int> ap_indices;
  for (const auto& [name, section] : file.sections) {
    if (known.count(name)) continue;
    if (name.rfind("ap.", 0) == 0) {
      const std::string idx = name.substr(3);
      try {
        std::size_t used = 0;
        const int i = std::stoi(idx, &used);
        if (used != idx.size() || i < 0) throw std::invalid_argument(idx);
        ap_indices.push_back(i);
      } catch (const std::exception&) {
        throw ConfigError(origin + ": bad access point section [" + name + "]");
      }
      continue;
    }
    throw ConfigError(origin + ": unknown section [" + name + "]");
  }
  if (ap_indices.empty()) {
    throw ConfigError(origin + ": missing required section [ap.0] (at least one AP)");
  }
  std::sort(ap_indices.begin(), ap_indices.end());

  auto section = [&file](const char* name) -> Section* {
    const auto it = file.sections.find(name);
    return it == file.sections.end() ? nullptr : &it->second;
  };

  {
    SectionReader r(file, "room", section("room"));
    cfg.scenario.room.L = r.number("L", cfg.scenario.room.L);
    cfg.scenario.room.W = r.number("W", cfg.scenario.room.W);
    cfg.scenario.room.H = r.number("H", cfg.scenario.room.H);
    r.finish();
  }
  {
    cfg.scenario.aps.clear();
    for (const int i : ap_indices) {
      const std::string name = "ap." + std::to_string(i);
      SectionReader r(file, name, &file.sections.at(name));
      AccessPoint ap;
      ap.id = i;
      ap.position = {r.number("x", cfg.scenario.room.L / 2.0),
                     r.number("y", cfg.scenario.room.W / 2.0), cfg.scenario.room.H};
      ap.lambertian_order = r.number("lambertian_order", 20.0);
      ap.transmit_power = r.number("transmit_power", 0.01);
      r.finish();
      cfg.scenario.aps.push_back(ap);
    }
  }
  {
    SectionReader r(file, "receiver", section("receiver"));
    auto& rx = cfg.scenario.receiver;
    rx.area = r.number("area", rx.area);
    rx.responsivity = r.number("responsivity", rx.responsivity);
    rx.fov_half_angle = r.number("fov_half_angle", rx.fov_half_angle);
    rx.height = r.number("height", rx.height);
    r.finish();
  }
  {
    SectionReader r(file, "noise", section("noise"));
    cfg.scenario.noise.bandwidth = r.number("bandwidth", cfg.scenario.noise.bandwidth);
    cfg.scenario.noise.noise_variance =
        r.number("noise_variance", cfg.scenario.noise.noise_variance);
    r.finish();
  }
  {
    SectionReader r(file, "sim", section("sim"));
    cfg.scenario.tick = r.number("tick", cfg.scenario.tick);
    cfg.scenario.seed = r.unsigned64("seed", cfg.scenario.seed);
    r.finish();
  }
  {
    SectionReader r(file, "gm", section("gm"));
    auto& gm = cfg.gm;
    gm.alpha_v = r.number("alpha_v", gm.alpha_v);
    gm.alpha_psi = r.number("alpha_psi", gm.alpha_psi);
    gm.alpha_theta = r.number("alpha_theta", gm.alpha_theta);
    gm.alpha_phi = r.number("alpha_phi", gm.alpha_phi);
    gm.mean_v = r.number("mean_v", gm.mean_v);
    gm.mean_theta = r.number("mean_theta", gm.mean_theta);
    gm.sigma_v = r.number("sigma_v", gm.sigma_v);
    gm.sigma_psi = r.number("sigma_psi", gm.sigma_psi);
    gm.sigma_theta = r.number("sigma_theta", gm.sigma_theta);
    gm.sigma_phi = r.number("sigma_phi", gm.sigma_phi);
    r.finish();
  }
  {
    SectionReader r(file, "behaviour", section("behaviour"));
    auto& b = cfg.behaviour;
    b.event_rate = r.number("event_rate", b.event_rate);
    b.turn_sigma = r.number("turn_sigma", b.turn_sigma);
    b.pause_prob = r.number("pause_prob", b.pause_prob);
    b.reorient_sigma = r.number("reorient_sigma", b.reorient_sigma);
    b.dwell_mean = r.number("dwell_mean", b.dwell_mean);
    r.finish();
  }
  {
    SectionReader r(file, "rwp", section("rwp"));
    auto& w = cfg.rwp;
    w.v_min = r.number("v_min", w.v_min);
    w.v_max = r.number("v_max", w.v_max);
    w.pause_max = r.number("pause_max", w.pause_max);
    w.mean_theta = r.number("mean_theta", w.mean_theta);
    w.theta_sigma = r.number("theta_sigma", w.theta_sigma);
    w.phi_sigma = r.number("phi_sigma", w.phi_sigma);
    w.jitter_sigma = r.number("jitter_sigma", w.jitter_sigma);
    r.finish();
  }
  {
    SectionReader r(file, "train", section("train"));
    auto& t = cfg.train;
    t.n_trajectories = static_cast<int>(r.integer("n_trajectories", t.n_trajectories));
    t.duration = r.number("duration", t.duration);
    t.speed_min = r.number("speed_min", t.speed_min);
    t.speed_max = r.number("speed_max", t.speed_max);
    t.hidden_size = static_cast<int>(r.integer("hidden_size", t.hidden_size));
    t.num_layers = static_cast<int>(r.integer("num_layers", t.num_layers));
    t.window = static_cast<int>(r.integer("window", t.window));
    t.max_samples = static_cast<int>(r.integer("max_samples", t.max_samples));
    auto& o = t.optimizer;
    o.learning_rate = r.number("learning_rate", o.learning_rate);
    o.beta1 = r.number("beta1", o.beta1);
    o.beta2 = r.number("beta2", o.beta2);
    o.epsilon = r.number("epsilon", o.epsilon);
    o.batch_size = static_cast<int>(r.integer("batch_size", o.batch_size));
    o.epochs = static_cast<int>(r.integer("epochs", o.epochs));
    o.grad_clip_norm = r.number("grad_clip_norm", o.grad_clip_norm);
    o.validation_fraction = r.number("validation_fraction", o.validation_fraction);
    o.test_fraction = r.number("test_fraction", o.test_fraction);
    o.early_stop_patience =
        static_cast<int>(r.integer("early_stop_patience", o.early_stop_patience));
    r.finish();
  }
  {
    SectionReader r(file, "eval", section("eval"));
    auto& e = cfg.eval;
    e.realizations = static_cast<int>(r.integer("realizations", e.realizations));
    e.duration = r.number("duration", e.duration);
    e.base_horizon_ms = r.number("base_horizon_ms", e.base_horizon_ms);
    e.horizons_ms = r.number_list("horizons_ms", e.horizons_ms);
    e.speeds = r.number_list("speeds", e.speeds);
    e.rate_speed = r.number("rate_speed", e.rate_speed);
    e.rate_duration = r.number("rate_duration", e.rate_duration);
    e.floor_db = r.number("floor_db", e.floor_db);
    r.finish();
  }

  try {
    validate(cfg.scenario);
    validate(cfg.gm);
    validate(cfg.behaviour);
    validate(cfg.rwp);
    validate(cfg.train.optimizer);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (cfg.train.n_trajectories < 1 || cfg.train.window < 1 ||
      cfg.train.hidden_size < 1 || cfg.train.num_layers < 1 ||
      cfg.train.max_samples < 1 || !(cfg.train.duration > 0.0)) {
    throw ConfigError(origin + ": invalid [train] settings");
  }
  if (!(cfg.train.speed_min >= 0.0 && cfg.train.speed_min <= cfg.train.speed_max)) {
    throw ConfigError(origin + ": require 0 <= train.speed_min <= train.speed_max");
  }
  if (cfg.eval.realizations < 1 || !(cfg.eval.duration > 0.0) ||
      !(cfg.eval.rate_duration >= 1.0)) {
    throw ConfigError(origin + ": invalid [eval] settings");
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace owcsim
