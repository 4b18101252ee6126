#include "owcsim/trajectory_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace owcsim {

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  if (traj.states.empty()) {
    throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "t,x,y,v,psi,theta,phi\n";
  char buf[256];
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const MobilityState& s = traj.states[i];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<double>(i) * traj.tick, s.x, s.y, s.v, s.psi, s.theta,
                  s.phi);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,x,y,v,psi,theta,phi") {
    throw FormatError(path + ": unexpected header '" + line + "'");
  }

  std::vector<double> times;
  Trajectory traj;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double fields[7];
    std::istringstream row(line);
    std::string cell;
    for (int f = 0; f < 7; ++f) {
      if (!std::getline(row, cell, ',')) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": expected 7 fields");
      }
      try {
        std::size_t used = 0;
        fields[f] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": bad number '" +
                          cell + "'");
      }
    }
    if (std::getline(row, cell, ',')) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": too many fields");
    }
    times.push_back(fields[0]);
    MobilityState s;
    s.x = fields[1];
    s.y = fields[2];
    s.v = std::max(0.0, fields[3]);
    s.psi = wrap_angle(fields[4]);
    s.theta = clamp(fields[5], 0.0, kHalfPi);
    s.phi = wrap_angle(fields[6]);
    traj.states.push_back(s);
  }
  if (traj.states.size() < 2) {
    throw FormatError(path + ": need at least two rows to recover the tick");
  }
  traj.tick = times[1] - times[0];
  if (!(traj.tick > 0.0)) throw FormatError(path + ": non-increasing time column");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expected = static_cast<double>(i) * traj.tick;
    if (std::abs(times[i] - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
      throw FormatError(path + ": non-uniform time spacing at row " + std::to_string(i));
    }
  }
  return traj;
}

}  // namespace owcsim
