#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "owcsim/angles.hpp"

namespace owcsim {

/// 6-D user state: horizontal position, speed, movement heading, and the
/// orientation of the receiver normal on the handheld device.
struct MobilityState {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double v = 0.0;      // m/s, >= 0
  double psi = 0.0;    // rad, heading in the horizontal plane, (-pi, pi]
  double theta = 0.0;  // rad, receiver polar angle from vertical, [0, pi/2]
  double phi = 0.0;    // rad, receiver azimuth, (-pi, pi]
};

struct RoomGeometry {
  double L = 5.0;  // m
  double W = 5.0;  // m
  double H = 3.0;  // m, ceiling height
};

struct AccessPoint {
  int id = 0;
  Eigen::Vector3d position{2.5, 2.5, 3.0};  // m, ceiling-mounted (z = room H)
  double lambertian_order = 1.0;            // m >= 1
  double transmit_power = 0.01;             // P_t, W
};

struct ReceiverConfig {
  double area = 1e-4;                  // A_pd, m^2
  double responsivity = 0.5;           // R_PD, A/W
  double fov_half_angle = kPi / 3.0;   // rad, (0, pi/2]
  double height = 1.0;                 // m, receiver plane above the floor
};

struct NoiseConfig {
  double bandwidth = 4e8;         // B, Hz
  double noise_variance = 1e-14;  // sigma^2, A^2
};

struct Scenario {
  RoomGeometry room;
  std::vector<AccessPoint> aps;
  ReceiverConfig receiver;
  NoiseConfig noise;
  double tick = 0.01;        // s
  std::uint64_t seed = 42;
};

/// Time-indexed state sequence at a fixed tick; states[i] is the state at
/// time i * tick.
struct Trajectory {
  double tick = 0.01;
  std::vector<MobilityState> states;
};

// Invariant checks; throw std::invalid_argument naming the violated field.
void validate(const RoomGeometry& room);
void validate(const MobilityState& s, const RoomGeometry& room);
void validate(const ReceiverConfig& rx, const RoomGeometry& room);
void validate(const NoiseConfig& noise);
void validate(const Scenario& sc);

}  // namespace owcsim
