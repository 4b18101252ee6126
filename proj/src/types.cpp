#include "owcsim/types.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace owcsim {

void validate(const RoomGeometry& room) {
  if (!(room.L > 0.0 && room.W > 0.0 && room.H > 0.0)) {
    throw std::invalid_argument("RoomGeometry: L, W, H must be strictly positive");
  }
}

void validate(const MobilityState& s, const RoomGeometry& room) {
  if (!(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v) &&
        std::isfinite(s.psi) && std::isfinite(s.theta) && std::isfinite(s.phi))) {
    throw std::invalid_argument("MobilityState: non-finite field");
  }
  if (s.x < 0.0 || s.x > room.L || s.y < 0.0 || s.y > room.W) {
    throw std::invalid_argument("MobilityState: position outside room footprint");
  }
  if (s.v < 0.0) {
    throw std::invalid_argument("MobilityState: negative speed");
  }
  if (s.psi <= -kPi || s.psi > kPi || s.phi <= -kPi || s.phi > kPi) {
    throw std::invalid_argument("MobilityState: heading/azimuth not in (-pi, pi]");
  }
  if (s.theta < 0.0 || s.theta > kHalfPi) {
    throw std::invalid_argument("MobilityState: theta not in [0, pi/2]");
  }
}

void validate(const ReceiverConfig& rx, const RoomGeometry& room) {
  if (!(rx.area > 0.0)) throw std::invalid_argument("ReceiverConfig: area must be > 0");
  if (!(rx.responsivity > 0.0)) throw std::invalid_argument("ReceiverConfig: responsivity must be > 0");
  if (!(rx.fov_half_angle > 0.0 && rx.fov_half_angle <= kHalfPi)) {
    throw std::invalid_argument("ReceiverConfig: fov_half_angle must be in (0, pi/2]");
  }
  if (!(rx.height > 0.0 && rx.height < room.H)) {
    throw std::invalid_argument("ReceiverConfig: height must be in (0, room H)");
  }
}

void validate(const NoiseConfig& noise) {
  if (!(noise.bandwidth > 0.0)) throw std::invalid_argument("NoiseConfig: bandwidth must be > 0");
  if (!(noise.noise_variance > 0.0)) throw std::invalid_argument("NoiseConfig: noise_variance must be > 0");
}

void validate(const Scenario& sc) {
  validate(sc.room);
  validate(sc.receiver, sc.room);
  validate(sc.noise);
  if (!(sc.tick > 0.0)) throw std::invalid_argument("Scenario: tick must be > 0");
  if (sc.aps.empty()) throw std::invalid_argument("Scenario: at least one access point required");
  std::set<int> ids;
  for (const auto& ap : sc.aps) {
    if (!ids.insert(ap.id).second) {
      throw std::invalid_argument("Scenario: duplicate AP id " + std::to_string(ap.id));
    }
    if (ap.position.x() < 0.0 || ap.position.x() > sc.room.L ||
        ap.position.y() < 0.0 || ap.position.y() > sc.room.W) {
      throw std::invalid_argument("Scenario: AP " + std::to_string(ap.id) +
                                  " outside room footprint");
    }
    if (!(ap.lambertian_order >= 1.0)) {
      throw std::invalid_argument("Scenario: AP lambertian order must be >= 1");
    }
    if (!(ap.transmit_power > 0.0)) {
      throw std::invalid_argument("Scenario: AP transmit power must be > 0");
    }
  }
}

}  // namespace owcsim
