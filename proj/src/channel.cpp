#include "owcsim/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace owcsim {

Eigen::Vector3d receiver_normal(double theta, double phi) {
  if (!(theta >= 0.0 && theta <= kHalfPi)) {
    throw std::invalid_argument("receiver_normal: theta must be in [0, pi/2]");
  }
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

ChannelGain los_gain(const AccessPoint& ap, const MobilityState& s,
                     const ReceiverConfig& rx, const RoomGeometry& room) {
  if (!(rx.height < room.H)) {
    throw std::invalid_argument("los_gain: receiver plane must lie below the ceiling");
  }
  const Eigen::Vector3d rx_pos(s.x, s.y, rx.height);
  const Eigen::Vector3d to_rx = rx_pos - ap.position;
  const double d = to_rx.norm();
  if (d <= 0.0) {
    throw std::invalid_argument("los_gain: invalid geometry, zero AP-receiver distance");
  }
  // Emission angle against the AP's downward normal (0, 0, -1).
  const double cos_tx = -to_rx.z() / d;
  if (cos_tx <= 0.0) return {0.0};
  // Incidence angle between the receiver normal and the receiver->AP ray.
  const double cos_rx = receiver_normal(s.theta, s.phi).dot(-to_rx / d);
  if (cos_rx <= 0.0) return {0.0};
  if (std::acos(std::min(1.0, cos_rx)) > rx.fov_half_angle) return {0.0};
  const double h = (ap.lambertian_order + 1.0) * rx.area / (2.0 * kPi * d * d) *
                   std::pow(cos_tx, ap.lambertian_order) * cos_rx;
  return {h};
}

double interference(const MobilityState& s, int serving_ap_id, const Scenario& sc) {
  bool found = false;
  double total = 0.0;
  for (const auto& ap : sc.aps) {
    if (ap.id == serving_ap_id) {
      found = true;
      continue;
    }
    const double h = los_gain(ap, s, sc.receiver, sc.room).value;
    const double current = ap.transmit_power * sc.receiver.responsivity * h;
    total += current * current;
  }
  if (!found) {
    throw std::out_of_range("interference: unknown serving AP id " +
                            std::to_string(serving_ap_id));
  }
  return total;
}

double data_rate(ChannelGain gain, double interference_a2, const AccessPoint& serving,
                 const ReceiverConfig& rx, const NoiseConfig& noise) {
  if (!(interference_a2 >= 0.0)) {
    throw std::invalid_argument("data_rate: interference must be >= 0");
  }
  const double signal = serving.transmit_power * rx.responsivity * gain.value;
  const double snr = signal * signal / (noise.noise_variance + interference_a2);
  return noise.bandwidth * std::log2(1.0 + snr);
}

int associate(const MobilityState& s, const Scenario& sc) {
  if (sc.aps.empty()) {
    throw std::invalid_argument("associate: scenario has no access points");
  }
  int best_id = 0;
  double best_gain = -1.0;
  bool have_best = false;
  for (const auto& ap : sc.aps) {
    const double g = los_gain(ap, s, sc.receiver, sc.room).value;
    if (!have_best || g > best_gain || (g == best_gain && ap.id < best_id)) {
      best_gain = g;
      best_id = ap.id;
      have_best = true;
    }
  }
  return best_id;
}

}  // namespace owcsim
