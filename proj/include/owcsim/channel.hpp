#pragma once

#include <Eigen/Dense>

#include "owcsim/types.hpp"

namespace owcsim {

/// Dimensionless line-of-sight DC channel gain.
struct ChannelGain {
  double value = 0.0;
};

/// Unit receiver normal from the device orientation angles:
/// n = (sin theta cos phi, sin theta sin phi, cos theta).
Eigen::Vector3d receiver_normal(double theta, double phi);

/// Generalized-Lambertian LOS DC gain between a ceiling AP and the receiver
/// at (x, y, rx.height). Zero outside the receiver field of view or when the
/// normal faces away from the AP.
ChannelGain los_gain(const AccessPoint& ap, const MobilityState& s,
                     const ReceiverConfig& rx, const RoomGeometry& room);

/// Aggregate interference current variance from all non-serving APs, each
/// transmitting at full power: sum of (P_t * R_PD * H)^2.
double interference(const MobilityState& s, int serving_ap_id, const Scenario& sc);

/// IM/DD achievable rate, bits/s:
/// R = B log2(1 + (P_t R_PD H)^2 / (sigma^2 + I)) with the serving AP's P_t.
double data_rate(ChannelGain gain, double interference_a2, const AccessPoint& serving,
                 const ReceiverConfig& rx, const NoiseConfig& noise);

/// AP with the maximum LOS gain for the given (possibly predicted) state;
/// ties break toward the lowest AP id.
int associate(const MobilityState& s, const Scenario& sc);

}  // namespace owcsim
