#pragma once

#include <Eigen/Dense>

#include "owcsim/rng.hpp"
#include "owcsim/types.hpp"

namespace owcsim {

/// First-order Gauss-Markov recursion parameters. A memory factor alpha
/// interpolates between deterministic inertia (1) and memoryless reversion
/// to the mean (0). Each sigma is the stationary standard deviation of its
/// component; the per-step innovation is scaled by sqrt(1 - alpha^2) so the
/// stationary variance is alpha-independent.
struct GmParams {
  double alpha_v = 0.97;
  double alpha_psi = 0.98;
  double alpha_theta = 0.96;
  double alpha_phi = 0.92;
  double mean_v = 1.0;                        // m/s
  double mean_theta = 41.0 / 180.0 * kPi;     // rad, typical handheld tilt
  double sigma_v = 0.2;                       // m/s
  double sigma_psi = 0.35;                    // rad
  double sigma_theta = 0.08;                  // rad
  double sigma_phi = 0.3;                     // rad
};

/// Random Waypoint leg parameters. Orientation is re-drawn at every waypoint
/// (memoryless) around mean_theta / the new heading and wobbles by
/// jitter_sigma per step in between.
struct RwpParams {
  double v_min = 0.2;                       // m/s
  double v_max = 1.6;                       // m/s
  double pause_max = 2.0;                   // s
  double mean_theta = 41.0 / 180.0 * kPi;   // rad
  double theta_sigma = 0.15;                // rad, spread of theta at re-draw
  double phi_sigma = 0.4;                   // rad, spread of phi about heading
  double jitter_sigma = 0.01;               // rad per step between waypoints
};

/// Abrupt behavioural events layered on the Gauss-Markov flow: Poisson
/// arrivals that either stop the user for an exponentially distributed dwell
/// or jump the heading and re-grip the device.
struct BehaviourParams {
  double event_rate = 0.25;     // events / s
  double turn_sigma = 0.8;      // rad, heading jump scale
  double pause_prob = 0.4;      // probability an event is a stop
  double reorient_sigma = 0.35; // rad, device re-grip jump scale
  double dwell_mean = 1.0;      // s, mean pause duration
};

void validate(const GmParams& p);
void validate(const RwpParams& p);
void validate(const BehaviourParams& p);

/// Specular reflection into the room footprint: the violated coordinate is
/// mirrored about the wall and the matching heading component negated,
/// repeatedly until the point is inside. psi is returned canonicalized.
void reflect_boundary(double& x, double& y, double& psi, const RoomGeometry& room);

/// One stochastic Gauss-Markov step of length dt. Speed and angles follow the
/// recursion s' = alpha s + (1 - alpha) s_mean + sqrt(1 - alpha^2) sigma w;
/// the heading recursion has no global mean (its mean is the current heading)
/// and the azimuth mean tracks the new heading. Position integrates the new
/// (v, psi) and reflects off walls. Consumes exactly four normal draws.
MobilityState gm_step(const MobilityState& s, const GmParams& p, double dt,
                      const RoomGeometry& room, RandomSource& rng);

/// Deterministic expected-value rollout: n_steps applications of gm_step with
/// all noise terms zero. Bit-identical to gm_step when all sigmas are zero.
MobilityState gm_predict(const MobilityState& s, const GmParams& p, double dt,
                         const RoomGeometry& room, int n_steps);

/// Waypoint-leg state threaded through rwp_step.
struct RwpLegState {
  Eigen::Vector2d waypoint{0.0, 0.0};
  double pause_remaining = 0.0;  // s
};

/// Draws the first waypoint for a fresh Random Waypoint walk.
RwpLegState rwp_init(const RoomGeometry& room, RandomSource& rng);

/// One Random Waypoint step: travel v * dt toward the waypoint; on arrival
/// (remaining distance <= v * dt) snap to it, draw a pause ~ U[0, pause_max],
/// a fresh uniform waypoint, a speed ~ U[v_min, v_max], and re-draw the
/// device orientation.
MobilityState rwp_step(const MobilityState& s, RwpLegState& leg, const RwpParams& p,
                       double dt, const RoomGeometry& room, RandomSource& rng);

/// Constant-velocity dead reckoning over n_steps ticks; orientation held.
/// Position is clamped to the room footprint. This is the strongest
/// prediction the memoryless model supports (future waypoint draws are
/// unobservable), and it needs no random source.
MobilityState rwp_predict(const MobilityState& s, double dt,
                          const RoomGeometry& room, int n_steps);

/// Ground-truth generator: Gauss-Markov flow plus Poisson behavioural events
/// (heading jumps with device re-grips, or stops with exponential dwell).
/// Returns floor(duration / tick) + 1 states including the initial state.
Trajectory generate_ground_truth(const Scenario& sc, const GmParams& gm,
                                 const BehaviourParams& beh, double duration,
                                 RandomSource& rng);

}  // namespace owcsim
