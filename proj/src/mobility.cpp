#include "owcsim/mobility.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace owcsim {

namespace {

void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  }
}

void check_non_negative(double v, const char* name) {
  if (!(v >= 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be >= 0");
  }
}

struct GmNoise {
  double v = 0.0;
  double psi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

// Innovation scaling that keeps the stationary variance at sigma^2 for any
// memory factor.
double innovation_coeff(double alpha) { return std::sqrt(1.0 - alpha * alpha); }

// Shared deterministic core of gm_step / gm_predict. Noise terms enter
// pre-scaled by sigma so a zero GmNoise gives the exact mean step.
MobilityState gm_step_core(const MobilityState& s, const GmParams& p, double dt,
                           const RoomGeometry& room, const GmNoise& w) {
  MobilityState n;
  n.v = std::max(0.0, p.alpha_v * s.v + (1.0 - p.alpha_v) * p.mean_v +
                          innovation_coeff(p.alpha_v) * p.sigma_v * w.v);
  // Heading mean is the current heading: a pure correlated random walk.
  n.psi = wrap_angle(s.psi + innovation_coeff(p.alpha_psi) * p.sigma_psi * w.psi);
  n.theta = clamp(p.alpha_theta * s.theta + (1.0 - p.alpha_theta) * p.mean_theta +
                      innovation_coeff(p.alpha_theta) * p.sigma_theta * w.theta,
                  0.0, kHalfPi);
  // Device azimuth reverts toward the new heading (wrap-aware).
  n.phi = wrap_angle(n.psi + p.alpha_phi * angle_diff(s.phi, n.psi) +
                     innovation_coeff(p.alpha_phi) * p.sigma_phi * w.phi);
  n.x = s.x + n.v * dt * std::cos(n.psi);
  n.y = s.y + n.v * dt * std::sin(n.psi);
  reflect_boundary(n.x, n.y, n.psi, room);
  return n;
}

MobilityState draw_initial_state(const RoomGeometry& room, const GmParams& gm,
                                 RandomSource& rng) {
  MobilityState s;
  s.x = rng.uniform(0.0, room.L);
  s.y = rng.uniform(0.0, room.W);
  s.psi = wrap_angle(rng.uniform(-kPi, kPi));
  s.v = std::max(0.0, gm.mean_v + gm.sigma_v * rng.normal());
  s.theta = clamp(gm.mean_theta + gm.sigma_theta * rng.normal(), 0.0, kHalfPi);
  s.phi = wrap_angle(s.psi + gm.sigma_phi * rng.normal());
  return s;
}

}  // namespace

void validate(const GmParams& p) {
  check_unit_interval(p.alpha_v, "GmParams.alpha_v");
  check_unit_interval(p.alpha_psi, "GmParams.alpha_psi");
  check_unit_interval(p.alpha_theta, "GmParams.alpha_theta");
  check_unit_interval(p.alpha_phi, "GmParams.alpha_phi");
  check_non_negative(p.mean_v, "GmParams.mean_v");
  check_non_negative(p.sigma_v, "GmParams.sigma_v");
  check_non_negative(p.sigma_psi, "GmParams.sigma_psi");
  check_non_negative(p.sigma_theta, "GmParams.sigma_theta");
  check_non_negative(p.sigma_phi, "GmParams.sigma_phi");
}

void validate(const RwpParams& p) {
  if (!(p.v_min > 0.0 && p.v_min <= p.v_max)) {
    throw std::invalid_argument("RwpParams: require 0 < v_min <= v_max");
  }
  check_non_negative(p.pause_max, "RwpParams.pause_max");
  check_non_negative(p.theta_sigma, "RwpParams.theta_sigma");
  check_non_negative(p.phi_sigma, "RwpParams.phi_sigma");
  check_non_negative(p.jitter_sigma, "RwpParams.jitter_sigma");
}

void validate(const BehaviourParams& p) {
  check_non_negative(p.event_rate, "BehaviourParams.event_rate");
  check_unit_interval(p.pause_prob, "BehaviourParams.pause_prob");
  check_non_negative(p.turn_sigma, "BehaviourParams.turn_sigma");
  check_non_negative(p.reorient_sigma, "BehaviourParams.reorient_sigma");
  if (!(p.dwell_mean > 0.0)) {
    throw std::invalid_argument("BehaviourParams.dwell_mean must be > 0");
  }
}

void reflect_boundary(double& x, double& y, double& psi, const RoomGeometry& room) {
  for (int iter = 0; iter < 10000; ++iter) {
    bool changed = false;
    if (x < 0.0) {
      x = -x;
      psi = kPi - psi;
      changed = true;
    } else if (x > room.L) {
      x = 2.0 * room.L - x;
      psi = kPi - psi;
      changed = true;
    }
    if (y < 0.0) {
      y = -y;
      psi = -psi;
      changed = true;
    } else if (y > room.W) {
      y = 2.0 * room.W - y;
      psi = -psi;
      changed = true;
    }
    if (!changed) {
      psi = wrap_angle(psi);
      return;
    }
  }
  // Pathological displacement; pin to the footprint.
  x = clamp(x, 0.0, room.L);
  y = clamp(y, 0.0, room.W);
  psi = wrap_angle(psi);
}

MobilityState gm_step(const MobilityState& s, const GmParams& p, double dt,
                      const RoomGeometry& room, RandomSource& rng) {
  GmNoise w;
  w.v = rng.normal();
  w.psi = rng.normal();
  w.theta = rng.normal();
  w.phi = rng.normal();
  return gm_step_core(s, p, dt, room, w);
}

MobilityState gm_predict(const MobilityState& s, const GmParams& p, double dt,
                         const RoomGeometry& room, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("gm_predict: n_steps must be >= 1");
  MobilityState cur = s;
  const GmNoise zero;
  for (int i = 0; i < n_steps; ++i) {
    cur = gm_step_core(cur, p, dt, room, zero);
  }
  return cur;
}

RwpLegState rwp_init(const RoomGeometry& room, RandomSource& rng) {
  RwpLegState leg;
  leg.waypoint = {rng.uniform(0.0, room.L), rng.uniform(0.0, room.W)};
  leg.pause_remaining = 0.0;
  return leg;
}

MobilityState rwp_step(const MobilityState& s, RwpLegState& leg, const RwpParams& p,
                       double dt, const RoomGeometry& room, RandomSource& rng) {
  MobilityState n = s;
  if (leg.pause_remaining > 0.0) {
    leg.pause_remaining -= dt;
    n.v = 0.0;
    n.theta = clamp(n.theta + p.jitter_sigma * rng.normal(), 0.0, kHalfPi);
    n.phi = wrap_angle(n.phi + p.jitter_sigma * rng.normal());
    return n;
  }
  const Eigen::Vector2d pos(s.x, s.y);
  const Eigen::Vector2d to = leg.waypoint - pos;
  const double dist = to.norm();
  const double step = s.v * dt;
  if (dist <= step) {
    // Arrival: snap to the waypoint and start a fresh leg.
    n.x = leg.waypoint.x();
    n.y = leg.waypoint.y();
    leg.pause_remaining = rng.uniform(0.0, p.pause_max);
    leg.waypoint = {rng.uniform(0.0, room.L), rng.uniform(0.0, room.W)};
    n.v = rng.uniform(p.v_min, p.v_max);
    n.psi = std::atan2(leg.waypoint.y() - n.y, leg.waypoint.x() - n.x);
    n.psi = wrap_angle(n.psi);
    n.theta = clamp(p.mean_theta + p.theta_sigma * rng.normal(), 0.0, kHalfPi);
    n.phi = wrap_angle(n.psi + p.phi_sigma * rng.normal());
  } else {
    const Eigen::Vector2d dir = to / dist;
    n.x = s.x + dir.x() * step;
    n.y = s.y + dir.y() * step;
    n.psi = wrap_angle(std::atan2(dir.y(), dir.x()));
    n.theta = clamp(n.theta + p.jitter_sigma * rng.normal(), 0.0, kHalfPi);
    n.phi = wrap_angle(n.phi + p.jitter_sigma * rng.normal());
  }
  return n;
}

MobilityState rwp_predict(const MobilityState& s, double dt,
                          const RoomGeometry& room, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("rwp_predict: n_steps must be >= 1");
  MobilityState n = s;
  n.x = clamp(s.x + s.v * dt * n_steps * std::cos(s.psi), 0.0, room.L);
  n.y = clamp(s.y + s.v * dt * n_steps * std::sin(s.psi), 0.0, room.W);
  return n;
}

Trajectory generate_ground_truth(const Scenario& sc, const GmParams& gm,
                                 const BehaviourParams& beh, double duration,
                                 RandomSource& rng) {
  if (duration < sc.tick) {
    throw std::invalid_argument("generate_ground_truth: duration shorter than one tick");
  }
  const int n_steps = static_cast<int>(std::floor(duration / sc.tick + 1e-9));

  Trajectory traj;
  traj.tick = sc.tick;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);

  MobilityState s = draw_initial_state(sc.room, gm, rng);
  traj.states.push_back(s);

  const double inf = std::numeric_limits<double>::infinity();
  double next_event =
      beh.event_rate > 0.0 ? rng.exponential(1.0 / beh.event_rate) : inf;
  double pause_until = -inf;

  for (int i = 1; i <= n_steps; ++i) {
    const double t = i * sc.tick;
    const MobilityState prev = s;
    s = gm_step(s, gm, sc.tick, sc.room, rng);
    if (t <= pause_until) {
      // Stopped: position frozen, orientation keeps evolving.
      s.v = 0.0;
      s.x = prev.x;
      s.y = prev.y;
    }
    while (next_event <= t) {
      if (rng.uniform() < beh.pause_prob) {
        pause_until = next_event + rng.exponential(beh.dwell_mean);
        s.v = 0.0;
        s.x = prev.x;
        s.y = prev.y;
      } else {
        s.psi = wrap_angle(s.psi + beh.turn_sigma * rng.normal());
        s.theta = clamp(s.theta + beh.reorient_sigma * rng.normal(), 0.0, kHalfPi);
        s.phi = wrap_angle(s.phi + beh.reorient_sigma * rng.normal());
      }
      next_event += rng.exponential(1.0 / beh.event_rate);
    }
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace owcsim
