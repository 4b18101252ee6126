#include <doctest.h>

#include <cmath>

#include "owcsim/config.hpp"
#include "owcsim/mobility.hpp"

using namespace owcsim;

namespace {

RoomGeometry big_room() { return {1e6, 1e6, 3.0}; }

MobilityState mid_state(const RoomGeometry& room) {
  MobilityState s;
  s.x = room.L / 2.0;
  s.y = room.W / 2.0;
  s.v = 1.0;
  s.psi = 0.3;
  s.theta = 0.7;
  s.phi = 0.4;
  return s;
}

}  // namespace

TEST_SUITE("mobility") {

TEST_CASE("gm_step with full memory keeps the speed") {
  GmParams p;
  p.alpha_v = 1.0;
  const RoomGeometry room = big_room();
  MobilityState s = mid_state(room);
  s.v = 1.234;
  RandomSource rng(1, 0);
  const MobilityState n = gm_step(s, p, 0.01, room, rng);
  CHECK(n.v == 1.234);  // sqrt(1 - alpha^2) = 0 kills the noise exactly
}

TEST_CASE("gm recursion hand values") {
  GmParams p;
  p.sigma_v = 0.0;
  p.sigma_psi = 0.0;
  p.sigma_theta = 0.0;
  p.sigma_phi = 0.0;
  p.mean_v = 0.5;
  const RoomGeometry room = big_room();
  MobilityState s = mid_state(room);

  SUBCASE("memoryless mean reversion") {
    p.alpha_v = 0.0;
    RandomSource rng(1, 0);
    CHECK(gm_step(s, p, 0.01, room, rng).v == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("one step, alpha 0.75") {
    p.alpha_v = 0.75;
    s.v = 1.0;
    RandomSource rng(1, 0);
    CHECK(gm_step(s, p, 0.01, room, rng).v == doctest::Approx(0.875).epsilon(1e-15));
  }
  SUBCASE("two-step prediction equals alpha^2 v + (1 - alpha^2) v_mean") {
    p.alpha_v = 0.75;
    s.v = 1.0;
    CHECK(gm_predict(s, p, 0.01, room, 2).v == doctest::Approx(0.78125).epsilon(1e-15));
  }
}

TEST_CASE("gm_predict ignores the sigma parameters") {
  GmParams a;
  GmParams b = a;
  b.sigma_v = 5.0;
  b.sigma_psi = 5.0;
  b.sigma_theta = 5.0;
  b.sigma_phi = 5.0;
  const RoomGeometry room{5, 5, 3};
  const MobilityState s = mid_state(room);
  const MobilityState pa = gm_predict(s, a, 0.01, room, 7);
  const MobilityState pb = gm_predict(s, b, 0.01, room, 7);
  CHECK(pa.x == pb.x);
  CHECK(pa.y == pb.y);
  CHECK(pa.v == pb.v);
  CHECK(pa.psi == pb.psi);
  CHECK(pa.theta == pb.theta);
  CHECK(pa.phi == pb.phi);
}

TEST_CASE("gm_step with zero sigmas equals gm_predict with one step") {
  GmParams p;
  p.sigma_v = 0.0;
  p.sigma_psi = 0.0;
  p.sigma_theta = 0.0;
  p.sigma_phi = 0.0;
  const RoomGeometry room{5, 5, 3};
  RandomSource init(3, 9);
  for (int trial = 0; trial < 50; ++trial) {
    MobilityState s;
    s.x = init.uniform(0.0, room.L);
    s.y = init.uniform(0.0, room.W);
    s.v = init.uniform(0.0, 2.0);
    s.psi = wrap_angle(init.uniform(-kPi, kPi));
    s.theta = init.uniform(0.0, kHalfPi);
    s.phi = wrap_angle(init.uniform(-kPi, kPi));
    RandomSource rng(4, 7);
    const MobilityState stepped = gm_step(s, p, 0.01, room, rng);
    const MobilityState predicted = gm_predict(s, p, 0.01, room, 1);
    CHECK(stepped.x == predicted.x);
    CHECK(stepped.y == predicted.y);
    CHECK(stepped.v == predicted.v);
    CHECK(stepped.psi == predicted.psi);
    CHECK(stepped.theta == predicted.theta);
    CHECK(stepped.phi == predicted.phi);
  }
}

TEST_CASE("gm stationary moments pin the recursion form") {
  // Empirical mean -> mean_v within 1% and variance -> sigma_v^2 within 5%;
  // the sqrt(1 - alpha^2) innovation makes the variance alpha-independent.
  GmParams p;
  p.mean_v = 1.0;
  p.sigma_v = 0.2;
  const RoomGeometry room = big_room();
  for (const double alpha : {0.3, 0.75}) {
    p.alpha_v = alpha;
    MobilityState s = mid_state(room);
    RandomSource rng(42, 17);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      s = gm_step(s, p, 0.01, room, rng);
      sum += s.v;
      sum_sq += s.v * s.v;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(p.mean_v).epsilon(0.01));
    CHECK(var == doctest::Approx(p.sigma_v * p.sigma_v).epsilon(0.05));
  }
}

TEST_CASE("reflect_boundary examples") {
  const RoomGeometry room{5, 5, 3};
  double x, y, psi;

  x = -0.1, y = 2.0, psi = kPi;
  reflect_boundary(x, y, psi, room);
  CHECK(x == doctest::Approx(0.1));
  CHECK(y == 2.0);
  CHECK(psi == doctest::Approx(0.0));

  x = 5.2, y = 2.0, psi = 0.0;
  reflect_boundary(x, y, psi, room);
  CHECK(x == doctest::Approx(4.8));
  CHECK(psi == doctest::Approx(kPi));

  x = 2.0, y = 3.0, psi = 1.0;
  reflect_boundary(x, y, psi, room);
  CHECK(x == 2.0);
  CHECK(y == 3.0);
  CHECK(psi == 1.0);
}

TEST_CASE("reflect_boundary always lands inside") {
  const RoomGeometry room{4, 3, 3};
  RandomSource rng(8, 0);
  for (int i = 0; i < 5000; ++i) {
    double x = rng.uniform(-20.0, 20.0);
    double y = rng.uniform(-20.0, 20.0);
    double psi = rng.uniform(-10.0, 10.0);
    reflect_boundary(x, y, psi, room);
    CHECK(x >= 0.0);
    CHECK(x <= room.L);
    CHECK(y >= 0.0);
    CHECK(y <= room.W);
    CHECK(psi > -kPi);
    CHECK(psi <= kPi);
  }
}

TEST_CASE("rwp_step moves toward the waypoint") {
  const RoomGeometry room{10, 10, 3};
  RwpParams p;
  MobilityState s;
  s.x = 0.0;
  s.y = 0.0;
  s.v = 1.0;
  RwpLegState leg;
  leg.waypoint = {3.0, 4.0};
  RandomSource rng(1, 0);
  const MobilityState n = rwp_step(s, leg, p, 0.1, room, rng);
  CHECK(n.x == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(n.y == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("rwp_step arrival draws a fresh leg") {
  const RoomGeometry room{10, 10, 3};
  RwpParams p;
  p.pause_max = 0.0;
  p.v_min = 1.0;
  p.v_max = 1.0;
  MobilityState s;
  s.x = 2.0;
  s.y = 2.0;
  s.v = 1.0;
  RwpLegState leg;
  leg.waypoint = {2.0, 2.0};  // already there
  RandomSource rng(1, 0);
  const MobilityState n = rwp_step(s, leg, p, 0.1, room, rng);
  CHECK(n.x == 2.0);
  CHECK(n.y == 2.0);
  CHECK(leg.pause_remaining == 0.0);
  CHECK(n.v == 1.0);  // degenerate uniform [1, 1]
  CHECK((leg.waypoint.x() != 2.0 || leg.waypoint.y() != 2.0));
}

TEST_CASE("rwp_predict dead reckons and ignores randomness") {
  const RoomGeometry room{10, 10, 3};
  MobilityState s;
  s.x = 1.0;
  s.y = 2.0;
  s.v = 1.0;
  s.psi = 0.0;
  const MobilityState n = rwp_predict(s, 0.01, room, 10);
  CHECK(n.x == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(n.y == 2.0);
  CHECK(n.v == s.v);
  CHECK(n.theta == s.theta);

  MobilityState still = s;
  still.v = 0.0;
  const MobilityState m = rwp_predict(still, 0.01, room, 10);
  CHECK(m.x == still.x);
  CHECK(m.y == still.y);
}

TEST_CASE("generate_ground_truth state count and invariants") {
  AppConfig cfg = default_config();
  RandomSource rng(cfg.scenario.seed, 0);
  const Trajectory traj =
      generate_ground_truth(cfg.scenario, cfg.gm, cfg.behaviour, 60.0, rng);
  CHECK(traj.states.size() == 6001);
  for (const auto& s : traj.states) {
    CHECK_NOTHROW(validate(s, cfg.scenario.room));
  }
}

TEST_CASE("generate_ground_truth degenerates to a straight line") {
  AppConfig cfg = default_config();
  GmParams gm = cfg.gm;
  gm.alpha_v = 1.0;
  gm.alpha_psi = 1.0;
  gm.alpha_theta = 1.0;
  gm.alpha_phi = 1.0;
  gm.sigma_v = 0.0;
  gm.sigma_psi = 0.0;
  gm.sigma_theta = 0.0;
  gm.sigma_phi = 0.0;
  BehaviourParams beh = cfg.behaviour;
  beh.event_rate = 0.0;
  RandomSource rng(3, 0);
  const Trajectory traj = generate_ground_truth(cfg.scenario, gm, beh, 2.0, rng);
  // Constant speed, constant heading between reflections.
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    CHECK(traj.states[i].v == traj.states[0].v);
    const double step = std::hypot(traj.states[i].x - traj.states[i - 1].x,
                                   traj.states[i].y - traj.states[i - 1].y);
    CHECK(step == doctest::Approx(traj.states[0].v * cfg.scenario.tick).epsilon(1e-9));
  }
}

TEST_CASE("generate_ground_truth is seed-deterministic") {
  AppConfig cfg = default_config();
  RandomSource r1(99, 5);
  RandomSource r2(99, 5);
  const Trajectory a = generate_ground_truth(cfg.scenario, cfg.gm, cfg.behaviour, 5.0, r1);
  const Trajectory b = generate_ground_truth(cfg.scenario, cfg.gm, cfg.behaviour, 5.0, r2);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].x == b.states[i].x);
    CHECK(a.states[i].y == b.states[i].y);
    CHECK(a.states[i].v == b.states[i].v);
    CHECK(a.states[i].psi == b.states[i].psi);
    CHECK(a.states[i].theta == b.states[i].theta);
    CHECK(a.states[i].phi == b.states[i].phi);
  }
}

TEST_CASE("generate_ground_truth rejects sub-tick durations") {
  AppConfig cfg = default_config();
  RandomSource rng(1, 0);
  CHECK_THROWS_AS(generate_ground_truth(cfg.scenario, cfg.gm, cfg.behaviour, 0.001, rng),
                  std::invalid_argument);
}

TEST_CASE("rwp trajectories respect invariants") {
  const RoomGeometry room{5, 5, 3};
  RwpParams p;
  RandomSource rng(21, 0);
  MobilityState s;
  s.x = 2.5;
  s.y = 2.5;
  s.v = 1.0;
  RwpLegState leg = rwp_init(room, rng);
  for (int i = 0; i < 20000; ++i) {
    s = rwp_step(s, leg, p, 0.01, room, rng);
    CHECK_NOTHROW(validate(s, room));
  }
}

}  // TEST_SUITE
