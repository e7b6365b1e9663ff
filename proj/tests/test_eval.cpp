#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "handover/eval.hpp"
#include "handover/rng.hpp"

#include <cmath>

using namespace handover;

namespace {

Outcome make(OutcomeKind k, double t_end) {
  Outcome o;
  o.kind = k;
  o.t_end = t_end;
  o.execution_time = t_end;
  return o;
}

// midpoint Riemann integral of the time-truncated success step function
double riemann_as(const std::vector<Outcome>& outcomes, double t_max, int bins) {
  double acc = 0;
  const double n = static_cast<double>(outcomes.size());
  for (int b = 0; b < bins; ++b) {
    double t = (b + 0.5) / bins;
    int count = 0;
    for (const Outcome& o : outcomes)
      if (o.kind == OutcomeKind::success && o.t_end <= t * t_max) ++count;
    acc += count / n;
  }
  return acc / bins;
}

SdfScene far_human() {
  SdfScene s;
  s.capsules.push_back({Vector3d(10, 0, 0), Vector3d(10, 0, 1.5), 0.2});
  s.labels.emplace_back("body");
  return s;
}

}  // namespace

TEST_CASE("average success worked example") {
  std::vector<Outcome> o{make(OutcomeKind::success, 3.0),
                         make(OutcomeKind::success, 7.5),
                         make(OutcomeKind::timeout, 15.0)};
  double as = average_success(o, 15.0);
  CHECK(as == doctest::Approx(((1 - 0.2) + (1 - 0.5)) / 3).epsilon(1e-12));
  CHECK(std::abs(as - riemann_as(o, 15.0, 1000000)) < 1e-6);
}

TEST_CASE("average success boundaries and errors") {
  CHECK(average_success({make(OutcomeKind::success, 0.0)}, 15.0) == 1.0);
  std::vector<Outcome> fails{make(OutcomeKind::timeout, 15.0),
                             make(OutcomeKind::human_contact, 4.0)};
  CHECK(average_success(fails, 15.0) == 0.0);
  CHECK_THROWS_WITH(average_success({}, 15.0), "no-outcomes");
}

TEST_CASE("average success equals the binned integral on random sets") {
  auto rng = make_rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Outcome> outcomes;
    int n = uniform_int(rng, 1, 30);
    for (int i = 0; i < n; ++i) {
      double r = uniform(rng, 0, 1);
      OutcomeKind k = r < 0.5   ? OutcomeKind::success
                      : r < 0.7 ? OutcomeKind::timeout
                      : r < 0.85 ? OutcomeKind::human_contact
                                 : OutcomeKind::object_drop;
      double t = k == OutcomeKind::timeout ? 15.0 : uniform(rng, 0, 15.0);
      outcomes.push_back(make(k, t));
    }
    double as = average_success(outcomes, 15.0);
    CHECK(std::abs(as - riemann_as(outcomes, 15.0, 200000)) < 5e-6);
    // AS never exceeds the plain success rate
    double sr = 0;
    for (const Outcome& o : outcomes)
      if (o.kind == OutcomeKind::success) sr += 1.0 / n;
    CHECK(as <= sr + 1e-12);
  }
}

TEST_CASE("judge step outcomes") {
  RobotSpec spec = RobotSpec::default_spec();
  EvalCfg cfg;
  RobotState state;
  state.arm = spec.arm.rest;
  RobotFk fk = robot_fk(spec, state);

  Shape box;
  box.kind = Shape::Kind::box;
  box.dims = Vector3d(0.03, 0.03, 0.03);

  SUBCASE("timeout when nothing happens") {
    Pose3 obj;
    obj.t = Vector3d(5, 5, 1);
    auto r = judge_step(spec, cfg, 15.0, state, far_human(), box, obj, {Pose3{}},
                        15.0);
    REQUIRE(r.done);
    CHECK(r.outcome.kind == OutcomeKind::timeout);
    CHECK(r.outcome.t_end == 15.0);
    // not before the horizon
    CHECK(!judge_step(spec, cfg, 15.0, state, far_human(), box, obj, {Pose3{}},
                      14.85)
               .done);
    // past-horizon call still clamps t_end
    auto late = judge_step(spec, cfg, 15.0, state, far_human(), box, obj,
                           {Pose3{}}, 15.3);
    CHECK(late.outcome.t_end == 15.0);
  }

  SUBCASE("grasp alignment succeeds and reports the grasp") {
    // object primitive parked well above the robot; grasp #1 maps it onto
    // the current EE pose
    Pose3 grasp0;
    grasp0.t = Vector3d(0, 0, 5);  // decoy, far away
    Vector3d safe = fk.ee.t + Vector3d(0, 0, 0.8);
    Pose3 grasp1;
    grasp1.t = fk.ee.q.conjugate() * (fk.ee.t - safe);
    Pose3 obj = compose(fk.ee, inverse(grasp1));  // obj.t == safe
    REQUIRE((obj.t - safe).norm() < 1e-12);
    Shape pebble;
    pebble.kind = Shape::Kind::sphere;
    pebble.dims = Vector3d(0.001, 0, 0);
    auto r = judge_step(spec, cfg, 15.0, state, far_human(), pebble, obj,
                        {grasp0, grasp1}, 1.0);
    REQUIRE(r.done);
    CHECK(r.outcome.kind == OutcomeKind::success);
    CHECK(r.grasp_index == 1);
    CHECK(r.outcome.t_end == 1.0);

    // slightly outside the tolerances: no success, and the primitive is far
    // from the robot so the episode just continues
    Pose3 shifted = obj;
    shifted.t += Vector3d(cfg.grasp_pos_tol + 0.002, 0, 0);
    CHECK(!judge_step(spec, cfg, 15.0, state, far_human(), pebble, shifted,
                      {grasp0, grasp1}, 1.0)
               .done);
    // closed gripper never re-triggers success
    RobotState closed = state;
    closed.gripper_closed = true;
    CHECK(!judge_step(spec, cfg, 15.0, closed, far_human(), pebble, obj,
                      {grasp0, grasp1}, 1.0)
               .done);
    // a near-miss that still touches the object is a drop: put the object
    // origin right at the EE (inside the gripper capsule), grasps elsewhere
    Pose3 ram;
    ram.t = fk.ee.t;
    auto miss = judge_step(spec, cfg, 15.0, state, far_human(), pebble, ram,
                           {grasp0}, 1.0);
    REQUIRE(miss.done);
    CHECK(miss.outcome.kind == OutcomeKind::object_drop);
  }

  SUBCASE("human contact dominates everything") {
    SdfScene human;
    human.capsules.push_back(
        {Vector3d(0, 0, 0.3), Vector3d(0, 0, 1.0), 0.2});  // through the column
    human.labels.emplace_back("body");
    Pose3 grasp;  // aligned grasp at the same time
    Pose3 obj = compose(fk.ee, inverse(grasp));
    Shape pebble;
    pebble.kind = Shape::Kind::sphere;
    pebble.dims = Vector3d(0.001, 0, 0);
    auto r =
        judge_step(spec, cfg, 15.0, state, human, pebble, obj, {grasp}, 2.0);
    REQUIRE(r.done);
    CHECK(r.outcome.kind == OutcomeKind::human_contact);
  }

  SUBCASE("object contact without alignment is a drop") {
    Shape big;
    big.kind = Shape::Kind::sphere;
    big.dims = Vector3d(0.05, 0, 0);
    Pose3 obj;
    obj.t = fk.ee.t;  // sitting on the gripper, but grasps point elsewhere
    Pose3 far_grasp;
    far_grasp.t = Vector3d(0, 0, 9);
    auto r = judge_step(spec, cfg, 15.0, state, far_human(), big, obj,
                        {far_grasp}, 2.0);
    REQUIRE(r.done);
    CHECK(r.outcome.kind == OutcomeKind::object_drop);
  }
}

TEST_CASE("aggregate report") {
  EvalCfg cfg;
  std::vector<Outcome> outcomes;
  for (int i = 0; i < 6; ++i) outcomes.push_back(make(OutcomeKind::success, 2.0 + i));
  for (int i = 0; i < 2; ++i) outcomes.push_back(make(OutcomeKind::human_contact, 1.0));
  outcomes.push_back(make(OutcomeKind::object_drop, 3.0));
  outcomes.push_back(make(OutcomeKind::timeout, 15.0));
  for (auto& o : outcomes) o.inference_time = 0.5;

  Report r = aggregate(outcomes, 15.0, cfg, "cfg-digest");
  CHECK(r.n == 10);
  CHECK(r.success_rate == doctest::Approx(0.6));
  CHECK(r.contact == doctest::Approx(0.2));
  CHECK(r.drop == doctest::Approx(0.1));
  CHECK(r.timeout == doctest::Approx(0.1));
  CHECK(r.success_rate + r.contact + r.drop + r.timeout == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.as == doctest::Approx(average_success(outcomes, 15.0)));
  double want_time = 0;
  for (const auto& o : outcomes) want_time += (o.inference_time + o.t_end) / 10;
  CHECK(r.mean_time_s == doctest::Approx(want_time));
  CHECK(r.grasp_pos_tol == cfg.grasp_pos_tol);
  CHECK(r.config_digest == "cfg-digest");
  CHECK_THROWS_WITH(aggregate({}, 15.0, cfg, ""), "no-outcomes");

  // json round trip
  Report back = Report::from_json(r.to_json());
  CHECK(back.n == r.n);
  CHECK(back.as == r.as);
  CHECK(back.config_digest == r.config_digest);
}

TEST_CASE("report digest ignores wall clock but sees outcomes") {
  EvalCfg cfg;
  std::vector<Outcome> a{make(OutcomeKind::success, 3.0),
                         make(OutcomeKind::timeout, 15.0)};
  Report ra = aggregate(a, 15.0, cfg, "d");
  std::vector<Outcome> b = a;
  b[0].inference_time = 99.0;
  Report rb = aggregate(b, 15.0, cfg, "d");
  CHECK(report_digest(ra, a) == report_digest(rb, b));

  std::vector<Outcome> c = a;
  c[0].t_end = 4.0;
  Report rc = aggregate(c, 15.0, cfg, "d");
  CHECK(report_digest(ra, a) != report_digest(rc, c));
}

TEST_CASE("success curve csv") {
  std::vector<Outcome> outcomes{make(OutcomeKind::success, 3.0),
                                make(OutcomeKind::success, 7.5),
                                make(OutcomeKind::timeout, 15.0)};
  std::string csv = success_curve_csv(outcomes, 15.0);
  // header + 100 rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
  CHECK(csv.rfind("t_frac,success_rate\n", 0) == 0);
  // curve is nondecreasing and ends at the success rate
  double prev = -1;
  size_t pos = csv.find('\n') + 1;
  double last = 0;
  while (pos < csv.size()) {
    size_t comma = csv.find(',', pos);
    size_t eol = csv.find('\n', pos);
    double v = std::stod(csv.substr(comma + 1, eol - comma - 1));
    CHECK(v >= prev);
    prev = v;
    last = v;
    pos = eol + 1;
  }
  CHECK(last == doctest::Approx(2.0 / 3.0));
  // value at t=0.2 (3.0/15.0): success at exactly 3.0 counts
  CHECK(csv.find("0.20,0.333333") != std::string::npos);
}
