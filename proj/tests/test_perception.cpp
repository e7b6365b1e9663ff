#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "handover/perception.hpp"
#include "handover/rng.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace handover;

namespace {

RobotState home_state(const RobotSpec& spec) {
  RobotState s;
  s.arm = Eigen::VectorXd::Zero(spec.arm.dof());
  return s;
}

SdfScene far_scene() {
  SdfScene sc;
  sc.capsules.push_back({Vector3d(100, 100, 0), Vector3d(100, 100, 1), 0.1});
  sc.labels.emplace_back("body");
  return sc;
}

std::vector<Vector3d> sphere_points(int n, double r, const Vector3d& center,
                                    uint64_t seed) {
  auto rng = make_rng(seed);
  std::vector<Vector3d> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vector3d v(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    while (v.norm() < 1e-6)
      v = Vector3d(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    pts.push_back(center + v.normalized() * r);
  }
  return pts;
}

}  // namespace

TEST_CASE("rendered sphere ranges stay within the geometric bound") {
  PerceptionCfg cfg;
  RobotSpec spec = RobotSpec::default_spec();
  RobotState state = home_state(spec);
  RobotFk fk = robot_fk(spec, state);

  // sphere of radius 0.05 centered 1 m down the head camera's optical axis
  Vector3d axis = fk.head_cam.rotate(Vector3d::UnitZ());
  Shape sphere;
  sphere.kind = Shape::Kind::sphere;
  sphere.dims = Vector3d(0.05, 0, 0);
  Pose3 pose;
  pose.t = fk.head_cam.t + axis;

  PointCloud cloud = render_cloud(cfg, spec, state, far_scene(), sphere, pose, 1);
  int object_pts = 0;
  for (size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] != pl_object) continue;
    ++object_pts;
    double range = (cloud.points[i] - fk.head_cam.t).norm();
    CHECK(range >= 0.95 - 1e-9);
    CHECK(range <= 1.0 + 1e-9);
    // every rendered point lies on the sphere surface
    CHECK(std::abs((cloud.points[i] - pose.t).norm() - 0.05) < 1e-9);
  }
  CHECK(object_pts > 10);
}

TEST_CASE("labels follow the capsule classes") {
  PerceptionCfg cfg;
  RobotSpec spec = RobotSpec::default_spec();
  RobotState state = home_state(spec);
  RobotFk fk = robot_fk(spec, state);
  Vector3d axis = fk.head_cam.rotate(Vector3d::UnitZ());

  SdfScene human;
  human.capsules.push_back({fk.head_cam.t + axis * 1.2 + Vector3d(0, 0, -0.4),
                            fk.head_cam.t + axis * 1.2 + Vector3d(0, 0, 0.4),
                            0.12});
  human.labels.emplace_back("body");
  human.capsules.push_back({fk.head_cam.t + axis * 1.0 + Vector3d(0, 0.3, 0),
                            fk.head_cam.t + axis * 1.0 + Vector3d(0, 0.42, 0),
                            0.04});
  human.labels.emplace_back("hand");

  Shape sphere;
  sphere.kind = Shape::Kind::sphere;
  sphere.dims = Vector3d(0.04, 0, 0);
  Pose3 pose;
  pose.t = fk.head_cam.t + axis * 1.0 + Vector3d(0, -0.3, 0);

  PointCloud cloud = render_cloud(cfg, spec, state, human, sphere, pose, 2);
  int body = 0, hand = 0, object = 0;
  for (size_t i = 0; i < cloud.size(); ++i) {
    switch (cloud.labels[i]) {
      case pl_body:
        ++body;
        break;
      case pl_hand:
        ++hand;
        CHECK((cloud.points[i] - human.capsules[1].a).norm() < 0.25);
        break;
      case pl_object:
        ++object;
        CHECK(std::abs((cloud.points[i] - pose.t).norm() - 0.04) < 1e-9);
        break;
      default:
        CHECK(false);
    }
  }
  CHECK(body > 0);
  CHECK(hand > 0);
  CHECK(object > 0);
}

TEST_CASE("own capsules occlude the view") {
  PerceptionCfg cfg;
  RobotSpec spec = RobotSpec::default_spec();
  RobotState state = home_state(spec);

  // object buried inside the robot's column capsule: every ray that would
  // reach it crosses the occluder first
  Shape sphere;
  sphere.kind = Shape::Kind::sphere;
  sphere.dims = Vector3d(0.03, 0, 0);
  Pose3 pose;
  pose.t = Vector3d(0.05, 0, 0.35);

  PointCloud cloud = render_cloud(cfg, spec, state, far_scene(), sphere, pose, 3);
  for (size_t i = 0; i < cloud.size(); ++i)
    CHECK(cloud.labels[i] != pl_object);
}

TEST_CASE("cloud cap downsample is seeded and order preserving") {
  PerceptionCfg cfg;
  RobotSpec spec = RobotSpec::default_spec();
  RobotState state = home_state(spec);
  RobotFk fk = robot_fk(spec, state);
  Vector3d axis = fk.head_cam.rotate(Vector3d::UnitZ());

  // a large capsule fills a big chunk of both frames: pool > cap
  SdfScene human;
  human.capsules.push_back({fk.head_cam.t + axis * 1.5 + Vector3d(0, 0, -0.8),
                            fk.head_cam.t + axis * 1.5 + Vector3d(0, 0, 0.8),
                            0.3});
  human.labels.emplace_back("body");
  Shape sphere;
  sphere.kind = Shape::Kind::sphere;
  sphere.dims = Vector3d(0.01, 0, 0);
  Pose3 pose;
  pose.t = Vector3d(50, 50, 50);

  PointCloud a = render_cloud(cfg, spec, state, human, sphere, pose, 7);
  PointCloud b = render_cloud(cfg, spec, state, human, sphere, pose, 7);
  PointCloud c = render_cloud(cfg, spec, state, human, sphere, pose, 8);
  REQUIRE(a.size() == static_cast<size_t>(cfg.cloud_cap));
  REQUIRE(b.size() == a.size());
  bool identical = true;
  for (size_t i = 0; i < a.size(); ++i)
    if (a.points[i] != b.points[i] || a.labels[i] != b.labels[i])
      identical = false;
  CHECK(identical);
  bool differs = c.size() != a.size();
  for (size_t i = 0; !differs && i < a.size(); ++i)
    if (a.points[i] != c.points[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("grid nearest neighbor matches brute force") {
  PerceptionCfg cfg;
  auto rng = make_rng(41);
  std::vector<Vector3d> pts;
  for (int i = 0; i < 800; ++i)
    pts.emplace_back(uniform(rng, -1, 1), uniform(rng, -1, 1),
                     uniform(rng, -1, 1));
  GridNn grid(cfg.nn_cell, pts);
  for (int i = 0; i < 2000; ++i) {
    Vector3d q(uniform(rng, -1.2, 1.2), uniform(rng, -1.2, 1.2),
               uniform(rng, -1.2, 1.2));
    int got = grid.nearest(q, 10.0);
    int want = oracles::brute_force_nn(pts, q);
    REQUIRE(got >= 0);
    CHECK(std::abs((pts[got] - q).norm() - (pts[want] - q).norm()) < 1e-12);
  }
  // radius cap: far query finds nothing
  CHECK(grid.nearest(Vector3d(50, 0, 0), 1.0) == -1);
}

TEST_CASE("icp recovers an exact rigid transform") {
  PerceptionCfg cfg;
  auto rng = make_rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector3d> src;
    for (int i = 0; i < 200; ++i)
      src.emplace_back(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3),
                       uniform(rng, -0.3, 0.3));
    Vector3d axis(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    axis.normalize();
    double angle = uniform(rng, -0.15, 0.15);
    Pose3 truth;
    truth.q = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
    truth.t = Vector3d(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1),
                       uniform(rng, -0.1, 0.1));
    std::vector<Vector3d> dst;
    for (const auto& p : src) dst.push_back(truth.apply(p));

    IcpResult r = icp_register(cfg, src, dst);
    REQUIRE(!r.degenerate);
    CHECK(r.rms < 1e-6);
    CHECK((r.transform.t - truth.t).norm() < 1e-6);
    CHECK(geodesic_angle(r.transform.q, truth.q) < 1e-6);
    CHECK(r.rms_history.back() <= r.rms_history.front() + 1e-12);
  }
}

TEST_CASE("icp tolerates measurement noise") {
  PerceptionCfg cfg;
  auto rng = make_rng(43);
  std::normal_distribution<double> noise(0.0, 0.002);
  std::vector<double> terr;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector3d> src = sphere_points(300, 0.15, Vector3d(0, 0, 0),
                                              100 + trial);
    Pose3 truth;
    Vector3d axis(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    axis.normalize();
    truth.q = Eigen::Quaterniond(
        Eigen::AngleAxisd(uniform(rng, -0.1, 0.1), axis));
    truth.t = Vector3d(uniform(rng, -0.08, 0.08), uniform(rng, -0.08, 0.08),
                       uniform(rng, -0.08, 0.08));
    std::vector<Vector3d> dst;
    for (const auto& p : src)
      dst.push_back(truth.apply(p) +
                    Vector3d(noise(rng), noise(rng), noise(rng)));
    IcpResult r = icp_register(cfg, src, dst);
    REQUIRE(!r.degenerate);
    terr.push_back((r.transform.t - truth.t).norm());
  }
  std::sort(terr.begin(), terr.end());
  double median = terr[terr.size() / 2];
  MESSAGE("icp median translation error with 2mm noise: " << median);
  CHECK(median < 0.005);
}

TEST_CASE("icp flags degenerate inputs") {
  PerceptionCfg cfg;
  std::vector<Vector3d> two{{0, 0, 0}, {1, 0, 0}};
  std::vector<Vector3d> many = sphere_points(50, 0.1, Vector3d::Zero(), 9);
  CHECK(icp_register(cfg, two, many).degenerate);
  CHECK(icp_register(cfg, many, two).degenerate);
  CHECK(icp_register(cfg, {}, {}).degenerate);
  // far-apart clouds: no correspondences inside the match radius
  std::vector<Vector3d> far;
  for (const auto& p : many) far.push_back(p + Vector3d(10, 0, 0));
  CHECK(icp_register(cfg, many, far).degenerate);
}

TEST_CASE("flow reports per-period displacement") {
  PerceptionCfg cfg;
  Vector3d step(0.075, 0, 0);  // 0.5 m/s for one 0.15 s control period

  PointCloud current;
  current.points = sphere_points(250, 0.12, Vector3d(1, 0, 0.5), 11);
  current.labels.assign(current.points.size(), pl_object);

  SUBCASE("single past frame") {
    PointCloud past;
    for (const auto& p : current.points) past.points.push_back(p - step);
    past.labels = current.labels;
    Pose3 ee;  // identity: EE frame == world
    auto flow = compute_flow(cfg, current, ee, {past});
    REQUIRE(flow.size() == current.size());
    for (const auto& f : flow) {
      CHECK(std::abs(f.x() - 0.075) < 0.015);  // within 20%
      CHECK(f.norm() < 0.075 * 1.2);
      CHECK(f.norm() > 0.075 * 0.8);
    }
  }

  SUBCASE("two past frames normalize by lag") {
    PointCloud p1, p2;  // two and one periods old
    for (const auto& p : current.points) {
      p2.points.push_back(p - 2 * step);
      p1.points.push_back(p - step);
    }
    p1.labels = p2.labels = current.labels;
    Pose3 ee;
    auto flow = compute_flow(cfg, current, ee, {p2, p1});
    for (const auto& f : flow) CHECK(std::abs(f.x() - 0.075) < 0.015);
  }

  SUBCASE("flow lands in the ee frame") {
    PointCloud past;
    for (const auto& p : current.points) past.points.push_back(p - step);
    past.labels = current.labels;
    Pose3 ee;
    ee.q = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Vector3d::UnitZ()));
    auto flow = compute_flow(cfg, current, ee, {past});
    // world +x seen from a frame yawed +90 deg is local -y
    for (const auto& f : flow) {
      CHECK(std::abs(f.y() + 0.075) < 0.015);
      CHECK(std::abs(f.x()) < 0.02);
    }
  }

  SUBCASE("empty history gives zero flow") {
    Pose3 ee;
    auto flow = compute_flow(cfg, current, ee, {});
    for (const auto& f : flow) CHECK(f.norm() == 0.0);
  }
}

TEST_CASE("flow matching is label aware") {
  PerceptionCfg cfg;
  // a dense static body lattice anchors the ego-motion registration at the
  // identity; two sparse clusters (min pair spacing 0.08 > 2x displacement)
  // interpenetrate it while sliding in opposite directions.  with per-label
  // matching every point finds its exact correspondent, so the recovered
  // flows are exact; matching against the nearest point of any label would
  // snap the movers onto the static lattice instead.
  const Vector3d d_obj(-0.03, 0, 0), d_hand(0.03, 0, 0);
  PointCloud current, past;
  for (int ix = 0; ix < 14; ++ix)
    for (int iy = 0; iy < 11; ++iy)
      for (int iz = 0; iz < 11; ++iz) {
        Vector3d p(-0.05 + 0.03 * ix, -0.15 + 0.03 * iy, 0.85 + 0.03 * iz);
        current.points.push_back(p);
        current.labels.push_back(pl_body);
        past.points.push_back(p);
        past.labels.push_back(pl_body);
      }
  auto add_cluster = [&](const Vector3d& center, const Vector3d& step,
                         PointLabel label) {
    for (int ix = 0; ix < 3; ++ix)
      for (int iy = 0; iy < 3; ++iy)
        for (int iz = 0; iz < 3; ++iz) {
          Vector3d p = center + Vector3d(0.08 * (ix - 1), 0.08 * (iy - 1),
                                         0.08 * (iz - 1));
          current.points.push_back(p);
          current.labels.push_back(label);
          past.points.push_back(p - step);
          past.labels.push_back(label);
        }
  };
  add_cluster(Vector3d(0.15, 0.05, 1.0), d_obj, pl_object);
  add_cluster(Vector3d(0.15, -0.05, 1.0), d_hand, pl_hand);

  Pose3 ee;
  auto flow = compute_flow(cfg, current, ee, {past});
  REQUIRE(flow.size() == current.size());
  int bad = 0;
  for (size_t i = 0; i < current.size(); ++i) {
    Vector3d want = Vector3d::Zero();
    if (current.labels[i] == pl_object) want = d_obj;
    if (current.labels[i] == pl_hand) want = d_hand;
    if ((flow[i] - want).norm() > 1e-9) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("point cloud json round trip") {
  PointCloud c;
  c.points = sphere_points(20, 0.1, Vector3d(1, 2, 3), 31);
  c.labels.assign(20, pl_hand);
  json j;
  to_json(j, c);
  PointCloud back;
  from_json(j, back);
  REQUIRE(back.size() == c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    CHECK((back.points[i] - c.points[i]).norm() == 0.0);
    CHECK(back.labels[i] == c.labels[i]);
  }
}
