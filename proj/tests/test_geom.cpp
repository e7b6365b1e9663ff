#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "handover/geom.hpp"
#include "oracles.hpp"

#include <cstring>
#include <random>

using namespace handover;

TEST_CASE("pose compose matches homogeneous matrix product") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose3 a = oracles::random_pose(rng);
    const Pose3 b = oracles::random_pose(rng);
    const Pose3 c = compose(a, b);
    const Eigen::Matrix4d m = oracles::pose_to_matrix(a) * oracles::pose_to_matrix(b);
    CHECK((oracles::pose_to_matrix(c) - m).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(c.q.norm() - 1.0) < 1e-9);

    const Pose3 id = compose(c, inverse(c));
    CHECK(id.t.norm() < 1e-10);
    CHECK(geodesic_angle(id.q, Eigen::Quaterniond::Identity()) < 1e-10);
  }
}

TEST_CASE("pose2 compose wraps heading into (-pi, pi]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const Pose2 a{u(rng), u(rng), u(rng)};
    const Pose2 b{u(rng), u(rng), u(rng)};
    const Pose2 c = compose(a, b);
    CHECK(c.heading > -M_PI);
    CHECK(c.heading <= M_PI);
    // Same composition through SE(3).
    const Pose3 l = compose(lift({a.x, a.y, wrap_angle(a.heading)}),
                            lift({b.x, b.y, wrap_angle(b.heading)}));
    CHECK(std::abs(l.t.x() - c.x) < 1e-10);
    CHECK(std::abs(l.t.y() - c.y) < 1e-10);

    const Pose2 id = compose(a, inverse(a));
    CHECK(std::abs(id.x) < 1e-9);
    CHECK(std::abs(id.y) < 1e-9);
    CHECK(std::abs(id.heading) < 1e-9);
  }
}

TEST_CASE("capsule sdf closed form") {
  Capsule c{{0, 0, 0}, {0, 0, 1}, 0.1};
  Vector3d grad;
  const double d = capsule_sdf(c, {0.5, 0, 0.5}, &grad);
  CHECK(d == doctest::Approx(0.4).epsilon(1e-12));
  CHECK((grad - Vector3d(1, 0, 0)).norm() < 1e-12);

  // beyond an endpoint: sphere distance
  const double d2 = capsule_sdf(c, {0, 0, 1.5}, &grad);
  CHECK(d2 == doctest::Approx(0.4).epsilon(1e-12));
  CHECK((grad - Vector3d(0, 0, 1)).norm() < 1e-12);

  // interior point: negative
  CHECK(capsule_sdf(c, {0.05, 0, 0.5}) == doctest::Approx(-0.05).epsilon(1e-12));
}

namespace {

SdfScene random_scene(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> r(0.03, 0.2);
  SdfScene s;
  for (int i = 0; i < n; ++i) {
    Capsule c;
    c.a = {u(rng), u(rng), u(rng)};
    c.b = {u(rng), u(rng), u(rng)};
    c.radius = r(rng);
    s.capsules.push_back(c);
    s.labels.push_back("body");
  }
  return s;
}

// Distance from p to the segment axis of the closest capsule, and the margin
// between best and second-best capsule distance. Used to skip points where
// the hard min or the axis makes the gradient non-smooth.
double tie_margin(const SdfScene& s, const Vector3d& p) {
  double best = 1e300, second = 1e300;
  for (const auto& c : s.capsules) {
    const double d = capsule_sdf(c, p);
    if (d < best) {
      second = best;
      best = d;
    } else if (d < second) {
      second = d;
    }
  }
  return second - best;
}

}  // namespace

TEST_CASE("scene sdf gradient matches central differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  SdfScene scene = random_scene(rng, 4);

  auto f = [&](const Vector3d& p) { return scene_sdf(scene, p).distance; };
  int checked = 0;
  double max_rel = 0.0;
  while (checked < 1000) {
    const Vector3d p{u(rng), u(rng), u(rng)};
    const SdfResult res = scene_sdf(scene, p);
    if (std::abs(res.distance) < 1e-3) continue;                  // near surface
    if (tie_margin(scene, p) < 1e-3) continue;                    // near hard-min seam
    const auto& c = scene.capsules[res.index];
    if (res.distance + c.radius < 1e-3) continue;                 // near the axis
    const Vector3d fd = oracles::fd_gradient(f, p);
    max_rel = std::max(max_rel, (res.gradient - fd).norm() / fd.norm());
    CHECK(std::abs(res.gradient.norm() - 1.0) < 1e-6);
    ++checked;
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("scene sdf hard-min tie resolves to lowest index") {
  SdfScene s;
  s.capsules.push_back({{-1, 0, 0}, {-1, 0, 0}, 0.1});
  s.capsules.push_back({{1, 0, 0}, {1, 0, 0}, 0.1});
  s.labels = {"a", "b"};
  CHECK(scene_sdf(s, {0, 0, 0}).index == 0);
  CHECK_THROWS_WITH(scene_sdf(SdfScene{}, {0, 0, 0}), "empty-sdf-scene");
}

TEST_CASE("raycast hits at closed-form distances") {
  SdfScene s;
  s.capsules.push_back({{0, 0, 0}, {0, 0, 1}, 0.1});
  s.labels = {"body"};

  // Perpendicular shot at the cylinder wall from 1 m.
  auto hit = raycast(s, {1.0, 0, 0.5}, {-1, 0, 0}, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->t == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(hit->index == 0);

  // Axial shot at the end cap sphere from 1 m above the segment end.
  hit = raycast(s, {0, 0, 2.0}, {0, 0, -1}, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->t == doctest::Approx(0.9).epsilon(1e-9));

  // Direction is normalized internally, t stays metric.
  hit = raycast(s, {1.0, 0, 0.5}, {-7, 0, 0}, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->t == doctest::Approx(0.9).epsilon(1e-9));

  CHECK(!raycast(s, {1.0, 0, 0.5}, {-1, 0, 0}, 0.5).has_value());
  CHECK(!raycast(s, {1.0, 0, 0.5}, {1, 0, 0}, 10.0).has_value());
  CHECK_THROWS_WITH((void)raycast(s, {0, 0, 0}, {0, 0, 0}, 1.0), "degenerate-ray");
}

TEST_CASE("raycast distance never decreases when capsules are removed") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    SdfScene scene = random_scene(rng, 6);
    const Vector3d origin{u(rng), u(rng), u(rng)};
    Vector3d dir{u(rng), u(rng), u(rng)};
    if (dir.norm() < 1e-6) dir = {1, 0, 0};
    const auto full = raycast(scene, origin, dir, 20.0);

    SdfScene reduced;
    for (int i = 0; i < 6; ++i) {
      if (rng() % 2 == 0) {
        reduced.capsules.push_back(scene.capsules[i]);
        reduced.labels.push_back(scene.labels[i]);
      }
    }
    if (reduced.capsules.empty()) continue;
    const auto sub = raycast(reduced, origin, dir, 20.0);
    if (sub.has_value()) {
      REQUIRE(full.has_value());
      CHECK(full->t <= sub->t + 1e-12);
    }
  }
}

TEST_CASE("pose3 json round trip is bit stable") {
  std::mt19937_64 rng(19);
  for (int i = 0; i < 200; ++i) {
    const Pose3 p = oracles::random_pose(rng, 100.0);
    json j = p;
    const Pose3 r = j.get<Pose3>();
    CHECK(std::memcmp(p.t.data(), r.t.data(), 3 * sizeof(double)) == 0);
    CHECK(std::memcmp(p.q.coeffs().data(), r.q.coeffs().data(), 4 * sizeof(double)) == 0);
    // ...and through a full text round trip
    const json j2 = json::parse(j.dump());
    const Pose3 r2 = j2.get<Pose3>();
    CHECK(std::memcmp(p.t.data(), r2.t.data(), 3 * sizeof(double)) == 0);
    CHECK(std::memcmp(p.q.coeffs().data(), r2.q.coeffs().data(), 4 * sizeof(double)) == 0);
  }
}

TEST_CASE("rotation helpers") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vector3d w{n(rng), n(rng), n(rng)};
    const Eigen::Matrix3d r = rodrigues(w);
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    const Vector3d back = log_rotation(r);
    CHECK((rodrigues(back) - r).norm() < 1e-10);
  }

  // d(R(w) v)/dw against central differences
  for (int i = 0; i < 100; ++i) {
    const Vector3d w = Vector3d{n(rng), n(rng), n(rng)} * (i < 50 ? 1.0 : 1e-6);
    const Vector3d v{n(rng), n(rng), n(rng)};
    const Eigen::Matrix3d jac = rodrigues_apply_jacobian(w, v);
    for (int k = 0; k < 3; ++k) {
      Vector3d hi = w, lo = w;
      hi[k] += 1e-6;
      lo[k] -= 1e-6;
      const Vector3d fd = (rodrigues(hi) * v - rodrigues(lo) * v) / 2e-6;
      CHECK((jac.col(k) - fd).norm() < 1e-6 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("shape ray intersections") {
  Shape sphere{Shape::Kind::sphere, {0.05, 0, 0}};
  Pose3 pose;
  pose.t = {1.0, 0, 0};
  auto t = ray_shape(sphere, pose, {0, 0, 0}, {1, 0, 0});
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.95).epsilon(1e-12));

  Shape box{Shape::Kind::box, {0.1, 0.2, 0.3}};
  t = ray_shape(box, pose, {0, 0, 0}, {1, 0, 0});
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.9).epsilon(1e-12));

  Shape cyl{Shape::Kind::cylinder, {0.1, 0.25, 0}};
  t = ray_shape(cyl, pose, {0, 0, 0}, {1, 0, 0});
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.9).epsilon(1e-12));
  // through the top cap
  t = ray_shape(cyl, pose, {1.0, 0, 1.0}, {0, 0, -1});
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(!ray_shape(cyl, pose, {1.0, 0.2, 1.0}, {0, 0, -1}).has_value());
}

TEST_CASE("shape sdf and capsule clearance") {
  Shape box{Shape::Kind::box, {0.1, 0.1, 0.1}};
  CHECK(shape_sdf(box, {0.3, 0, 0}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(shape_sdf(box, {0, 0, 0}) == doctest::Approx(-0.1).epsilon(1e-12));

  Shape sphere{Shape::Kind::sphere, {0.05, 0, 0}};
  Pose3 pose;
  pose.t = {0, 0, 1.0};
  // capsule axis passes 0.5 m under the sphere center
  Capsule c{{-1, 0, 0.5}, {1, 0, 0.5}, 0.1};
  CHECK(capsule_shape_clearance(c, sphere, pose) == doctest::Approx(0.35).epsilon(1e-6));
  // overlapping
  Capsule c2{{-1, 0, 0.97}, {1, 0, 0.97}, 0.1};
  CHECK(capsule_shape_clearance(c2, sphere, pose) < 0.0);
}

TEST_CASE("segment distances") {
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {1, 0, 1}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // crossing perpendicular segments
  CHECK(segment_segment_distance({-1, 0, 0}, {1, 0, 0}, {0, -1, 0.5}, {0, 1, 0.5}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // endpoint to endpoint
  CHECK(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {3, 0, 0}, {4, 0, 0}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // penetration depth is negative surface distance
  Capsule a{{-1, 0, 0}, {1, 0, 0}, 0.3};
  Capsule b{{-1, 0, 0.5}, {1, 0, 0.5}, 0.3};
  CHECK(capsule_capsule_distance(a, b) == doctest::Approx(-0.1).epsilon(1e-12));
}
