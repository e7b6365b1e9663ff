#pragma once

// Rigid transforms, capsule scenes with signed distance queries, ray casting,
// and the convex primitives used for handover objects.

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace handover {

using json = nlohmann::json;
using Eigen::Vector2d;
using Eigen::Vector3d;

// SE(3) pose. Quaternion is kept unit-norm; serialized scalar-first (w,x,y,z).
struct Pose3 {
  Vector3d t{0, 0, 0};
  Eigen::Quaterniond q{1, 0, 0, 0};

  Vector3d apply(const Vector3d& p) const { return q * p + t; }
  Vector3d rotate(const Vector3d& v) const { return q * v; }
};

Pose3 compose(const Pose3& a, const Pose3& b);
Pose3 inverse(const Pose3& p);

// Planar pose for the mobile base. heading wrapped to (-pi, pi].
struct Pose2 {
  double x = 0;
  double y = 0;
  double heading = 0;

  Vector2d apply(const Vector2d& p) const;
};

double wrap_angle(double a);
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& p);
Pose3 lift(const Pose2& p);  // z = 0, yaw = heading

// Rotation helpers shared by planners and losses.
Eigen::Matrix3d rodrigues(const Vector3d& axis_angle);
Vector3d log_rotation(const Eigen::Matrix3d& r);
double geodesic_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);
// d(rodrigues(w) * v)/dw, exact with Taylor fallback near ||w|| = 0.
Eigen::Matrix3d rodrigues_apply_jacobian(const Vector3d& w, const Vector3d& v);

struct Capsule {
  Vector3d a{0, 0, 0};
  Vector3d b{0, 0, 0};  // a == b is a sphere
  double radius = 0;
};

// Hard-min union of capsules. Labels parallel the capsule list and carry
// semantic classes ("body", "hand", ...) through rendering.
struct SdfScene {
  std::vector<Capsule> capsules;
  std::vector<std::string> labels;
};

struct SdfResult {
  double distance = 0;
  Vector3d gradient{0, 0, 1};
  int index = -1;
};

double capsule_sdf(const Capsule& c, const Vector3d& p, Vector3d* grad = nullptr);
// Throws "empty-sdf-scene" on a scene with no capsules. Ties between equal
// distances resolve to the lowest capsule index.
SdfResult scene_sdf(const SdfScene& scene, const Vector3d& p);

struct RayHit {
  double t = 0;
  Vector3d point{0, 0, 0};
  int index = -1;
};

// First hit along origin + t*dir for t in (0, max_range]. dir must be nonzero
// ("degenerate-ray" otherwise); it is normalized internally so t is metric.
std::optional<RayHit> raycast(const SdfScene& scene, const Vector3d& origin,
                              const Vector3d& dir, double max_range);
std::optional<double> ray_capsule(const Capsule& c, const Vector3d& origin,
                                  const Vector3d& unit_dir);

// Convex handover object primitives, local frame at the centroid.
//   box:      dims = half extents
//   cylinder: dims = (radius, half_height, 0), axis +z
//   sphere:   dims = (radius, 0, 0)
struct Shape {
  enum class Kind { box, cylinder, sphere };
  Kind kind = Kind::box;
  Vector3d dims{0.05, 0.05, 0.05};
};

double shape_sdf(const Shape& s, const Vector3d& p_local);
std::optional<double> ray_shape(const Shape& s, const Pose3& pose,
                                const Vector3d& origin, const Vector3d& unit_dir);
// Unsigned clearance between a capsule surface and a posed shape; negative
// values are reported as 0-crossing contact (depth inside the shape is not
// resolved, only that the surfaces intersect).
double capsule_shape_clearance(const Capsule& c, const Shape& s, const Pose3& pose);

double segment_segment_distance(const Vector3d& p1, const Vector3d& q1,
                                const Vector3d& p2, const Vector3d& q2);
// Surface distance; negative = penetration depth.
double capsule_capsule_distance(const Capsule& a, const Capsule& b);

void to_json(json& j, const Pose3& p);
void from_json(const json& j, Pose3& p);
void to_json(json& j, const Pose2& p);
void from_json(const json& j, Pose2& p);
void to_json(json& j, const Capsule& c);
void from_json(const json& j, Capsule& c);
void to_json(json& j, const Shape& s);
void from_json(const json& j, Shape& s);

}  // namespace handover
