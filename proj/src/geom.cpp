#include "handover/geom.hpp"

#include <cmath>
#include <stdexcept>

namespace handover {

Pose3 compose(const Pose3& a, const Pose3& b) {
  Pose3 out;
  out.t = a.t + a.q * b.t;
  out.q = (a.q * b.q).normalized();
  return out;
}

Pose3 inverse(const Pose3& p) {
  Pose3 out;
  out.q = p.q.conjugate();
  out.t = -(out.q * p.t);
  return out;
}

double wrap_angle(double a) {
  double r = std::fmod(a + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;
}

Vector2d Pose2::apply(const Vector2d& p) const {
  const double c = std::cos(heading), s = std::sin(heading);
  return {x + c * p.x() - s * p.y(), y + s * p.x() + c * p.y()};
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const Vector2d p = a.apply({b.x, b.y});
  return {p.x(), p.y(), wrap_angle(a.heading + b.heading)};
}

Pose2 inverse(const Pose2& p) {
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  return {-(c * p.x + s * p.y), s * p.x - c * p.y, wrap_angle(-p.heading)};
}

Pose3 lift(const Pose2& p) {
  Pose3 out;
  out.t = {p.x, p.y, 0.0};
  out.q = Eigen::Quaterniond(Eigen::AngleAxisd(p.heading, Vector3d::UnitZ()));
  return out;
}

Eigen::Matrix3d rodrigues(const Vector3d& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 1) = -w.z(); k(0, 2) = w.y();
    k(1, 0) = w.z();  k(1, 2) = -w.x();
    k(2, 0) = -w.y(); k(2, 1) = w.x();
    return k;
  }
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

Vector3d log_rotation(const Eigen::Matrix3d& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

double geodesic_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return a.angularDistance(b);
}

namespace {

Eigen::Matrix3d skew(const Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

Eigen::Matrix3d rodrigues_apply_jacobian(const Vector3d& w, const Vector3d& v) {
  // d(exp(w^) v)/dw = -R [v]^ Jr(w), Jr the right Jacobian of SO(3).
  const double theta = w.norm();
  double c1, c2;  // (1-cos)/t^2 and (t-sin)/t^3
  if (theta < 1e-5) {
    const double t2 = theta * theta;
    c1 = 0.5 - t2 / 24.0;
    c2 = 1.0 / 6.0 - t2 / 120.0;
  } else {
    c1 = (1.0 - std::cos(theta)) / (theta * theta);
    c2 = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  const Eigen::Matrix3d wx = skew(w);
  const Eigen::Matrix3d jr = Eigen::Matrix3d::Identity() - c1 * wx + c2 * wx * wx;
  return -rodrigues(w) * skew(v) * jr;
}

double capsule_sdf(const Capsule& c, const Vector3d& p, Vector3d* grad) {
  const Vector3d ab = c.b - c.a;
  const double len2 = ab.squaredNorm();
  double h = 0.0;
  if (len2 > 0.0) h = std::clamp((p - c.a).dot(ab) / len2, 0.0, 1.0);
  const Vector3d closest = c.a + h * ab;
  const Vector3d d = p - closest;
  const double n = d.norm();
  if (grad) {
    // On the axis the direction is undefined; pick a fixed unit fallback.
    *grad = (n > 1e-12) ? Vector3d(d / n) : Vector3d(0, 0, 1);
  }
  return n - c.radius;
}

SdfResult scene_sdf(const SdfScene& scene, const Vector3d& p) {
  if (scene.capsules.empty()) throw std::runtime_error("empty-sdf-scene");
  SdfResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(scene.capsules.size()); ++i) {
    Vector3d g;
    const double d = capsule_sdf(scene.capsules[i], p, &g);
    if (d < best.distance) {
      best.distance = d;
      best.gradient = g;
      best.index = i;
    }
  }
  return best;
}

std::optional<double> ray_capsule(const Capsule& c, const Vector3d& ro,
                                  const Vector3d& rd) {
  const Vector3d ba = c.b - c.a;
  const Vector3d oa = ro - c.a;
  const double baba = ba.dot(ba);

  auto sphere_hit = [&](const Vector3d& center) -> std::optional<double> {
    const Vector3d oc = ro - center;
    const double b = rd.dot(oc);
    const double cc = oc.dot(oc) - c.radius * c.radius;
    const double h = b * b - cc;
    if (h < 0.0) return std::nullopt;
    const double sq = std::sqrt(h);
    const double t0 = -b - sq;
    if (t0 > 1e-12) return t0;
    const double t1 = -b + sq;
    if (t1 > 1e-12) return t1;
    return std::nullopt;
  };

  if (baba < 1e-24) return sphere_hit(c.a);

  const double bard = ba.dot(rd);
  const double baoa = ba.dot(oa);
  const double rdoa = rd.dot(oa);
  const double oaoa = oa.dot(oa);
  const double a = baba - bard * bard;
  const double b = baba * rdoa - baoa * bard;
  const double cc = baba * oaoa - baoa * baoa - c.radius * c.radius * baba;

  std::optional<double> best;
  auto consider = [&](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };

  if (a > 1e-12) {
    const double h = b * b - a * cc;
    if (h >= 0.0) {
      const double sq = std::sqrt(h);
      for (const double t : {(-b - sq) / a, (-b + sq) / a}) {
        if (t > 1e-12) {
          const double y = baoa + t * bard;
          if (y > 0.0 && y < baba) {
            consider(t);
            break;  // nearest valid cylinder-body root
          }
        }
      }
    }
  }
  consider(sphere_hit(c.a));
  consider(sphere_hit(c.b));
  return best;
}

std::optional<RayHit> raycast(const SdfScene& scene, const Vector3d& origin,
                              const Vector3d& dir, double max_range) {
  if (scene.capsules.empty()) throw std::runtime_error("empty-sdf-scene");
  const double n = dir.norm();
  if (n < 1e-12) throw std::runtime_error("degenerate-ray");
  const Vector3d u = dir / n;

  std::optional<RayHit> best;
  for (int i = 0; i < static_cast<int>(scene.capsules.size()); ++i) {
    const auto t = ray_capsule(scene.capsules[i], origin, u);
    if (t && *t <= max_range && (!best || *t < best->t)) {
      best = RayHit{*t, origin + *t * u, i};
    }
  }
  return best;
}

double shape_sdf(const Shape& s, const Vector3d& p) {
  switch (s.kind) {
    case Shape::Kind::sphere:
      return p.norm() - s.dims.x();
    case Shape::Kind::box: {
      const Vector3d q = p.cwiseAbs() - s.dims;
      const double outside = q.cwiseMax(0.0).norm();
      const double inside = std::min(q.maxCoeff(), 0.0);
      return outside + inside;
    }
    case Shape::Kind::cylinder: {
      const double dr = std::hypot(p.x(), p.y()) - s.dims.x();
      const double dz = std::abs(p.z()) - s.dims.y();
      const double outside = Vector2d(std::max(dr, 0.0), std::max(dz, 0.0)).norm();
      const double inside = std::min(std::max(dr, dz), 0.0);
      return outside + inside;
    }
  }
  return 0.0;
}

namespace {

std::optional<double> pick_entry(double t0, double t1) {
  if (t1 < t0) std::swap(t0, t1);
  if (t0 > 1e-12) return t0;
  if (t1 > 1e-12) return t1;
  return std::nullopt;
}

}  // namespace

std::optional<double> ray_shape(const Shape& s, const Pose3& pose,
                                const Vector3d& origin, const Vector3d& unit_dir) {
  const Pose3 inv = inverse(pose);
  const Vector3d o = inv.apply(origin);
  const Vector3d d = inv.rotate(unit_dir);

  switch (s.kind) {
    case Shape::Kind::sphere: {
      const double b = d.dot(o);
      const double c = o.dot(o) - s.dims.x() * s.dims.x();
      const double h = b * b - c;
      if (h < 0.0) return std::nullopt;
      return pick_entry(-b - std::sqrt(h), -b + std::sqrt(h));
    }
    case Shape::Kind::box: {
      double tmin = -std::numeric_limits<double>::infinity();
      double tmax = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-12) {
          if (std::abs(o[i]) > s.dims[i]) return std::nullopt;
          continue;
        }
        double t0 = (-s.dims[i] - o[i]) / d[i];
        double t1 = (s.dims[i] - o[i]) / d[i];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
      }
      if (tmax < tmin) return std::nullopt;
      return pick_entry(tmin, tmax);
    }
    case Shape::Kind::cylinder: {
      const double r = s.dims.x(), hh = s.dims.y();
      std::optional<double> best;
      auto consider = [&](double t) {
        if (t > 1e-12 && (!best || t < *best)) best = t;
      };
      const double a = d.x() * d.x() + d.y() * d.y();
      if (a > 1e-12) {
        const double b = o.x() * d.x() + o.y() * d.y();
        const double c = o.x() * o.x() + o.y() * o.y() - r * r;
        const double h = b * b - a * c;
        if (h >= 0.0) {
          const double sq = std::sqrt(h);
          for (const double t : {(-b - sq) / a, (-b + sq) / a}) {
            if (t > 1e-12 && std::abs(o.z() + t * d.z()) <= hh) consider(t);
          }
        }
      }
      if (std::abs(d.z()) > 1e-12) {
        for (const double zc : {-hh, hh}) {
          const double t = (zc - o.z()) / d.z();
          if (t > 1e-12) {
            const double px = o.x() + t * d.x(), py = o.y() + t * d.y();
            if (px * px + py * py <= r * r) consider(t);
          }
        }
      }
      return best;
    }
  }
  return std::nullopt;
}

double capsule_shape_clearance(const Capsule& c, const Shape& s, const Pose3& pose) {
  const Pose3 inv = inverse(pose);
  // Unsigned distance from shape along the capsule axis is convex: coarse
  // scan to bracket, then ternary refinement.
  auto u = [&](double h) {
    const Vector3d p = c.a + h * (c.b - c.a);
    return std::max(shape_sdf(s, inv.apply(p)), 0.0);
  };
  const int kScan = 64;
  int best_i = 0;
  double best_v = u(0.0);
  for (int i = 1; i <= kScan; ++i) {
    const double v = u(double(i) / kScan);
    if (v < best_v) {
      best_v = v;
      best_i = i;
    }
  }
  double lo = std::max(0.0, (best_i - 1.0) / kScan);
  double hi = std::min(1.0, (best_i + 1.0) / kScan);
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (u(m1) <= u(m2)) hi = m2; else lo = m1;
  }
  return u(0.5 * (lo + hi)) - c.radius;
}

double segment_segment_distance(const Vector3d& p1, const Vector3d& q1,
                                const Vector3d& p2, const Vector3d& q2) {
  // Ericson, Real-Time Collision Detection, closest points of two segments.
  const Vector3d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  constexpr double kEps = 1e-12;
  if (a <= kEps && e <= kEps) {
    return r.norm();
  } else if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > kEps) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

double capsule_capsule_distance(const Capsule& a, const Capsule& b) {
  return segment_segment_distance(a.a, a.b, b.a, b.b) - a.radius - b.radius;
}

void to_json(json& j, const Pose3& p) {
  j = json{{"t", {p.t.x(), p.t.y(), p.t.z()}},
           {"q", {p.q.w(), p.q.x(), p.q.y(), p.q.z()}}};
}

void from_json(const json& j, Pose3& p) {
  const auto& t = j.at("t");
  p.t = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  const auto& q = j.at("q");
  p.q = Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                           q[2].get<double>(), q[3].get<double>());
}

void to_json(json& j, const Pose2& p) {
  j = json{{"x", p.x}, {"y", p.y}, {"heading", p.heading}};
}

void from_json(const json& j, Pose2& p) {
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.heading = j.at("heading").get<double>();
}

void to_json(json& j, const Capsule& c) {
  j = json{{"a", {c.a.x(), c.a.y(), c.a.z()}},
           {"b", {c.b.x(), c.b.y(), c.b.z()}},
           {"radius", c.radius}};
}

void from_json(const json& j, Capsule& c) {
  const auto& a = j.at("a");
  c.a = {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
  const auto& b = j.at("b");
  c.b = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
  c.radius = j.at("radius").get<double>();
}

void to_json(json& j, const Shape& s) {
  static const char* names[] = {"box", "cylinder", "sphere"};
  j = json{{"kind", names[static_cast<int>(s.kind)]},
           {"dims", {s.dims.x(), s.dims.y(), s.dims.z()}}};
}

void from_json(const json& j, Shape& s) {
  const std::string k = j.at("kind").get<std::string>();
  if (k == "box") s.kind = Shape::Kind::box;
  else if (k == "cylinder") s.kind = Shape::Kind::cylinder;
  else if (k == "sphere") s.kind = Shape::Kind::sphere;
  else throw std::runtime_error("unknown shape kind: " + k);
  const auto& d = j.at("dims");
  s.dims = {d[0].get<double>(), d[1].get<double>(), d[2].get<double>()};
}

}  // namespace handover
