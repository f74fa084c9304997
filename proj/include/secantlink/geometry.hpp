#pragma once

#include "secantlink/core.hpp"
#include "secantlink/curve.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace secantlink {

/// Point of RP^3, stored as a unit 4-vector whose first nonzero entry is positive.
class HPoint {
 public:
  explicit HPoint(const Vec4& x) {
    double n = x.norm();
    if (!(n > 0)) throw Error(ErrorKind::InvalidInput, "zero homogeneous vector");
    x_ = x / n;
    for (int i = 0; i < 4; ++i) {
      if (std::abs(x_(i)) > 1e-12) {
        if (x_(i) < 0) x_ = -x_;
        break;
      }
    }
  }
  const Vec4& coords() const { return x_; }
  bool approx_equal(const HPoint& o, double tol = 1e-9) const { return (x_ - o.x_).norm() < tol; }

 private:
  Vec4 x_;
};

/// Affine line in Plücker form: unit direction d and moment m = p x d.
struct Line3 {
  Vec3 d;
  Vec3 m;

  static Line3 canonical(Vec3 d, Vec3 m) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(d(i)) > 1e-12) {
        if (d(i) < 0) {
          d = -d;
          m = -m;
        }
        break;
      }
    }
    return {d, m};
  }

  Point3 closest_to_origin() const { return d.cross(m); }
  Point3 at(double s) const { return closest_to_origin() + s * d; }
  double param_of(const Point3& p) const { return d.dot(p - closest_to_origin()); }
  double distance_to(const Point3& p) const { return (p.cross(d) - m).norm(); }
};

inline Line3 line_through(const Point3& p, const Point3& q, double eps_pt = 1e-9) {
  Vec3 v = q - p;
  double n = v.norm();
  if (n <= eps_pt) throw Error(ErrorKind::DegeneratePoints, "points coincide");
  Vec3 d = v / n;
  return Line3::canonical(d, p.cross(d));
}

/// Reciprocal product of two Plücker lines; zero iff the lines are coplanar.
inline double reciprocal_product(const Line3& a, const Line3& b) { return a.d.dot(b.m) + b.d.dot(a.m); }

/// Normalized homogeneous Plücker 6-vector of the projective line through
/// homogeneous points x and y; used for deduplication in RP^3.
inline Eigen::Matrix<double, 6, 1> plucker6(const Vec4& x, const Vec4& y) {
  Eigen::Matrix<double, 6, 1> l;
  int k = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) l(k++) = x(i) * y(j) - x(j) * y(i);
  double n = l.norm();
  if (!(n > 0)) throw Error(ErrorKind::DegeneratePoints, "homogeneous points are dependent");
  l /= n;
  for (int i = 0; i < 6; ++i) {
    if (std::abs(l(i)) > 1e-9) {
      if (l(i) < 0) l = -l;
      break;
    }
  }
  return l;
}

/// Oriented circle; the orientation is the right-hand rotation about `normal`.
struct Circle3 {
  Point3 center;
  double radius = 1;
  Vec3 normal;

  /// In-plane orthonormal frame (u, v) with u x v = normal.
  std::pair<Vec3, Vec3> frame() const {
    Vec3 a = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 u = (a - normal * normal.dot(a)).normalized();
    return {u, normal.cross(u)};
  }
  Point3 at(double angle) const {
    auto [u, v] = frame();
    return center + radius * (std::cos(angle) * u + std::sin(angle) * v);
  }
  /// Angle of the projection of p into the circle plane, in [0, 2 pi).
  double angle_of(const Point3& p) const {
    auto [u, v] = frame();
    Vec3 w = p - center;
    double a = std::atan2(w.dot(v), w.dot(u));
    return a < 0 ? a + kTwoPi : a;
  }
  Vec3 tangent_at(const Point3& p) const { return normal.cross(p - center); }
};

template <typename T>
struct CircleT {
  Vec3T<T> center;
  T radius;
  Vec3T<T> normal;
};

/// Circumcircle of three points, templated so it can be differentiated.
template <typename T>
CircleT<T> circumcircle(const Vec3T<T>& p, const Vec3T<T>& q, const Vec3T<T>& r) {
  using std::sqrt;
  Vec3T<T> a = p - r;
  Vec3T<T> b = q - r;
  Vec3T<T> axb = a.cross(b);
  T den = T(2.0) * axb.squaredNorm();
  Vec3T<T> num = (a.squaredNorm() * b - b.squaredNorm() * a).cross(axb);
  Vec3T<T> center = r + num / den;
  Vec3T<T> n = (q - p).cross(r - p);
  T nn = sqrt(n.squaredNorm());
  return {center, sqrt((p - center).squaredNorm()), n / nn};
}

inline Circle3 circle_through(const Point3& p, const Point3& q, const Point3& r, double eps_area = 1e-12) {
  double area = 0.5 * (q - p).cross(r - p).norm();
  if (area <= eps_area) throw Error(ErrorKind::CollinearPoints, "points are collinear");
  auto c = circumcircle<double>(p, q, r);
  return {c.center, c.radius, c.normal};
}

inline Point3 invert(const Point3& p, const Point3& center, double radius, double eps_pt = 1e-9) {
  Vec3 v = p - center;
  double n2 = v.squaredNorm();
  if (std::sqrt(n2) <= eps_pt) throw Error(ErrorKind::AtCenter, "point at inversion center");
  return center + (radius * radius / n2) * v;
}

/// Differential of the inversion at p.
inline Eigen::Matrix3d inversion_jacobian(const Point3& p, const Point3& center, double radius) {
  Vec3 v = p - center;
  double n2 = v.squaredNorm();
  return (radius * radius / n2) * (Eigen::Matrix3d::Identity() - 2.0 * v * v.transpose() / n2);
}

/// Pointwise inversion, resampled as a periodic cubic polyline.
inline ClosedCurve invert_curve(const ClosedCurve& c, const Point3& center, double radius, int samples = 1024,
                                double r_min = 1e-3) {
  std::vector<Point3> pts;
  pts.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    Point3 p = c.eval(static_cast<double>(i) / samples);
    if ((p - center).norm() <= r_min) throw Error(ErrorKind::CurveHitsCenter, c.name() + " passes too close to center");
    pts.push_back(invert(p, center, radius));
  }
  return ClosedCurve::polyline(c.name(), std::move(pts), c.orientation());
}

enum class OrderMode { Linear, Cyclic };

/// Prescribed visiting order of curves along a line or circle. Slots hold
/// 0-based curve indices and may repeat.
struct OrderSpec {
  OrderMode mode = OrderMode::Linear;
  std::vector<int> slots;

  OrderSpec() = default;
  OrderSpec(OrderMode m, std::vector<int> s) : mode(m), slots(std::move(s)) {
    if (slots.size() < 2) throw Error(ErrorKind::InvalidInput, "order spec needs at least two slots");
  }

  int size() const { return static_cast<int>(slots.size()); }

  /// Representative of the cyclic class: least rotation, also over reversal
  /// for the line set. Linear specs are returned unchanged.
  std::vector<int> canonical_slots() const {
    if (mode == OrderMode::Linear) return slots;
    std::vector<int> best = slots;
    const int n = size();
    for (int r = 0; r < n; ++r) {
      std::vector<int> rot(n);
      for (int i = 0; i < n; ++i) rot[i] = slots[(i + r) % n];
      best = std::min(best, rot);
    }
    return best;
  }

  OrderSpec reversed() const {
    OrderSpec o = *this;
    std::reverse(o.slots.begin(), o.slots.end());
    return o;
  }
};

/// Whether hits given per slot (line parameters for Linear, circle
/// parameters in [0,1) for Cyclic) visit the slots in the prescribed order,
/// in either direction.
inline bool order_of_hits(const std::vector<double>& params, const OrderSpec& spec, double delta_ord = 1e-6) {
  const int n = spec.size();
  if (static_cast<int>(params.size()) != n) throw Error(ErrorKind::InvalidInput, "hit count differs from slot count");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double gap = spec.mode == OrderMode::Linear ? std::abs(params[i] - params[j])
                                                  : circle_distance(params[i], params[j]);
      if (gap <= delta_ord) throw Error(ErrorKind::CoincidentHits, "hit parameters coincide");
    }
  if (spec.mode == OrderMode::Linear) {
    bool inc = true, dec = true;
    for (int i = 0; i + 1 < n; ++i) {
      inc = inc && params[i + 1] > params[i];
      dec = dec && params[i + 1] < params[i];
    }
    return inc || dec;
  }
  double fwd = 0, bwd = 0;
  for (int i = 0; i < n; ++i) {
    double a = params[i], b = params[(i + 1) % n];
    fwd += wrap01(b - a);
    bwd += wrap01(a - b);
  }
  return std::abs(fwd - 1.0) < 1e-9 || std::abs(bwd - 1.0) < 1e-9;
}

/// Orthonormal vectors completing the unit vector d to a right-handed frame;
/// the auxiliary axis is the one least aligned with d.
template <typename T>
std::pair<Vec3T<T>, Vec3T<T>> orthonormal_completion(const Vec3T<T>& d, int axis) {
  using std::sqrt;
  Vec3T<T> e = Vec3T<T>::Zero();
  e(axis) = T(1.0);
  Vec3T<T> n1 = d.cross(e);
  n1 /= sqrt(n1.squaredNorm());
  Vec3T<T> n2 = d.cross(n1);
  return {n1, n2};
}

inline int least_aligned_axis(const Vec3& d) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(d(i)) < std::abs(d(k))) k = i;
  return k;
}

/// Two unit vectors of R^4 orthogonal to span(a, b), chosen from the standard
/// basis vectors least represented in the span.
inline std::array<Vec4, 2> plane_complement(const Vec4& a, const Vec4& b) {
  Vec4 u = a.normalized();
  Vec4 v = (b - u * u.dot(b)).normalized();
  std::array<Vec4, 2> out;
  int found = 0;
  std::array<std::pair<double, int>, 4> cand;
  for (int i = 0; i < 4; ++i) cand[i] = {u(i) * u(i) + v(i) * v(i), i};
  std::sort(cand.begin(), cand.end());
  for (auto [w, i] : cand) {
    Vec4 e = Vec4::Zero();
    e(i) = 1.0;
    e -= u * u.dot(e) + v * v.dot(e);
    for (int k = 0; k < found; ++k) e -= out[k] * out[k].dot(e);
    if (e.norm() < 1e-6) continue;
    out[found++] = e.normalized();
    if (found == 2) break;
  }
  return out;
}

}  // namespace secantlink
