#pragma once

#include "secantlink/core.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace secantlink {

template <typename T>
double value_of(const T& x) {
  if constexpr (std::is_arithmetic_v<T>) {
    return static_cast<double>(x);
  } else {
    return x.value();
  }
}

enum class Space { Affine, Projective };

inline const char* to_string(Space s) { return s == Space::Affine ? "affine" : "projective"; }

/// Affine trigonometric polynomial p(t) = sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t).
struct FourierRep {
  Eigen::Matrix<double, 3, Eigen::Dynamic> cos_coeffs;  // column k: a_k, k = 0..D
  Eigen::Matrix<double, 3, Eigen::Dynamic> sin_coeffs;  // column k: b_k (b_0 ignored)

  int degree() const { return static_cast<int>(cos_coeffs.cols()) - 1; }

  template <typename T>
  Vec3T<T> eval(const T& t) const {
    using std::cos;
    using std::sin;
    Vec3T<T> p = cos_coeffs.col(0).template cast<T>();
    for (int k = 1; k <= degree(); ++k) {
      T arg = T(kTwoPi * k) * t;
      T c = cos(arg);
      T s = sin(arg);
      for (int r = 0; r < 3; ++r) p(r) += cos_coeffs(r, k) * c + sin_coeffs(r, k) * s;
    }
    return p;
  }

  Vec3 deriv(double t) const {
    Vec3 d = Vec3::Zero();
    for (int k = 1; k <= degree(); ++k) {
      double w = kTwoPi * k;
      d += w * (-cos_coeffs.col(k) * std::sin(w * t) + sin_coeffs.col(k) * std::cos(w * t));
    }
    return d;
  }
};

/// Homogeneous trigonometric polynomial X(t) = sum_k a_k cos(pi k t) + b_k sin(pi k t)
/// in R^4. Only even k (closed lift, null-homologous) or only odd k (X(t+1) = -X(t),
/// the generator of H_1(RP^3)) are allowed, so X is a closed curve in RP^3.
struct HomogeneousRep {
  Eigen::Matrix<double, 4, Eigen::Dynamic> cos_coeffs;
  Eigen::Matrix<double, 4, Eigen::Dynamic> sin_coeffs;

  int degree() const { return static_cast<int>(cos_coeffs.cols()) - 1; }

  template <typename T>
  Vec4T<T> eval(const T& t) const {
    using std::cos;
    using std::sin;
    Vec4T<T> x = cos_coeffs.col(0).template cast<T>();
    for (int k = 1; k <= degree(); ++k) {
      T arg = T(kPi * k) * t;
      T c = cos(arg);
      T s = sin(arg);
      for (int r = 0; r < 4; ++r) x(r) += cos_coeffs(r, k) * c + sin_coeffs(r, k) * s;
    }
    return x;
  }

  Vec4 deriv(double t) const {
    Vec4 d = Vec4::Zero();
    for (int k = 1; k <= degree(); ++k) {
      double w = kPi * k;
      d += w * (-cos_coeffs.col(k) * std::sin(w * t) + sin_coeffs.col(k) * std::cos(w * t));
    }
    return d;
  }

  /// +1 when X(t+1) = X(t), -1 when X(t+1) = -X(t).
  int period_sign() const {
    for (int k = 0; k <= degree(); ++k) {
      if (cos_coeffs.col(k).norm() + sin_coeffs.col(k).norm() > 0) return (k % 2 == 0) ? 1 : -1;
    }
    return 1;
  }
};

/// N periodic samples joined by the C^2 periodic cubic spline.
struct PolylineRep {
  std::vector<Point3> points;
  std::vector<Point3> second;  // spline second derivatives at the knots, in t units

  static PolylineRep build(std::vector<Point3> pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 4) throw Error(ErrorKind::InvalidCurve, "polyline needs at least 4 points");
    const double h = 1.0 / n;
    // Periodic spline: M_{i-1} + 4 M_i + M_{i+1} = 6/h^2 (P_{i+1} - 2 P_i + P_{i-1}).
    Eigen::SparseMatrix<double> a(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(i, i, 4.0);
      trip.emplace_back(i, (i + 1) % n, 1.0);
      trip.emplace_back(i, (i + n - 1) % n, 1.0);
    }
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    Eigen::MatrixXd rhs(n, 3);
    for (int i = 0; i < n; ++i) {
      rhs.row(i) = (6.0 / (h * h)) * (pts[(i + 1) % n] - 2.0 * pts[i] + pts[(i + n - 1) % n]).transpose();
    }
    Eigen::MatrixXd m = lu.solve(rhs);
    PolylineRep rep;
    rep.points = std::move(pts);
    rep.second.resize(n);
    for (int i = 0; i < n; ++i) rep.second[i] = m.row(i).transpose();
    return rep;
  }

  int size() const { return static_cast<int>(points.size()); }

  template <typename T>
  Vec3T<T> eval(const T& t) const {
    const int n = size();
    const double h = 1.0 / n;
    double tv = value_of(t);
    double fl = std::floor(tv * n);
    int i = static_cast<int>(fl) % n;
    if (i < 0) i += n;
    T u = t * T(static_cast<double>(n)) - T(fl);
    T v = T(1.0) - u;
    const Point3& p0 = points[i];
    const Point3& p1 = points[(i + 1) % n];
    const Point3& m0 = second[i];
    const Point3& m1 = second[(i + 1) % n];
    T c0 = (v * v * v - v) * T(h * h / 6.0);
    T c1 = (u * u * u - u) * T(h * h / 6.0);
    Vec3T<T> r;
    for (int k = 0; k < 3; ++k) r(k) = v * p0(k) + u * p1(k) + c0 * m0(k) + c1 * m1(k);
    return r;
  }

  Vec3 deriv(double t) const {
    const int n = size();
    const double h = 1.0 / n;
    double fl = std::floor(t * n);
    int i = static_cast<int>(fl) % n;
    if (i < 0) i += n;
    double u = t * n - fl;
    double v = 1.0 - u;
    const Point3& p0 = points[i];
    const Point3& p1 = points[(i + 1) % n];
    // d/dt = n d/du
    Vec3 du = -p0 + p1 + (h * h / 6.0) * (-(3 * v * v - 1) * second[i] + (3 * u * u - 1) * second[(i + 1) % n]);
    return du * n;
  }
};

/// An oriented closed C^1 curve with period 1 in R^3 or RP^3.
class ClosedCurve {
 public:
  using Rep = std::variant<FourierRep, PolylineRep, HomogeneousRep>;

  ClosedCurve() = default;
  ClosedCurve(std::string name, Rep rep, int orientation = 1)
      : name_(std::move(name)), rep_(std::make_shared<const Rep>(std::move(rep))), orientation_(orientation) {
    if (orientation_ != 1 && orientation_ != -1) throw Error(ErrorKind::InvalidCurve, "orientation must be +1 or -1");
    if (auto* h = std::get_if<HomogeneousRep>(rep_.get())) {
      int parity = -1;
      for (int k = 0; k <= h->degree(); ++k) {
        if (h->cos_coeffs.col(k).norm() + h->sin_coeffs.col(k).norm() == 0) continue;
        if (parity < 0) parity = k % 2;
        if (k % 2 != parity) throw Error(ErrorKind::InvalidCurve, "homogeneous curve mixes even and odd frequencies");
      }
    }
  }

  static ClosedCurve fourier(std::string name, Eigen::Matrix<double, 3, Eigen::Dynamic> cos_c,
                             Eigen::Matrix<double, 3, Eigen::Dynamic> sin_c, int orientation = 1) {
    if (cos_c.cols() != sin_c.cols() || cos_c.cols() < 1) throw Error(ErrorKind::InvalidCurve, "bad Fourier shape");
    return ClosedCurve(std::move(name), FourierRep{std::move(cos_c), std::move(sin_c)}, orientation);
  }

  static ClosedCurve polyline(std::string name, std::vector<Point3> pts, int orientation = 1) {
    return ClosedCurve(std::move(name), PolylineRep::build(std::move(pts)), orientation);
  }

  static ClosedCurve homogeneous(std::string name, Eigen::Matrix<double, 4, Eigen::Dynamic> cos_c,
                                 Eigen::Matrix<double, 4, Eigen::Dynamic> sin_c, int orientation = 1) {
    if (cos_c.cols() != sin_c.cols() || cos_c.cols() < 1) throw Error(ErrorKind::InvalidCurve, "bad homogeneous shape");
    return ClosedCurve(std::move(name), HomogeneousRep{std::move(cos_c), std::move(sin_c)}, orientation);
  }

  /// Round circle of the given radius, normal and phase axis.
  static ClosedCurve circle(std::string name, const Point3& center, const Vec3& axis_u, const Vec3& axis_v,
                            double radius, int orientation = 1) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> c(3, 2), s(3, 2);
    c.col(0) = center;
    s.col(0).setZero();
    c.col(1) = radius * axis_u.normalized();
    s.col(1) = radius * axis_v.normalized();
    return fourier(std::move(name), c, s, orientation);
  }

  /// Projective line through homogeneous points a and b, X(t) = cos(pi t) a + sin(pi t) b.
  static ClosedCurve projective_line(std::string name, const Vec4& a, const Vec4& b, int orientation = 1) {
    Eigen::Matrix<double, 4, Eigen::Dynamic> c = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, 2);
    Eigen::Matrix<double, 4, Eigen::Dynamic> s = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, 2);
    c.col(1) = a;
    s.col(1) = b;
    return homogeneous(std::move(name), c, s, orientation);
  }

  const std::string& name() const { return name_; }
  const Rep& rep() const { return *rep_; }
  int orientation() const { return orientation_; }
  bool is_affine() const { return !std::holds_alternative<HomogeneousRep>(*rep_); }
  Space space() const { return is_affine() ? Space::Affine : Space::Projective; }

  ClosedCurve reversed() const {
    ClosedCurve c = *this;
    c.orientation_ = -orientation_;
    return c;
  }
  ClosedCurve renamed(std::string n) const {
    ClosedCurve c = *this;
    c.name_ = std::move(n);
    return c;
  }

  /// Homogeneous point; affine curves embed as (1, p). Not reduced mod 1 for
  /// homogeneous curves so that the lift to S^3 stays continuous in t.
  template <typename T>
  Vec4T<T> hpoint(const T& t) const {
    return std::visit(
        [&](const auto& r) -> Vec4T<T> {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, HomogeneousRep>) {
            return r.eval(t);
          } else {
            Vec3T<T> p = r.eval(t);
            Vec4T<T> x;
            x << T(1.0), p(0), p(1), p(2);
            return x;
          }
        },
        *rep_);
  }

  /// Raw parameter derivative of hpoint (orientation flag not applied).
  Vec4 htangent(double t) const {
    return std::visit(
        [&](const auto& r) -> Vec4 {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, HomogeneousRep>) {
            return r.deriv(t);
          } else {
            return to_homogeneous_direction(r.deriv(wrap01(t)));
          }
        },
        *rep_);
  }

  /// Affine point. Projective curves are read in the w = 1 chart.
  Point3 eval(double t) const {
    return std::visit(
        [&](const auto& r) -> Point3 {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, HomogeneousRep>) {
            Vec4 x = r.eval(t);
            if (std::abs(x(0)) < 1e-14) throw Error(ErrorKind::InvalidCurve, "point at infinity in the w=1 chart");
            return x.tail<3>() / x(0);
          } else {
            return r.eval(wrap01(t));
          }
        },
        *rep_);
  }

  Vec3 deriv(double t) const {
    return std::visit(
        [&](const auto& r) -> Vec3 {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, HomogeneousRep>) {
            Vec4 x = r.eval(t);
            Vec4 d = r.deriv(t);
            if (std::abs(x(0)) < 1e-14) throw Error(ErrorKind::InvalidCurve, "point at infinity in the w=1 chart");
            return (d.tail<3>() * x(0) - x.tail<3>() * d(0)) / (x(0) * x(0));
          } else {
            return r.deriv(wrap01(t));
          }
        },
        *rep_);
  }

  /// Oriented tangent: the derivative times the orientation flag.
  Vec4 oriented_htangent(double t) const { return orientation_ * htangent(t); }

  std::vector<Point3> sample(int n) const {
    std::vector<Point3> out(n);
    for (int i = 0; i < n; ++i) out[i] = eval(static_cast<double>(i) / n);
    return out;
  }
  std::vector<Vec4> hsample(int n) const {
    std::vector<Vec4> out(n);
    for (int i = 0; i < n; ++i) out[i] = hpoint(static_cast<double>(i) / n);
    return out;
  }

  /// Apply p -> scale * A p + b. Homogeneous curves get the matching projective map.
  ClosedCurve transformed(const Eigen::Matrix3d& a, const Vec3& b) const {
    Rep out = std::visit(
        [&](const auto& r) -> Rep {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, FourierRep>) {
            FourierRep f{a * r.cos_coeffs, a * r.sin_coeffs};
            f.cos_coeffs.col(0) += b;
            return f;
          } else if constexpr (std::is_same_v<R, PolylineRep>) {
            std::vector<Point3> pts;
            pts.reserve(r.points.size());
            for (const auto& p : r.points) pts.push_back(a * p + b);
            return PolylineRep::build(std::move(pts));
          } else {
            Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
            m(0, 0) = 1.0;
            m.block<3, 3>(1, 1) = a;
            m.block<3, 1>(1, 0) = b;
            return HomogeneousRep{m * r.cos_coeffs, m * r.sin_coeffs};
          }
        },
        *rep_);
    return ClosedCurve(name_, std::move(out), orientation_);
  }

  /// Apply a linear map of R^4 (a projective transformation). Affine Fourier
  /// curves are first promoted to homogeneous form.
  ClosedCurve projectively_transformed(const Eigen::Matrix4d& m) const {
    HomogeneousRep h = to_homogeneous_rep();
    return ClosedCurve(name_, HomogeneousRep{m * h.cos_coeffs, m * h.sin_coeffs}, orientation_);
  }

  HomogeneousRep to_homogeneous_rep() const {
    if (const auto* h = std::get_if<HomogeneousRep>(rep_.get())) return *h;
    const auto* f = std::get_if<FourierRep>(rep_.get());
    if (!f) throw Error(ErrorKind::InvalidCurve, "polyline curves have no exact homogeneous form");
    const int d = f->degree();
    HomogeneousRep h;
    h.cos_coeffs = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, 2 * d + 1);
    h.sin_coeffs = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, 2 * d + 1);
    h.cos_coeffs(0, 0) = 1.0;
    for (int k = 0; k <= d; ++k) {
      h.cos_coeffs.block<3, 1>(1, 2 * k) += f->cos_coeffs.col(k);
      if (k > 0) h.sin_coeffs.block<3, 1>(1, 2 * k) = f->sin_coeffs.col(k);
    }
    return h;
  }

 private:
  std::string name_;
  std::shared_ptr<const Rep> rep_;
  int orientation_ = 1;
};

/// Bounding-box diameter of a set of affine curves.
inline double scene_extent(const std::vector<ClosedCurve>& curves, int samples = 256) {
  Vec3 lo = Vec3::Constant(1e300), hi = -lo;
  for (const auto& c : curves)
    for (const auto& p : c.sample(samples)) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  return (hi - lo).norm();
}

struct CurveCheck {
  double min_speed = 0;
  double min_separation = 0;
  bool regular = false;
  bool embedded = false;
};

/// Regularity and embeddedness at grid resolution. Affine curves only.
inline CurveCheck check_curve(const ClosedCurve& c, int grid = 512, double eps_reg = 1e-6, double delta_emb = 1e-4,
                              double delta_param = 0.02) {
  CurveCheck out;
  out.min_speed = std::numeric_limits<double>::infinity();
  out.min_separation = std::numeric_limits<double>::infinity();
  std::vector<Vec4> pts(grid);
  for (int i = 0; i < grid; ++i) {
    double t = static_cast<double>(i) / grid;
    pts[i] = c.hpoint(t).normalized();
    Vec4 x = c.hpoint(t);
    Vec4 d = c.htangent(t);
    // speed in the projective sense: component of X' orthogonal to X
    double speed = (d - x * (x.dot(d) / x.squaredNorm())).norm() / x.norm();
    out.min_speed = std::min(out.min_speed, speed);
  }
  for (int i = 0; i < grid; ++i) {
    for (int j = i + 1; j < grid; ++j) {
      if (circle_distance(static_cast<double>(i) / grid, static_cast<double>(j) / grid) < delta_param) continue;
      // angular distance in RP^3
      double cosang = std::abs(pts[i].dot(pts[j]));
      double dist = std::sqrt(std::max(0.0, 1.0 - cosang * cosang));
      if (c.is_affine()) dist = (c.eval(static_cast<double>(i) / grid) - c.eval(static_cast<double>(j) / grid)).norm();
      out.min_separation = std::min(out.min_separation, dist);
    }
  }
  out.regular = out.min_speed >= eps_reg;
  out.embedded = out.min_separation >= delta_emb;
  return out;
}

/// Result of lifting a projective curve to the unit sphere S^3.
struct SphereLift {
  int homology_class = 0;           // 0: null-homologous, 1: generator of H_1(RP^3; Z/2)
  std::vector<std::vector<Vec4>> loops;  // full preimage: two antipodal loops or one double loop
};

/// Continuous lift of the curve to S^3 by sampling; the class is read off from
/// whether the lift closes up or ends at the antipode.
inline SphereLift lift_to_sphere(const ClosedCurve& c, int samples = 1024, double max_step_angle = 0.25) {
  std::vector<Vec4> lift;
  lift.reserve(samples + 1);
  Vec4 prev = c.hpoint(0.0).normalized();
  lift.push_back(prev);
  for (int i = 1; i <= samples; ++i) {
    double t = static_cast<double>(i) / samples;
    Vec4 cur = c.hpoint(t).normalized();
    if (cur.dot(prev) < 0) cur = -cur;
    double ang = std::acos(std::clamp(cur.dot(prev), -1.0, 1.0));
    if (ang > max_step_angle) throw Error(ErrorKind::LiftFailure, "lift step exceeds angular threshold for " + c.name());
    lift.push_back(cur);
    prev = cur;
  }
  SphereLift out;
  const Vec4& first = lift.front();
  const Vec4& last = lift.back();
  if ((last - first).norm() < 1e-6) {
    out.homology_class = 0;
    lift.pop_back();
    std::vector<Vec4> anti(lift.size());
    for (size_t i = 0; i < lift.size(); ++i) anti[i] = -lift[i];
    out.loops = {lift, anti};
  } else if ((last + first).norm() < 1e-6) {
    out.homology_class = 1;
    lift.pop_back();
    std::vector<Vec4> twice = lift;
    for (const auto& x : lift) twice.push_back(-x);
    out.loops = {twice};
  } else {
    throw Error(ErrorKind::LiftFailure, "lift neither closes nor reaches the antipode for " + c.name());
  }
  return out;
}

}  // namespace secantlink
