#pragma once

// Brute-force reference computations used to check the solvers. They share no
// code with the library beyond curve evaluation.

#include "secantlink/curve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using secantlink::ClosedCurve;
using secantlink::Point3;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

inline double wrap(double t) { return t - std::floor(t); }
inline double cdist(double a, double b) {
  double d = std::abs(wrap(a) - wrap(b));
  return std::min(d, 1.0 - d);
}

/// Gauss-Newton with a central-difference Jacobian on a least-squares residual.
template <int N>
bool gauss_newton(const std::function<Eigen::VectorXd(const Eigen::Matrix<double, N, 1>&)>& f,
                  Eigen::Matrix<double, N, 1>& x, double tol = 1e-12, int iters = 60) {
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd r = f(x);
    if (r.norm() < tol) return true;
    Eigen::MatrixXd j(r.size(), N);
    for (int c = 0; c < N; ++c) {
      Eigen::Matrix<double, N, 1> h = Eigen::Matrix<double, N, 1>::Zero();
      h(c) = 1e-7;
      j.col(c) = (f(x + h) - f(x - h)) / 2e-7;
    }
    Eigen::Matrix<double, N, 1> step = j.completeOrthogonalDecomposition().solve(r);
    double lim = 0.05;
    if (step.norm() > lim) step *= lim / step.norm();
    x -= step;
    if (step.norm() < 1e-15) break;
  }
  return f(x).norm() < 1e-9;
}

// ---------------------------------------------------------------------------
// Affine lines meeting four curves: dense scan of the 4-torus of parameters.

struct LineRoot {
  std::array<double, 4> t;
  Vec3 dir;
  Point3 foot;  // point of the line closest to the origin
};

/// Distances of p3 and p4 from the line p1 p2, as two cross products.
inline Eigen::VectorXd line_defect(const std::array<Point3, 4>& p) {
  Vec3 d = p[1] - p[0];
  double n = d.norm();
  Eigen::VectorXd r(6);
  if (n < 1e-12) {
    r.setConstant(1e3);
    return r;
  }
  d /= n;
  r.head<3>() = (p[2] - p[0]).cross(d);
  r.tail<3>() = (p[3] - p[0]).cross(d);
  return r;
}

/// All lines meeting curves[slots[k]] at four points whose positions along
/// the line are monotone in slot order.
inline std::vector<LineRoot> scan_lines(const std::vector<ClosedCurve>& curves, const std::array<int, 4>& slots,
                                        int grid = 48, double min_gap = 1e-3) {
  std::array<std::vector<Point3>, 4> samples;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < grid; ++i) samples[k].push_back(curves[slots[k]].eval(static_cast<double>(i) / grid));
  double extent = 0;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < grid; ++i) extent = std::max(extent, samples[k][i].norm());
  // seeds: cells where both defects are within the sampling error
  double step = 0;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < grid; ++i) step = std::max(step, (samples[k][(i + 1) % grid] - samples[k][i]).norm());
  const double thr = 1.5 * step;
  auto eval = [&](const Eigen::Vector4d& t) {
    std::array<Point3, 4> p;
    for (int k = 0; k < 4; ++k) p[k] = curves[slots[k]].eval(t(k));
    return line_defect(p);
  };
  std::vector<LineRoot> out;
  auto known = [&](const Eigen::Vector4d& t) {
    for (const auto& r : out) {
      double d = 0;
      for (int k = 0; k < 4; ++k) d = std::max(d, cdist(r.t[k], t(k)));
      if (d < 1e-6) return true;
    }
    return false;
  };
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      if (slots[0] == slots[1] && a == b) continue;
      Vec3 d = samples[1][b] - samples[0][a];
      double n = d.norm();
      if (n < 1e-9) continue;
      d /= n;
      for (int c = 0; c < grid; ++c) {
        double e3 = (samples[2][c] - samples[0][a]).cross(d).norm();
        if (e3 > thr * (1 + (samples[2][c] - samples[0][a]).norm() / std::max(n, 1e-3))) continue;
        for (int e = 0; e < grid; ++e) {
          double e4 = (samples[3][e] - samples[0][a]).cross(d).norm();
          if (e4 > thr * (1 + (samples[3][e] - samples[0][a]).norm() / std::max(n, 1e-3))) continue;
          Eigen::Vector4d t(static_cast<double>(a) / grid, static_cast<double>(b) / grid,
                            static_cast<double>(c) / grid, static_cast<double>(e) / grid);
          if (!gauss_newton<4>(eval, t)) continue;
          for (int k = 0; k < 4; ++k) t(k) = wrap(t(k));
          std::array<Point3, 4> p;
          for (int k = 0; k < 4; ++k) p[k] = curves[slots[k]].eval(t(k));
          bool distinct = true;
          for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
              if ((p[i] - p[j]).norm() < min_gap) distinct = false;
              if (slots[i] == slots[j] && cdist(t(i), t(j)) < min_gap) distinct = false;
            }
          if (!distinct || known(t)) continue;
          Vec3 dir = (p[1] - p[0]).normalized();
          std::array<double, 4> s;
          for (int k = 0; k < 4; ++k) s[k] = dir.dot(p[k] - p[0]);
          bool inc = s[0] < s[1] && s[1] < s[2] && s[2] < s[3];
          bool dec = s[0] > s[1] && s[1] > s[2] && s[2] > s[3];
          LineRoot r;
          for (int k = 0; k < 4; ++k) r.t[k] = t(k);
          r.dir = dir;
          r.foot = p[0] - dir * dir.dot(p[0]);
          if (inc || dec) {
            out.push_back(r);
          } else {
            // remember unordered roots so that they are not refined again
            r.dir.setZero();
            out.push_back(r);
          }
        }
      }
    }
  out.erase(std::remove_if(out.begin(), out.end(), [](const LineRoot& r) { return r.dir.isZero(); }), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Projective lines meeting four lines of RP^3. For each point X of L4 the line
// through X meeting L1 and L2 is unique; it meets L3 iff a 4x4 determinant
// vanishes. Roots in X come from sign changes on a fine sampling.

struct ProjLine {
  Vec4 a, b;  // X(s) = cos(pi s) a + sin(pi s) b
};

inline Vec4 proj_point(const ProjLine& l, double s) {
  return std::cos(M_PI * s) * l.a + std::sin(M_PI * s) * l.b;
}

/// Intersection of the plane span(x, l) with line m, as a point of m.
inline Vec4 plane_line_meet(const Vec4& x, const ProjLine& l, const ProjLine& m) {
  // find (u, v) with det[x, l.a, l.b, u m.a + v m.b] = 0
  Eigen::Matrix4d ma, mb;
  ma << x, l.a, l.b, m.a;
  mb << x, l.a, l.b, m.b;
  double da = ma.determinant(), db = mb.determinant();
  return db * m.a - da * m.b;
}

inline double proj_defect(const std::array<ProjLine, 4>& L, double s) {
  Vec4 x = proj_point(L[3], s);
  Vec4 y = plane_line_meet(x, L[1], L[0]);
  Eigen::Matrix4d m;
  m << x.normalized(), y.normalized(), L[2].a.normalized(), L[2].b.normalized();
  return m.determinant();
}

/// Parameters s on L4 of the lines meeting all four lines. The sampling grid
/// is offset so that roots at simple parameters such as s = 0 fall inside a
/// cell.
inline std::vector<double> lines_meeting_four(const std::array<ProjLine, 4>& L, int samples = 20000) {
  const double offset = 0.3819660112501051;
  auto at = [&](int i) { return (i + offset) / samples; };
  std::vector<double> roots;
  double prev = proj_defect(L, at(0));
  for (int i = 1; i <= samples; ++i) {
    double cur = proj_defect(L, at(i));
    if ((prev < 0) != (cur < 0)) {
      double lo = at(i - 1), hi = at(i), flo = prev;
      for (int k = 0; k < 80; ++k) {
        double mid = 0.5 * (lo + hi);
        double fm = proj_defect(L, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(wrap(0.5 * (lo + hi)));
    }
    prev = cur;
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Circles meeting six curves: scan of (t1, t3, t5), circle through the three
// points, nearest samples of the other three curves, then refinement.

struct CircleRoot {
  std::array<double, 6> t;
  Point3 center;
  double radius;
  Vec3 normal;
};

struct Circ {
  Point3 c;
  double r;
  Vec3 n;
  bool ok;
};

inline Circ circ3(const Point3& a, const Point3& b, const Point3& c) {
  Vec3 u = b - a, v = c - a;
  Vec3 w = u.cross(v);
  double w2 = w.squaredNorm();
  if (w2 < 1e-20) return {a, 0, Vec3::Zero(), false};
  Point3 center = a + (v.squaredNorm() * w.cross(u) + u.squaredNorm() * v.cross(w)) / (2 * w2);
  return {center, (a - center).norm(), w.normalized(), true};
}

/// Residual: for p2, p4, p6 the offset from the plane and the squared-radius defect.
inline Eigen::VectorXd circle_defect(const std::array<Point3, 6>& p) {
  Circ k = circ3(p[0], p[2], p[4]);
  Eigen::VectorXd r(6);
  if (!k.ok) {
    r.setConstant(1e3);
    return r;
  }
  for (int i = 0; i < 3; ++i) {
    Vec3 w = p[2 * i + 1] - k.c;
    r(2 * i) = k.n.dot(w);
    r(2 * i + 1) = (w.squaredNorm() - k.r * k.r) / (2 * k.r);
  }
  return r;
}

inline double circ_angle(const Circ& k, const Point3& p) {
  Vec3 a = std::abs(k.n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 u = (a - k.n * k.n.dot(a)).normalized();
  Vec3 v = k.n.cross(u);
  Vec3 w = p - k.c;
  double ang = std::atan2(v.dot(w), u.dot(w));
  return ang < 0 ? ang + 2 * M_PI : ang;
}

/// Circles meeting curves[slots[k]] in the cyclic order of the slots.
inline std::vector<CircleRoot> scan_circles(const std::vector<ClosedCurve>& curves, const std::array<int, 6>& slots,
                                            int grid = 32, int fine = 256, double threshold = 0.15) {
  std::array<std::vector<Point3>, 6> samples;
  for (int k = 0; k < 6; ++k)
    for (int i = 0; i < fine; ++i) samples[k].push_back(curves[slots[k]].eval(static_cast<double>(i) / fine));
  auto eval = [&](const Eigen::Matrix<double, 6, 1>& t) {
    std::array<Point3, 6> p;
    for (int k = 0; k < 6; ++k) p[k] = curves[slots[k]].eval(t(k));
    return circle_defect(p);
  };
  std::vector<CircleRoot> out;
  const int step = fine / grid;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b)
      for (int c = 0; c < grid; ++c) {
        Circ k = circ3(samples[0][a * step], samples[2][b * step], samples[4][c * step]);
        if (!k.ok || k.r > 1e3) continue;
        Eigen::Matrix<double, 6, 1> t;
        t(0) = static_cast<double>(a) / grid;
        t(2) = static_cast<double>(b) / grid;
        t(4) = static_cast<double>(c) / grid;
        bool near = true;
        for (int m : {1, 3, 5}) {
          double best = 1e300;
          int arg = 0;
          for (int i = 0; i < fine; ++i) {
            Vec3 w = samples[m][i] - k.c;
            double h = k.n.dot(w);
            double rad = (w - k.n * h).norm() - k.r;
            double d = std::hypot(h, rad);
            if (d < best) {
              best = d;
              arg = i;
            }
          }
          if (best > threshold) {
            near = false;
            break;
          }
          t(m) = static_cast<double>(arg) / fine;
        }
        if (!near) continue;
        if (!gauss_newton<6>(eval, t)) continue;
        CircleRoot r;
        std::array<Point3, 6> p;
        for (int m = 0; m < 6; ++m) {
          r.t[m] = wrap(t(m));
          p[m] = curves[slots[m]].eval(r.t[m]);
        }
        bool distinct = true;
        for (int i = 0; i < 6; ++i)
          for (int j = i + 1; j < 6; ++j)
            if ((p[i] - p[j]).norm() < 1e-3) distinct = false;
        if (!distinct) continue;
        Circ kk = circ3(p[0], p[2], p[4]);
        bool dup = false;
        for (const auto& o : out)
          if ((o.center - kk.c).norm() < 1e-6 && std::abs(o.radius - kk.r) < 1e-6) dup = true;
        if (dup) continue;
        // cyclic order: angles increasing around the circle from p1, either way
        std::array<double, 6> ang;
        for (int m = 0; m < 6; ++m) ang[m] = circ_angle(kk, p[m]);
        auto ordered = [&](int dir) {
          double prev = 0;
          for (int m = 1; m < 6; ++m) {
            double d = dir * (ang[m] - ang[0]);
            d = std::fmod(d + 4 * M_PI, 2 * M_PI);
            if (d <= prev) return false;
            prev = d;
          }
          return true;
        };
        r.center = kk.c;
        r.radius = kk.r;
        r.normal = kk.n;
        if (ordered(1) || ordered(-1)) out.push_back(r);
        else {
          r.radius = -1;  // unordered; keep only to block duplicates
          out.push_back(r);
        }
      }
  out.erase(std::remove_if(out.begin(), out.end(), [](const CircleRoot& r) { return r.radius < 0; }), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Signed crossing count of two polygons under a fixed projection direction:
// an independent check of linking numbers.

inline double crossing_lk(const std::vector<Point3>& a, const std::vector<Point3>& b, const Vec3& dir) {
  Vec3 z = dir.normalized();
  Vec3 x = (std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
  x = (x - z * z.dot(x)).normalized();
  Vec3 y = z.cross(x);
  auto proj = [&](const Point3& p) { return Eigen::Vector2d(x.dot(p), y.dot(p)); };
  double sum = 0;
  const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  for (int i = 0; i < na; ++i) {
    Eigen::Vector2d p0 = proj(a[i]), p1 = proj(a[(i + 1) % na]);
    for (int j = 0; j < nb; ++j) {
      Eigen::Vector2d q0 = proj(b[j]), q1 = proj(b[(j + 1) % nb]);
      Eigen::Vector2d r = p1 - p0, s = q1 - q0;
      double den = r.x() * s.y() - r.y() * s.x();
      if (std::abs(den) < 1e-15) continue;
      Eigen::Vector2d qp = q0 - p0;
      double u = (qp.x() * s.y() - qp.y() * s.x()) / den;
      double v = (qp.x() * r.y() - qp.y() * r.x()) / den;
      if (u < 0 || u >= 1 || v < 0 || v >= 1) continue;
      double ha = z.dot(a[i] + u * (a[(i + 1) % na] - a[i]));
      double hb = z.dot(b[j] + v * (b[(j + 1) % nb] - b[j]));
      // right-handed crossing sign for the over strand
      double sgn = den > 0 ? 1 : -1;
      sum += (ha > hb ? sgn : -sgn);
    }
  }
  return sum / 2;
}

}  // namespace oracle
