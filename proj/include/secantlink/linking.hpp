#pragma once

#include "secantlink/core.hpp"
#include "secantlink/curve.hpp"

#include <functional>
#include <random>
#include <vector>

namespace secantlink {

/// Number of halves; linking numbers in RP^3 live in (1/2)Z.
struct HalfInt {
  int twice = 0;

  static HalfInt round(double x) { return {static_cast<int>(std::lround(2.0 * x))}; }
  static HalfInt whole(int n) { return {2 * n}; }
  double value() const { return 0.5 * twice; }
  bool is_integer() const { return twice % 2 == 0; }
  friend bool operator==(HalfInt a, HalfInt b) { return a.twice == b.twice; }
  HalfInt operator-() const { return {-twice}; }
};

/// A closed loop in R^3 sampled as a smooth periodic function of s in [0,1).
using LoopFn = std::function<void(double s, Vec3& p, Vec3& dp)>;

namespace detail {

struct LoopSamples {
  std::vector<Vec3> p;
  std::vector<Vec3> d;
};

inline LoopSamples sample_loop(const LoopFn& f, int n) {
  LoopSamples out;
  out.p.resize(n);
  out.d.resize(n);
  for (int i = 0; i < n; ++i) f(static_cast<double>(i) / n, out.p[i], out.d[i]);
  return out;
}

inline double gauss_sum(const LoopSamples& a, const LoopSamples& b) {
  const int na = static_cast<int>(a.p.size());
  const int nb = static_cast<int>(b.p.size());
  double acc = 0;
  for (int i = 0; i < na; ++i) {
    const Vec3& pa = a.p[i];
    const Vec3& da = a.d[i];
    for (int j = 0; j < nb; ++j) {
      Vec3 r = pa - b.p[j];
      double r2 = r.squaredNorm();
      acc += r.dot(da.cross(b.d[j])) / (r2 * std::sqrt(r2));
    }
  }
  return acc / (4.0 * kPi * na * nb);
}

}  // namespace detail

struct QuadratureOptions {
  int initial_n = 64;
  long long budget = 1LL << 24;
  double tol = 1e-10;
};

/// Gauss linking integral of two disjoint loops by trapezoid refinement on the
/// torus of parameter pairs; the rule is spectrally accurate for smooth loops.
inline double gauss_linking(const LoopFn& a, const LoopFn& b, const QuadratureOptions& opt = {}) {
  long long used = 0;
  int n = opt.initial_n;
  double prev = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    long long cost = static_cast<long long>(n) * n;
    if (used + cost > opt.budget) break;
    used += cost;
    auto sa = detail::sample_loop(a, n);
    auto sb = detail::sample_loop(b, n);
    double cur = detail::gauss_sum(sa, sb);
    if (!std::isnan(prev) && std::abs(cur - prev) < opt.tol) return cur;
    prev = cur;
    n *= 2;
  }
  throw Error(ErrorKind::QuadratureNotConverged, "Gauss integral did not settle within the evaluation budget");
}

inline LoopFn affine_loop(const ClosedCurve& c) {
  return [c](double s, Vec3& p, Vec3& dp) {
    p = c.eval(s);
    dp = c.deriv(s) * c.orientation();
  };
}

/// Minimum distance between two affine curves at sample resolution.
inline double min_distance(const ClosedCurve& a, const ClosedCurve& b, int samples = 512) {
  auto pa = a.sample(samples);
  auto pb = b.sample(samples);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : pa)
    for (const auto& y : pb) best = std::min(best, (x - y).squaredNorm());
  return std::sqrt(best);
}

/// Linking number in R^3 from the Gauss integral.
inline double lk_gauss(const ClosedCurve& a, const ClosedCurve& b, double d_min = 1e-3,
                       const QuadratureOptions& opt = {}) {
  if (!a.is_affine() || !b.is_affine()) throw Error(ErrorKind::InvalidInput, "lk_gauss needs affine curves");
  if (min_distance(a, b) <= d_min) throw Error(ErrorKind::CurvesTooClose, a.name() + " and " + b.name());
  double v = gauss_linking(affine_loop(a), affine_loop(b), opt);
  if (std::abs(v - std::round(v)) > 1e-6)
    throw Error(ErrorKind::QuadratureNotConverged, "Gauss integral is not near an integer");
  return v;
}

/// Half the signed count of crossings of A over/under B in the projection
/// along `direction`. Retries with perturbed directions when a crossing is
/// too close to tangency or to a segment endpoint.
inline double lk_crossing(const ClosedCurve& a, const ClosedCurve& b, Vec3 direction, int segments = 1024,
                          int retries = 20, unsigned seed = 7) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto pa = a.sample(segments);
  auto pb = b.sample(segments);
  for (int attempt = 0; attempt <= retries; ++attempt) {
    Vec3 v = direction.normalized();
    Vec3 e1 = (std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(v).normalized();
    Vec3 e2 = v.cross(e1);
    auto proj = [&](const Vec3& p) { return Eigen::Vector2d(p.dot(e1), p.dot(e2)); };
    std::vector<Eigen::Vector2d> qa(segments), qb(segments);
    for (int i = 0; i < segments; ++i) {
      qa[i] = proj(pa[i]);
      qb[i] = proj(pb[i]);
    }
    bool generic = true;
    int total = 0;
    for (int i = 0; i < segments && generic; ++i) {
      Eigen::Vector2d a0 = qa[i], a1 = qa[(i + 1) % segments];
      Eigen::Vector2d amin = a0.cwiseMin(a1), amax = a0.cwiseMax(a1);
      Vec3 sa = pa[(i + 1) % segments] - pa[i];
      for (int j = 0; j < segments; ++j) {
        Eigen::Vector2d b0 = qb[j], b1 = qb[(j + 1) % segments];
        if ((b0.cwiseMax(b1) - amin).minCoeff() < 0 || (amax - b0.cwiseMin(b1)).minCoeff() < 0) continue;
        Eigen::Vector2d ra = a1 - a0, rb = b1 - b0, w = b0 - a0;
        double den = ra.x() * rb.y() - ra.y() * rb.x();
        double la = ra.norm(), lb = rb.norm();
        if (std::abs(den) < 1e-3 * la * lb) {
          // near-parallel overlapping segments: only a problem if they actually touch
          double dist = std::abs(w.x() * ra.y() - w.y() * ra.x()) / std::max(la, 1e-300);
          if (dist < 1e-9) generic = false;
          continue;
        }
        double alpha = (w.x() * rb.y() - w.y() * rb.x()) / den;
        double beta = (w.x() * ra.y() - w.y() * ra.x()) / den;
        const double eps = 1e-9;
        bool in_a = alpha > -eps && alpha < 1 + eps;
        bool in_b = beta > -eps && beta < 1 + eps;
        if (!in_a || !in_b) continue;
        if (std::abs(alpha) < eps || std::abs(alpha - 1) < eps || std::abs(beta) < eps || std::abs(beta - 1) < eps) {
          generic = false;
          break;
        }
        Vec3 xa = pa[i] + alpha * sa;
        Vec3 sb = pb[(j + 1) % segments] - pb[j];
        Vec3 xb = pb[j] + beta * sb;
        double h = (xa - xb).dot(v);
        double tri = sa.cross(sb).dot(v);
        if (std::abs(h) < 1e-9) throw Error(ErrorKind::CurvesTooClose, "curves intersect in projection and space");
        total += sign_of(h * tri);
      }
    }
    if (generic) return 0.5 * total * a.orientation() * b.orientation();
    direction = direction.normalized() + 1e-2 * Vec3(gauss(rng), gauss(rng), gauss(rng));
  }
  throw Error(ErrorKind::NoGenericDirectionFound, "no generic projection direction");
}

namespace detail {

/// Unit lift of a homogeneous curve with its derivative.
inline void sphere_point(const ClosedCurve& c, double t, Vec4& y, Vec4& dy) {
  Vec4 x = c.hpoint(t);
  Vec4 dx = c.htangent(t) * c.orientation();
  double n = x.norm();
  y = x / n;
  dy = (dx - y * y.dot(dx)) / n;
}

struct Stereo {
  Vec4 pole;
  Eigen::Matrix<double, 4, 3> basis;  // orthonormal, det[-pole, basis] > 0

  void map(const Vec4& y, const Vec4& dy, Vec3& p, Vec3& dp) const {
    double s = 1.0 - y.dot(pole);
    double ds = -dy.dot(pole);
    Vec4 w = y - pole * y.dot(pole);
    Vec4 dw = dy - pole * dy.dot(pole);
    Vec4 q = w / s;
    Vec4 dq = (dw * s - w * ds) / (s * s);
    p = basis.transpose() * q;
    dp = basis.transpose() * dq;
  }
};

inline Stereo make_stereo(const Vec4& pole) {
  Stereo st;
  st.pole = pole.normalized();
  Eigen::Matrix4d full = Eigen::Matrix4d::Identity();
  full.col(0) = -st.pole;
  int filled = 1;
  for (int i = 0; i < 4 && filled < 4; ++i) {
    Vec4 e = Vec4::Unit(i);
    for (int k = 0; k < filled; ++k) e -= full.col(k) * full.col(k).dot(e);
    if (e.norm() < 0.3) continue;
    full.col(filled++) = e.normalized();
  }
  if (full.determinant() < 0) full.col(3) = -full.col(3);
  st.basis = full.block<4, 3>(0, 1);
  return st;
}

}  // namespace detail

/// Linking number in RP^3 through the double cover S^3 -> RP^3: the Gauss
/// linking number of the full preimages, stereographically projected, halved.
inline double lk_rp3(const ClosedCurve& a, const ClosedCurve& b, unsigned seed = 11,
                     const QuadratureOptions& opt = {}) {
  SphereLift la = lift_to_sphere(a);
  SphereLift lb = lift_to_sphere(b);
  std::vector<Vec4> cloud;
  for (const auto* l : {&la, &lb})
    for (const auto& loop : l->loops)
      for (const auto& y : loop) cloud.push_back(y);
  // disjointness in RP^3
  for (const auto& ya : la.loops[0])
    for (const auto& yb : lb.loops[0])
      if (std::sqrt(std::max(0.0, 1.0 - std::pow(ya.dot(yb), 2))) < 1e-3)
        throw Error(ErrorKind::CurvesTooClose, a.name() + " and " + b.name() + " in RP^3");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec4 best_pole;
  double best = -1;
  for (int k = 0; k < 256; ++k) {
    Vec4 p(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    p.normalize();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& y : cloud) worst = std::min(worst, (y - p).norm());
    if (worst > best) {
      best = worst;
      best_pole = p;
    }
  }
  if (best < 1e-2) throw Error(ErrorKind::PoleOnCurve, "no pole away from both lifts");
  detail::Stereo st = detail::make_stereo(best_pole);

  auto loops_of = [&](const ClosedCurve& c, const SphereLift& l) {
    std::vector<LoopFn> out;
    if (l.homology_class == 1) {
      out.push_back([&c, st](double s, Vec3& p, Vec3& dp) {
        Vec4 y, dy;
        detail::sphere_point(c, 2.0 * s, y, dy);
        st.map(y, 2.0 * dy, p, dp);
      });
    } else {
      for (double sgn : {1.0, -1.0}) {
        out.push_back([&c, st, sgn](double s, Vec3& p, Vec3& dp) {
          Vec4 y, dy;
          detail::sphere_point(c, s, y, dy);
          st.map(sgn * y, sgn * dy, p, dp);
        });
      }
    }
    return out;
  };
  double total = 0;
  for (const auto& fa : loops_of(a, la))
    for (const auto& fb : loops_of(b, lb)) total += gauss_linking(fa, fb, opt);
  double v = 0.5 * total;
  if (std::abs(2 * v - std::round(2 * v)) > 2e-6)
    throw Error(ErrorKind::QuadratureNotConverged, "projective linking number is not near a half-integer");
  return v;
}

/// Pairwise linking numbers, raw and rounded; the diagonal is unset.
struct LinkingMatrix {
  Space space = Space::Affine;
  Eigen::MatrixXd raw;
  std::vector<std::vector<HalfInt>> rounded;

  int size() const { return static_cast<int>(raw.rows()); }
  HalfInt at(int i, int j) const { return rounded[i][j]; }
  double value(int i, int j) const { return rounded[i][j].value(); }
};

/// Linking matrix from lk_gauss (affine scenes) or lk_rp3 (projective
/// scenes); affine entries are cross-checked against lk_crossing.
inline LinkingMatrix linking_matrix(const std::vector<ClosedCurve>& curves, Space space, bool cross_check = true) {
  const int n = static_cast<int>(curves.size());
  LinkingMatrix m;
  m.space = space;
  m.raw = Eigen::MatrixXd::Zero(n, n);
  m.rounded.assign(n, std::vector<HalfInt>(n));
  bool all_affine = true;
  for (const auto& c : curves) all_affine = all_affine && c.is_affine();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v;
      try {
        if (space == Space::Affine || all_affine) {
          v = lk_gauss(curves[i], curves[j]);
          if (cross_check) {
            double c = lk_crossing(curves[i], curves[j], Vec3(0.31, 0.52, 0.79));
            if (std::abs(c - std::round(v)) > 1e-9)
              throw Error(ErrorKind::QuadratureNotConverged, "Gauss and crossing methods disagree");
          }
        } else {
          v = lk_rp3(curves[i], curves[j]);
        }
      } catch (const Error& e) {
        throw Error(e.kind(), "pair (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "): " + e.what());
      }
      m.raw(i, j) = m.raw(j, i) = v;
      HalfInt h = (space == Space::Affine || all_affine) ? HalfInt::whole(static_cast<int>(std::lround(v)))
                                                           : HalfInt::round(v);
      m.rounded[i][j] = m.rounded[j][i] = h;
    }
  return m;
}

}  // namespace secantlink
