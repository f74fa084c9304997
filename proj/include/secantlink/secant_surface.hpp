#pragma once

#include "secantlink/curve.hpp"
#include "secantlink/geometry.hpp"
#include "secantlink/numerics.hpp"
#include "secantlink/transversal.hpp"
#include "secantlink/weights.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace secantlink {

struct SecantConfig {
  int grid = 48;
  int chord_samples = 256;
  double seed_threshold = 0.1;
  double h0 = 1e-3;
  double h_min = 1e-6;
  double h_max = 1e-2;
  double corrector_tol = 1e-12;
  int corrector_iter = 10;
  long max_steps = 400000;
  double tau_cop = 1e-6;
  double tau_quad = 1e-6;
  int threads = 1;
};

/// Three curves whose common secants are traced.
struct SecantProblem {
  std::array<ClosedCurve, 3> curves;
  Space space = Space::Affine;
  SecantConfig config;
};

enum class Regularity { Regular, AlmostRegular, Degenerate };

inline const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::Regular: return "regular";
    case Regularity::AlmostRegular: return "almost_regular";
    case Regularity::Degenerate: return "degenerate";
  }
  return "unknown";
}

struct PointedSecant {
  Eigen::Vector3d t;
  std::array<Vec4, 3> x;  // unit homogeneous points
  std::array<Vec4, 3> w;  // oriented tangents
  /// Normalized signed coplanarity of the tangent lines opposite to each
  /// index: cop[0] for (L2, L3), cop[1] for (L3, L1), cop[2] for (L1, L2).
  std::array<double, 3> cop{};
  Eigen::Vector3d tangent;  // unit null vector of the collinearity Jacobian
  Regularity cls = Regularity::Regular;
  int special = -1;  // index of the special point when almost regular
};

struct BranchVertex {
  Eigen::Vector3d t;        // parameters reduced to [0, 1)
  Eigen::Vector3d tangent;  // unit tangent in the trace direction
  std::array<double, 3> cop{};
  std::array<int, 3> sign_products{};  // sign(lk(L_j, L_k)) * sign(tangent_i)
  bool regular = true;
  int orientation = 0;  // common sign product; 0 when not regular
};

struct Pinch {
  Eigen::Vector3d t;
  int special = -1;
  Regularity cls = Regularity::Degenerate;
  int lk_before = 0, lk_after = 0;            // sign(lk(L_j, L_k)) on either side
  int product_before = 0, product_after = 0;  // orientation sign on either side
};

struct SecantBranch {
  std::vector<BranchVertex> vertices;
  std::vector<Eigen::Vector3d> unwrapped;  // continuous lift of the parameters
  std::vector<Pinch> pinches;
  int orientation = 0;  // +1 if the trace direction is the positive orientation
  int middle = -1;      // affine: index of the hit between the other two
  double length = 0;
};

namespace detail {

template <typename T>
Eigen::Matrix<T, 2, 1> collinear3(const SecantProblem& pb, const Eigen::Matrix<T, 3, 1>& t) {
  using std::sqrt;
  Eigen::Matrix<T, 2, 1> r;
  if (pb.space == Space::Affine) {
    std::array<Vec3T<T>, 3> p;
    for (int i = 0; i < 3; ++i) p[i] = pb.curves[i].hpoint(t(i)).template tail<3>();
    Vec3T<T> v = p[1] - p[0];
    T n = sqrt(v.squaredNorm());
    if (value_of(n) < 1e-9) throw Error(ErrorKind::DegenerateChord, "chord endpoints coincide");
    Vec3T<T> d = v / n;
    Vec3 dv(value_of(d(0)), value_of(d(1)), value_of(d(2)));
    auto [n1, n2] = orthonormal_completion<T>(d, least_aligned_axis(dv));
    r << n1.dot(p[2] - p[0]), n2.dot(p[2] - p[0]);
    return r;
  }
  std::array<Vec4T<T>, 3> x;
  for (int i = 0; i < 3; ++i) x[i] = detail::unit<T>(pb.curves[i].hpoint(t(i)));
  Vec4T<T> u1 = x[0];
  Vec4T<T> v = x[1] - u1 * u1.dot(x[1]);
  T vn = sqrt(v.squaredNorm());
  if (value_of(vn) < 1e-9) throw Error(ErrorKind::DegenerateChord, "chord endpoints coincide");
  Vec4T<T> u2 = v / vn;
  Vec4 a, b;
  for (int i = 0; i < 4; ++i) {
    a(i) = value_of(u1(i));
    b(i) = value_of(u2(i));
  }
  auto nc = plane_complement(a, b);
  Vec4T<T> z = x[2] - u1 * u1.dot(x[2]) - u2 * u2.dot(x[2]);
  r << nc[0].template cast<T>().dot(z), nc[1].template cast<T>().dot(z);
  return r;
}

inline void secant_jacobian(const SecantProblem& pb, const Eigen::Vector3d& t, Eigen::Vector2d& val,
                            Eigen::Matrix<double, 2, 3>& jac) {
  auto f = [&](const auto& s) {
    using T = typename std::decay_t<decltype(s)>::Scalar;
    return collinear3<T>(pb, s);
  };
  eval_with_jacobian<2, 3>(f, t, val, jac);
}

/// Minimum-norm Gauss-Newton onto the secant curve.
inline std::optional<Eigen::Vector3d> project_to_secants(const SecantProblem& pb, Eigen::Vector3d t,
                                                         int iters = 30) {
  Eigen::Vector2d r;
  Eigen::Matrix<double, 2, 3> j;
  try {
    for (int k = 0; k < iters; ++k) {
      secant_jacobian(pb, t, r, j);
      if (r.norm() < pb.config.corrector_tol) return t;
      Eigen::Vector3d step = j.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(r);
      if (step.norm() > 0.1) step *= 0.1 / step.norm();
      t -= step;
    }
    secant_jacobian(pb, t, r, j);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (r.norm() < 1e-10) return t;
  return std::nullopt;
}

/// Newton on the secant equations plus the hyperplane through `xp` normal to `v`.
inline std::optional<Eigen::Vector3d> correct(const SecantProblem& pb, const Eigen::Vector3d& xp,
                                              const Eigen::Vector3d& v) {
  Eigen::Vector3d x = xp;
  Eigen::Vector2d r;
  Eigen::Matrix<double, 2, 3> j;
  try {
    for (int k = 0; k < pb.config.corrector_iter; ++k) {
      secant_jacobian(pb, x, r, j);
      Eigen::Vector3d f;
      f << r, v.dot(x - xp);
      if (f.norm() < pb.config.corrector_tol) return x;
      Eigen::Matrix3d a;
      a << j, v.transpose();
      Eigen::Vector3d step = a.fullPivLu().solve(f);
      if (!step.allFinite()) return std::nullopt;
      x -= step;
    }
    secant_jacobian(pb, x, r, j);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (r.norm() < 1e2 * pb.config.corrector_tol) return x;
  return std::nullopt;
}

inline Eigen::Vector3d secant_tangent_at(const SecantProblem& pb, const Eigen::Vector3d& t, double* gap = nullptr) {
  Eigen::Vector2d r;
  Eigen::Matrix<double, 2, 3> j;
  secant_jacobian(pb, t, r, j);
  return null_vector<2>(j, gap);
}

inline double torus_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  double s = 0;
  for (int i = 0; i < 3; ++i) s += std::pow(circle_distance(a(i), b(i)), 2);
  return std::sqrt(s);
}

}  // namespace detail

/// Jets, tangent-line coplanarity and regularity class at a collinear triple.
inline PointedSecant pointed_secant(const SecantProblem& pb, const Eigen::Vector3d& t) {
  PointedSecant ps;
  ps.t = t;
  for (int i = 0; i < 3; ++i) {
    Vec4 x = pb.curves[i].hpoint(t(i));
    double n = x.norm();
    ps.x[i] = x / n;
    ps.w[i] = pb.curves[i].oriented_htangent(t(i)) / n;
  }
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    Eigen::Matrix4d m;
    m << ps.x[j], ps.w[j], ps.x[k], ps.w[k];
    ps.cop[i] = m.determinant() / (ps.w[j].norm() * ps.w[k].norm());
  }
  ps.tangent = detail::secant_tangent_at(pb, t);
  // express the tangent in oriented parameters
  for (int i = 0; i < 3; ++i) ps.tangent(i) *= pb.curves[i].orientation();
  int coplanar = 0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(ps.cop[i]) <= pb.config.tau_cop) {
      ++coplanar;
      ps.special = i;
    }
  if (coplanar == 0) {
    ps.cls = Regularity::Regular;
    ps.special = -1;
  } else if (coplanar == 1) {
    ps.cls = Regularity::AlmostRegular;
  } else {
    ps.cls = Regularity::Degenerate;
  }
  return ps;
}

/// Regularity class with the second-order test at almost-regular secants:
/// the special tangent component must cross zero linearly along the curve
/// of secants.
inline PointedSecant classify_secant(const SecantProblem& pb, const Eigen::Vector3d& t) {
  PointedSecant ps = pointed_secant(pb, t);
  if (ps.cls != Regularity::AlmostRegular) return ps;
  const int k = ps.special;
  const double h = 1e-4;
  std::array<double, 2> comp{};
  for (int s = 0; s < 2; ++s) {
    Eigen::Vector3d dir = (s == 0 ? 1.0 : -1.0) * detail::secant_tangent_at(pb, t);
    auto y = detail::correct(pb, t + h * dir, dir);
    if (!y) {
      ps.cls = Regularity::Degenerate;
      return ps;
    }
    Eigen::Vector3d v = detail::secant_tangent_at(pb, *y);
    if (v.dot(dir) * (s == 0 ? 1.0 : -1.0) < 0) v = -v;
    comp[s] = v(k);
  }
  double slope = (comp[0] - comp[1]) / (2 * h);
  if (std::abs(slope) <= pb.config.tau_quad) ps.cls = Regularity::Degenerate;
  return ps;
}

namespace detail {

inline BranchVertex make_vertex(const SecantProblem& pb, const Eigen::Vector3d& t, const Eigen::Vector3d& dir) {
  BranchVertex v;
  for (int i = 0; i < 3; ++i) v.t(i) = wrap01(t(i));
  v.tangent = dir;
  PointedSecant ps = pointed_secant(pb, t);
  v.cop = ps.cop;
  v.regular = ps.cls == Regularity::Regular;
  for (int i = 0; i < 3; ++i) {
    double ti = dir(i) * pb.curves[i].orientation();
    v.sign_products[i] = sign_of(ps.cop[i]) * sign_of(ti);
    v.regular = v.regular && std::abs(ti) > 1e-9;
  }
  if (v.regular) {
    v.orientation = v.sign_products[0];
    if (v.sign_products[1] != v.orientation || v.sign_products[2] != v.orientation)
      throw Error(ErrorKind::OrientationInconsistent, "sign products disagree at a regular secant");
  }
  return v;
}

/// Spatial hash of traced vertices on the parameter 3-torus.
class VertexIndex {
 public:
  explicit VertexIndex(int cells) : n_(cells) {}
  void add(const Eigen::Vector3d& t) {
    pts_.push_back(t);
    cells_[key(cell_of(t))].push_back(static_cast<int>(pts_.size()) - 1);
  }
  bool near(const Eigen::Vector3d& t, double radius) const {
    auto c = cell_of(t);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (int i : it->second)
            if (torus_distance(pts_[i], t) < radius) return true;
        }
    return false;
  }

 private:
  std::array<int, 3> cell_of(const Eigen::Vector3d& t) const {
    return {static_cast<int>(std::floor(wrap01(t(0)) * n_)), static_cast<int>(std::floor(wrap01(t(1)) * n_)),
            static_cast<int>(std::floor(wrap01(t(2)) * n_))};
  }
  long long key(std::array<int, 3> c) const {
    long long k = 0;
    for (int v : c) k = k * n_ + ((v % n_) + n_) % n_;
    return k;
  }
  int n_;
  std::vector<Eigen::Vector3d> pts_;
  std::unordered_map<long long, std::vector<int>> cells_;
};

/// Seeds on the secant curve from a grid on (t1, t2) with t3 at local
/// minima of distance to the chord.
inline std::vector<Eigen::Vector3d> secant_seeds(const SecantProblem& pb) {
  const auto& cfg = pb.config;
  const int g = cfg.grid;
  const bool affine = pb.space == Space::Affine;
  double threshold = 2.0 * cfg.seed_threshold;
  if (affine) {
    std::vector<ClosedCurve> cs(pb.curves.begin(), pb.curves.end());
    threshold = cfg.seed_threshold * std::max(1.0, scene_extent(cs, 128));
  }
  auto samples = pb.curves[2].hsample(cfg.chord_samples);
  std::vector<std::vector<Eigen::Vector3d>> per(g * g);
  parallel_for(g * g, cfg.threads, [&](int idx) {
    double t1 = static_cast<double>(idx / g) / g, t2 = static_cast<double>(idx % g) / g;
    auto chord = ChordGeometry::make(affine, pb.curves[0].hpoint(t1), pb.curves[1].hpoint(t2), 1e-9);
    if (!chord) return;
    for (double t3 : chord_candidates(samples, *chord, threshold, {})) {
      auto y = project_to_secants(pb, Eigen::Vector3d(t1, t2, t3));
      if (y) per[idx].push_back(*y);
    }
  });
  std::vector<Eigen::Vector3d> out;
  for (auto& v : per)
    for (auto& y : v) out.push_back(y);
  return out;
}

/// Index of the middle hit along an affine line.
inline int middle_index(const SecantProblem& pb, const Eigen::Vector3d& t) {
  std::array<Point3, 3> p;
  for (int i = 0; i < 3; ++i) p[i] = pb.curves[i].eval(t(i));
  Vec3 d = (p[1] - p[0]).normalized();
  std::array<double, 3> s;
  for (int i = 0; i < 3; ++i) s[i] = d.dot(p[i] - p[0]);
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    if ((s[i] - s[j]) * (s[i] - s[k]) < 0) return i;
  }
  return -1;
}

/// Locate a zero of cop[pair] on the secant curve between two vertices.
inline std::optional<Eigen::Vector3d> bisect_pinch(const SecantProblem& pb, const Eigen::Vector3d& a,
                                                   const Eigen::Vector3d& b, int pair) {
  auto value = [&](const Eigen::Vector3d& t) { return pointed_secant(pb, t).cop[pair]; };
  Eigen::Vector3d lo = a, hi = b;
  double flo = value(lo);
  Eigen::Vector3d dir = (b - a).normalized();
  for (int it = 0; it < 60; ++it) {
    Eigen::Vector3d mid = 0.5 * (lo + hi);
    auto y = correct(pb, mid, dir);
    if (!y) return std::nullopt;
    double fm = value(*y);
    if ((fm < 0) == (flo < 0)) {
      lo = *y;
      flo = fm;
    } else {
      hi = *y;
    }
    if ((hi - lo).norm() < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Predictor-corrector trace of the closed curve of secants through `seed`.
inline SecantBranch trace_branch(const SecantProblem& pb, const Eigen::Vector3d& seed) {
  const auto& cfg = pb.config;
  SecantBranch br;
  double gap = 0;
  Eigen::Vector3d v = detail::secant_tangent_at(pb, seed, &gap);
  if (gap < 1e-10) throw Error(ErrorKind::DegenerateSecant, "collinearity Jacobian is rank deficient at the seed");
  const Eigen::Vector3d v0 = v;
  Eigen::Vector3d x = seed;
  br.vertices.push_back(detail::make_vertex(pb, x, v));
  br.unwrapped.push_back(x);
  double h = cfg.h0;
  for (long step = 0; step < cfg.max_steps; ++step) {
    auto y = detail::correct(pb, x + h * v, v);
    Eigen::Vector3d nv;
    bool ok = false;
    if (y && (*y - x).norm() < 2 * h) {
      nv = detail::secant_tangent_at(pb, *y, &gap);
      if (nv.dot(v) < 0) nv = -nv;
      ok = nv.dot(v) > 0.95 && gap > 1e-10;
    }
    if (!ok) {
      h *= 0.5;
      if (h < cfg.h_min) throw Error(ErrorKind::DegenerateSecant, "continuation step collapsed");
      continue;
    }
    br.length += (*y - x).norm();
    x = *y;
    v = nv;
    Eigen::Vector3d d = x - seed;
    for (int i = 0; i < 3; ++i) d(i) -= std::round(d(i));
    if (br.length > 4 * cfg.h_max && d.norm() < std::max(1.5 * h, 0.5 * cfg.h_max) && v.dot(v0) > 0) return br;
    br.vertices.push_back(detail::make_vertex(pb, x, v));
    br.unwrapped.push_back(x);
    h = std::min(1.5 * h, cfg.h_max);
  }
  throw Error(ErrorKind::BranchNotClosed, "continuation budget exhausted");
}

/// Orientation sign of the branch relative to its trace direction, and the
/// pinch points where a pair of tangent lines becomes coplanar.
inline void orient_branch(const SecantProblem& pb, SecantBranch& br) {
  int o = 0;
  for (const auto& v : br.vertices) {
    if (!v.regular) continue;
    if (o == 0) o = v.orientation;
    if (v.orientation != o) throw Error(ErrorKind::OrientationInconsistent, "orientation flips along a branch");
  }
  br.orientation = o;
  br.pinches.clear();
  const int n = static_cast<int>(br.vertices.size());
  for (int a = 0; a < n; ++a) {
    int b = (a + 1) % n;
    for (int pair = 0; pair < 3; ++pair) {
      const auto& va = br.vertices[a];
      const auto& vb = br.vertices[b];
      if (sign_of(va.cop[pair]) == sign_of(vb.cop[pair])) continue;
      Eigen::Vector3d ta = br.unwrapped[a];
      Eigen::Vector3d tb = br.unwrapped[b];
      if (b == 0) {
        Eigen::Vector3d d = tb - ta;
        for (int i = 0; i < 3; ++i) d(i) -= std::round(d(i));
        tb = ta + d;
      }
      Pinch p;
      auto z = detail::bisect_pinch(pb, ta, tb, pair);
      if (z) {
        p.t = *z;
        p.cls = classify_secant(pb, *z).cls;
      }
      p.special = pair;
      p.lk_before = sign_of(va.cop[pair]);
      p.lk_after = sign_of(vb.cop[pair]);
      for (int i = 0; i < 3; ++i) p.t(i) = wrap01(p.t(i));
      p.product_before = va.sign_products[pair];
      p.product_after = vb.sign_products[pair];
      br.pinches.push_back(p);
    }
  }
  if (pb.space == Space::Affine && !br.vertices.empty()) br.middle = detail::middle_index(pb, br.unwrapped[0]);
}

/// All branches of common secants of the three curves, oriented.
inline std::vector<SecantBranch> trace_branches(const SecantProblem& pb) {
  auto seeds = detail::secant_seeds(pb);
  detail::VertexIndex index(64);
  std::vector<SecantBranch> out;
  const double radius = 1.5 * pb.config.h_max;
  for (const auto& s : seeds) {
    if (index.near(s, radius)) continue;
    SecantBranch br = trace_branch(pb, s);
    for (const auto& v : br.vertices) index.add(v.t);
    orient_branch(pb, br);
    out.push_back(std::move(br));
  }
  return out;
}

struct SectionDegree {
  int degree = 0;
  double value = 0;  // the regular value t*
  int preimages = 0;
};

/// Signed count of preimages of t* under the section map P_i -> C_i. Affine
/// problems count only secants with p2 between p1 and p3.
inline std::optional<SectionDegree> section_degree_at(const SecantProblem& pb,
                                                      const std::vector<SecantBranch>& branches, int i,
                                                      double tstar) {
  SectionDegree sd;
  sd.value = tstar;
  for (const auto& br : branches) {
    if (pb.space == Space::Affine && br.middle != 1) continue;
    const int n = static_cast<int>(br.vertices.size());
    for (int a = 0; a < n; ++a) {
      int b = (a + 1) % n;
      double ta = br.vertices[a].t(i), tb = br.vertices[b].t(i);
      double d = tb - ta;
      d -= std::round(d);
      double off = wrap01(tstar - ta);
      bool cross = (d > 0 && off > 0 && off <= d) || (d < 0 && off > 0 && off - 1.0 >= d) ||
                   (d < 0 && off == 0);
      if (!cross) continue;
      const auto& va = br.vertices[a];
      const auto& vb = br.vertices[b];
      if (!va.regular || !vb.regular) return std::nullopt;
      sd.degree += br.orientation * sign_of(d) * pb.curves[i].orientation();
      ++sd.preimages;
    }
  }
  return sd;
}

/// Degree of P_i -> C_i at a regular value drawn from a seeded generator.
inline SectionDegree section_degree(const SecantProblem& pb, const std::vector<SecantBranch>& branches, int i,
                                    unsigned seed = 5, int retries = 100) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < retries; ++k) {
    auto sd = section_degree_at(pb, branches, i, u(rng));
    if (sd) return *sd;
  }
  throw Error(ErrorKind::NoRegularValue, "no regular value found for the section map");
}

/// Mesh of the swept surface: quads over branch vertices x fiber samples.
struct SweptSurface {
  Space space = Space::Projective;
  std::vector<Vec4> vertices;               // homogeneous
  std::vector<std::array<int, 4>> faces;    // counter-clockwise for the surface orientation
  std::vector<int> face_branch;
  std::vector<int> face_strip;              // projective: 0 = S12, 1 = S23, 2 = S31; affine: 0
  std::vector<std::array<std::vector<int>, 3>> sections;  // per branch: vertex loops of P1, P2, P3
  int fiber = 64;
};

/// Projective fibers use X(theta) = cos(theta) X1' + sin(theta) X3' with X1',
/// X3' scaled so that X2 = X1' + X3': P1, P2, P3 sit at theta = 0, pi/4, pi/2.
/// Affine fibers are the rays [p3, p3 + reach (p3 - p1)/|p3 - p1|].
inline SweptSurface build_swept_surface(const SecantProblem& pb, const std::vector<SecantBranch>& branches,
                                        int fiber = 64, double reach = 2.0) {
  if (fiber % 4 != 0 || fiber < 8) throw Error(ErrorKind::InvalidInput, "fiber resolution must be a multiple of 4");
  SweptSurface s;
  s.space = pb.space;
  s.fiber = fiber;
  for (int bi = 0; bi < static_cast<int>(branches.size()); ++bi) {
    const auto& br = branches[bi];
    if (pb.space == Space::Affine && br.middle != 1) continue;
    const int m = static_cast<int>(br.vertices.size());
    const int rows = pb.space == Space::Projective ? fiber : fiber + 1;
    const int base = static_cast<int>(s.vertices.size());
    std::array<std::vector<int>, 3> sec;
    for (int a = 0; a < m; ++a) {
      const Eigen::Vector3d& t = br.unwrapped[a];
      Vec4 x1 = pb.curves[0].hpoint(t(0)), x2 = pb.curves[1].hpoint(t(1)), x3 = pb.curves[2].hpoint(t(2));
      if (pb.space == Space::Projective) {
        Eigen::Vector2d ab = detail::span_coords(x1, x3, x2);
        Vec4 p = ab(0) * x1, q = ab(1) * x3;
        for (int k = 0; k < fiber; ++k) {
          double th = kPi * k / fiber;
          s.vertices.push_back((std::cos(th) * p + std::sin(th) * q).normalized());
        }
        sec[0].push_back(base + a * rows);
        sec[1].push_back(base + a * rows + fiber / 4);
        sec[2].push_back(base + a * rows + fiber / 2);
      } else {
        Point3 p1 = x1.tail<3>(), p3 = x3.tail<3>();
        Vec3 d = (p3 - p1).normalized();
        for (int k = 0; k <= fiber; ++k) s.vertices.push_back(to_homogeneous(p3 + reach * k / fiber * d));
        sec[2].push_back(base + a * rows);
      }
    }
    s.sections.push_back(sec);
    for (int a = 0; a < m; ++a) {
      int b = (a + 1) % m;
      for (int k = 0; k < fiber; ++k) {
        int k1 = pb.space == Space::Projective ? (k + 1) % fiber : k + 1;
        std::array<int, 4> f = {base + a * rows + k, base + b * rows + k, base + b * rows + k1, base + a * rows + k1};
        if (br.orientation < 0) std::swap(f[1], f[3]);
        s.faces.push_back(f);
        s.face_branch.push_back(bi);
        int strip = 0;
        if (pb.space == Space::Projective) strip = k < fiber / 4 ? 0 : (k < fiber / 2 ? 1 : 2);
        s.face_strip.push_back(strip);
      }
    }
  }
  return s;
}

/// Oriented boundary edges (from, to) of the faces selected by `keep`.
template <typename Pred>
std::vector<std::pair<int, int>> boundary_edges(const SweptSurface& s, Pred keep) {
  std::map<std::pair<int, int>, int> count;
  for (size_t f = 0; f < s.faces.size(); ++f) {
    if (!keep(static_cast<int>(f))) continue;
    for (int e = 0; e < 4; ++e) {
      int a = s.faces[f][e], b = s.faces[f][(e + 1) % 4];
      count[{a, b}] += 1;
    }
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& [e, c] : count)
    if (!count.count({e.second, e.first})) out.push_back(e);
  return out;
}

/// V - E + F of the faces of one branch.
inline int euler_characteristic(const SweptSurface& s, int branch) {
  std::set<int> verts;
  std::set<std::pair<int, int>> edges;
  int faces = 0;
  for (size_t f = 0; f < s.faces.size(); ++f) {
    if (s.face_branch[f] != branch) continue;
    ++faces;
    for (int e = 0; e < 4; ++e) {
      int a = s.faces[f][e], b = s.faces[f][(e + 1) % 4];
      verts.insert(a);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return static_cast<int>(verts.size()) - static_cast<int>(edges.size()) + faces;
}

/// OBJ with homogeneous vertices "v x y z w" and 1-based quad faces.
inline void export_mesh(const SweptSurface& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  char buf[160];
  for (const auto& v : s.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g %.17g\n", v(1), v(2), v(3), v(0));
    out << buf;
  }
  int last = -1;
  for (size_t f = 0; f < s.faces.size(); ++f) {
    if (s.face_branch[f] != last) {
      last = s.face_branch[f];
      out << "o branch_" << last << "\n";
    }
    out << "f " << s.faces[f][0] + 1 << " " << s.faces[f][1] + 1 << " " << s.faces[f][2] + 1 << " "
        << s.faces[f][3] + 1 << "\n";
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

/// Vertices of an OBJ file as homogeneous (w, x, y, z); a missing w is 1.
inline std::vector<Vec4> import_obj_vertices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::vector<Vec4> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() < 2 || line[0] != 'v' || line[1] != ' ') continue;
    std::istringstream ss(line.substr(2));
    double x, y, z, w = 1.0;
    if (!(ss >> x >> y >> z)) throw Error(ErrorKind::Io, "malformed vertex line");
    ss >> w;
    out.emplace_back(w, x, y, z);
  }
  return out;
}

}  // namespace secantlink
