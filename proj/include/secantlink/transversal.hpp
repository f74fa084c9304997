#pragma once

#include "secantlink/curve.hpp"
#include "secantlink/geometry.hpp"
#include "secantlink/numerics.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <vector>

namespace secantlink {

struct SolverConfig {
  int grid = 64;              // seeds per (t1, t2) axis
  int chord_samples = 256;    // samples per curve for chord projection
  double seed_threshold = 0.1;
  double tol_res = 1e-10;
  int max_iter = 50;
  double dedupe_radius = 1e-6;
  double delta_rep = 1e-3;
  double delta_ord = 1e-6;
  double eps_pt = 1e-9;
  double five_point_tol = 1e-7;
  double tau_cop = 1e-6;
  double kappa_max = 1e10;
  long long seed_budget = 4'000'000;
  bool check_order = true;  // false keeps lines in every visiting order
  int threads = 1;
};

struct TransversalProblem {
  std::vector<ClosedCurve> curves;
  OrderSpec spec;
  Space space = Space::Affine;
  SolverConfig config;

  const ClosedCurve& slot_curve(int slot) const { return curves.at(spec.slots.at(slot)); }

  void validate() const {
    if (spec.size() != 4) throw Error(ErrorKind::InvalidInput, "line problems have four slots");
    for (int s : spec.slots)
      if (s < 0 || s >= static_cast<int>(curves.size())) throw Error(ErrorKind::InvalidInput, "slot out of range");
    if (space == Space::Affine) {
      if (spec.mode != OrderMode::Linear) throw Error(ErrorKind::InvalidInput, "affine problems use a linear order");
      for (const auto& c : curves)
        if (!c.is_affine()) throw Error(ErrorKind::InvalidInput, c.name() + " is not an affine curve");
    }
  }
};

struct Hit {
  int slot = 0;
  int curve = 0;
  double t = 0;
  Vec4 hpoint;      // unit homogeneous point
  Vec4 htangent;    // oriented tangent of hpoint
  std::optional<Point3> point;
  double s = 0;     // line parameter, or RP^1 angle / pi in [0,1) for projective lines
};

struct Transversal {
  Eigen::Matrix<double, 6, 1> plucker;
  std::optional<Line3> line;  // absent for the line at infinity
  std::vector<Hit> hits;
  bool order_ok = true;
  int weight = 0;
  double cond = 0;
  double residual = 0;

  std::vector<double> params() const {
    std::vector<double> p;
    for (const auto& h : hits) p.push_back(h.t);
    return p;
  }
};

namespace detail {

template <typename T>
Vec4T<T> unit(const Vec4T<T>& x) {
  using std::sqrt;
  return x / sqrt(x.squaredNorm());
}

}  // namespace detail

/// Collinearity residual of four affine points p_i = C_{slot i}(t_i).
template <typename T>
Eigen::Matrix<T, 4, 1> residual4(const TransversalProblem& pb, const Eigen::Matrix<T, 4, 1>& t) {
  using std::sqrt;
  std::array<Vec3T<T>, 4> p;
  for (int i = 0; i < 4; ++i) p[i] = pb.slot_curve(i).hpoint(t(i)).template tail<3>();
  Vec3T<T> v = p[1] - p[0];
  T n = sqrt(v.squaredNorm());
  if (value_of(n) < pb.config.eps_pt) throw Error(ErrorKind::DegenerateChord, "chord endpoints coincide");
  Vec3T<T> d = v / n;
  Vec3 dv(value_of(d(0)), value_of(d(1)), value_of(d(2)));
  auto [n1, n2] = orthonormal_completion<T>(d, least_aligned_axis(dv));
  Eigen::Matrix<T, 4, 1> r;
  r << n1.dot(p[2] - p[0]), n2.dot(p[2] - p[0]), n1.dot(p[3] - p[0]), n2.dot(p[3] - p[0]);
  return r;
}

/// Chart-free residual on S^3: the components of X3 and X4 orthogonal to
/// span(X1, X2), read against two fixed complement vectors.
template <typename T>
Eigen::Matrix<T, 4, 1> residual_projective(const TransversalProblem& pb, const Eigen::Matrix<T, 4, 1>& t) {
  using std::sqrt;
  std::array<Vec4T<T>, 4> x;
  for (int i = 0; i < 4; ++i) x[i] = detail::unit<T>(pb.slot_curve(i).hpoint(t(i)));
  Vec4T<T> u1 = x[0];
  Vec4T<T> v = x[1] - u1 * u1.dot(x[1]);
  T vn = sqrt(v.squaredNorm());
  if (value_of(vn) < pb.config.eps_pt) throw Error(ErrorKind::DegenerateChord, "chord endpoints coincide");
  Vec4T<T> u2 = v / vn;
  Vec4 a, b;
  for (int i = 0; i < 4; ++i) {
    a(i) = value_of(u1(i));
    b(i) = value_of(u2(i));
  }
  auto nc = plane_complement(a, b);
  Eigen::Matrix<T, 4, 1> r;
  for (int k = 0; k < 2; ++k) {
    Vec4T<T> z = x[2 + k] - u1 * u1.dot(x[2 + k]) - u2 * u2.dot(x[2 + k]);
    r(2 * k) = nc[0].template cast<T>().dot(z);
    r(2 * k + 1) = nc[1].template cast<T>().dot(z);
  }
  return r;
}

namespace detail {

using Vec4d = Eigen::Matrix<double, 4, 1>;

inline NewtonResult<4> newton4(const TransversalProblem& pb, const Vec4d& x0) {
  NewtonOptions opt;
  opt.max_iter = pb.config.max_iter;
  opt.tol = pb.config.tol_res;
  auto f = [&](const auto& t) {
    using T = typename std::decay_t<decltype(t)>::Scalar;
    return pb.space == Space::Affine ? residual4<T>(pb, t) : residual_projective<T>(pb, t);
  };
  return damped_newton<4>(f, x0, opt);
}

/// Distance from a point to the line through a and b: Euclidean for affine
/// problems, the sine distance on S^3 for projective ones.
struct ChordGeometry {
  bool affine = true;
  Point3 a3;
  Vec3 d3;
  Vec4 u1, u2;

  static std::optional<ChordGeometry> make(bool affine, const Vec4& xa, const Vec4& xb, double eps) {
    ChordGeometry g;
    g.affine = affine;
    if (affine) {
      g.a3 = xa.tail<3>() / xa(0);
      Vec3 v = xb.tail<3>() / xb(0) - g.a3;
      if (v.norm() < eps) return std::nullopt;
      g.d3 = v.normalized();
    } else {
      g.u1 = xa.normalized();
      Vec4 v = xb.normalized() - g.u1 * g.u1.dot(xb.normalized());
      if (v.norm() < eps) return std::nullopt;
      g.u2 = v.normalized();
    }
    return g;
  }

  double distance(const Vec4& x) const {
    if (affine) {
      Vec3 w = x.tail<3>() / x(0) - a3;
      return (w - d3 * d3.dot(w)).norm();
    }
    Vec4 y = x.normalized();
    return (y - u1 * u1.dot(y) - u2 * u2.dot(y)).norm();
  }
};

/// Curve parameters whose samples are local minima of distance to the chord
/// below `threshold`, skipping samples near excluded parameters.
inline std::vector<double> chord_candidates(const std::vector<Vec4>& samples, const ChordGeometry& g,
                                            double threshold, const std::vector<double>& excluded) {
  const int n = static_cast<int>(samples.size());
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = g.distance(samples[i]);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double prev = d[(i + n - 1) % n], next = d[(i + 1) % n];
    if (d[i] >= threshold || d[i] > prev || d[i] > next) continue;
    double t = static_cast<double>(i) / n;
    bool skip = false;
    for (double e : excluded) skip = skip || circle_distance(t, e) < 2.5 / n;
    if (!skip) out.push_back(t);
  }
  return out;
}

inline double scene_diameter(const TransversalProblem& pb) {
  std::vector<ClosedCurve> used;
  for (int s : pb.spec.slots) used.push_back(pb.curves[s]);
  return scene_extent(used, 128);
}

struct RawRoot {
  Vec4d t;
  double residual = 0;
  double cond = 0;
  double min_singular = 0;
};

inline std::vector<std::vector<Vec4>> slot_samples(const TransversalProblem& pb) {
  std::vector<std::vector<Vec4>> out;
  for (int i = 0; i < 4; ++i) out.push_back(pb.slot_curve(i).hsample(pb.config.chord_samples));
  return out;
}

/// Multistart Newton over the seed grid. Converged roots are returned per
/// seed in seed order.
inline std::vector<RawRoot> multistart(const TransversalProblem& pb) {
  const auto& cfg = pb.config;
  const int g = cfg.grid;
  const bool affine = pb.space == Space::Affine;
  const double threshold = affine ? cfg.seed_threshold * std::max(1.0, scene_diameter(pb)) : 2.0 * cfg.seed_threshold;
  auto samples = slot_samples(pb);
  const auto& sl = pb.spec.slots;

  struct Seed {
    Vec4d x;
  };
  std::vector<std::vector<Seed>> seeds(g * g);
  parallel_for(g * g, cfg.threads, [&](int idx) {
    double t1 = static_cast<double>(idx / g) / g, t2 = static_cast<double>(idx % g) / g;
    if (sl[0] == sl[1] && circle_distance(t1, t2) < 1.5 / g) return;
    Vec4 x1 = pb.slot_curve(0).hpoint(t1), x2 = pb.slot_curve(1).hpoint(t2);
    auto chord = ChordGeometry::make(affine, x1, x2, cfg.eps_pt);
    if (!chord) return;
    std::array<std::vector<double>, 2> cand;
    for (int k = 2; k < 4; ++k) {
      std::vector<double> excl;
      if (sl[k] == sl[0]) excl.push_back(t1);
      if (sl[k] == sl[1]) excl.push_back(t2);
      cand[k - 2] = chord_candidates(samples[k], *chord, threshold, excl);
    }
    for (double a : cand[0])
      for (double b : cand[1]) {
        if (sl[2] == sl[3] && circle_distance(a, b) < 2.5 / cfg.chord_samples) continue;
        seeds[idx].push_back({Vec4d(t1, t2, a, b)});
      }
  });
  long long total = 0;
  for (const auto& s : seeds) total += static_cast<long long>(s.size());
  if (total > cfg.seed_budget)
    throw Error(ErrorKind::SeedBudgetExceeded, std::to_string(total) + " seeds exceed the budget");

  std::vector<std::vector<RawRoot>> per(g * g);
  parallel_for(g * g, cfg.threads, [&](int idx) {
    for (const auto& s : seeds[idx]) {
      auto r = newton4(pb, s.x);
      if (!r.converged) continue;
      Vec4d t = r.x;
      for (int i = 0; i < 4; ++i) t(i) = pb.slot_curve(i).is_affine() ? wrap01(t(i)) : t(i) - std::floor(t(i));
      per[idx].push_back({t, r.residual, r.cond, r.min_singular});
    }
  });
  std::vector<RawRoot> out;
  for (auto& v : per)
    for (auto& r : v) out.push_back(r);
  return out;
}

/// Line parameter of each hit: the Euclidean coordinate along the line, or
/// the RP^1 angle / pi measured from the first hit.
inline void assign_line_parameters(Transversal& tr, bool affine) {
  if (affine) {
    for (auto& h : tr.hits) h.s = tr.line->param_of(*h.point);
    return;
  }
  Vec4 u = tr.hits[0].hpoint;
  Vec4 v = tr.hits[1].hpoint - u * u.dot(tr.hits[1].hpoint);
  v.normalize();
  for (auto& h : tr.hits) {
    double a = std::atan2(v.dot(h.hpoint), u.dot(h.hpoint));
    h.s = wrap01(a / kPi);
  }
}

inline Transversal make_transversal(const TransversalProblem& pb, const RawRoot& r) {
  Transversal tr;
  tr.residual = r.residual;
  tr.cond = r.cond;
  for (int i = 0; i < 4; ++i) {
    const auto& c = pb.slot_curve(i);
    Hit h;
    h.slot = i;
    h.curve = pb.spec.slots[i];
    h.t = r.t(i);
    Vec4 x = c.hpoint(h.t);
    Vec4 w = c.oriented_htangent(h.t);
    double n = x.norm();
    h.hpoint = x / n;
    h.htangent = w / n;
    if (std::abs(x(0)) > 1e-12) h.point = Point3(x.tail<3>() / x(0));
    tr.hits.push_back(h);
  }
  tr.plucker = plucker6(tr.hits[0].hpoint, tr.hits[1].hpoint);
  if (tr.hits[0].point && tr.hits[1].point && (*tr.hits[0].point - *tr.hits[1].point).norm() > 1e-12) {
    tr.line = line_through(*tr.hits[0].point, *tr.hits[1].point, 0.0);
  } else if (tr.hits[2].point && tr.hits[3].point && (*tr.hits[2].point - *tr.hits[3].point).norm() > 1e-12) {
    tr.line = line_through(*tr.hits[2].point, *tr.hits[3].point, 0.0);
  }
  bool euclid = pb.space == Space::Affine;
  if (euclid && !tr.line) throw Error(ErrorKind::DegeneratePoints, "affine root without a finite line");
  assign_line_parameters(tr, euclid);
  return tr;
}

/// Hit separation and repeated-slot gap; the order test is separate.
inline bool separated(const TransversalProblem& pb, const Transversal& tr) {
  const auto& cfg = pb.config;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const auto& a = tr.hits[i];
      const auto& b = tr.hits[j];
      double gap = pb.space == Space::Affine ? std::abs(a.s - b.s) : circle_distance(a.s, b.s);
      if (gap <= cfg.delta_ord) return false;
      if (a.curve == b.curve && circle_distance(a.t, b.t) <= cfg.delta_rep) return false;
    }
  return true;
}

inline std::vector<double> line_params(const Transversal& tr) {
  std::vector<double> s;
  for (const auto& h : tr.hits) s.push_back(h.s);
  return s;
}

inline bool on_family(const TransversalProblem& pb, const RawRoot& r) {
  if (!rank_deficient(r.min_singular, r.min_singular * r.cond)) return false;
  NewtonOptions opt;
  opt.max_iter = pb.config.max_iter;
  opt.tol = pb.config.tol_res;
  auto f = [&](const auto& t) {
    using T = typename std::decay_t<decltype(t)>::Scalar;
    return pb.space == Space::Affine ? residual4<T>(pb, t) : residual_projective<T>(pb, t);
  };
  return continues_as_family<4>(f, r.t, opt);
}

/// Smallest distance from the line to `c` away from the excluded parameters,
/// with the parameter attaining it.
inline std::pair<double, double> line_curve_gap(const Transversal& tr, const ClosedCurve& c, bool affine,
                                                const std::vector<double>& excluded, double delta_rep,
                                                int samples = 512) {
  auto g = ChordGeometry::make(affine, tr.hits[0].hpoint, tr.hits[1].hpoint, 0.0);
  if (!g) return {1e300, 0};
  auto dist = [&](double t) {
    Vec4 x = c.hpoint(t);
    return g->distance(x);
  };
  auto near_excluded = [&](double t) {
    for (double e : excluded)
      if (circle_distance(t, e) <= delta_rep) return true;
    return false;
  };
  std::vector<double> d(samples);
  for (int i = 0; i < samples; ++i) d[i] = dist(static_cast<double>(i) / samples);
  double best = 1e300, best_t = 0;
  for (int i = 0; i < samples; ++i) {
    if (d[i] > d[(i + 1) % samples] || d[i] > d[(i + samples - 1) % samples]) continue;
    // golden-section refinement on the bracketing cell
    double lo = static_cast<double>(i - 1) / samples, hi = static_cast<double>(i + 1) / samples;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = dist(a), fb = dist(b);
    for (int it = 0; it < 60; ++it) {
      if (fa < fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = dist(a);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = dist(b);
      }
    }
    double t = 0.5 * (lo + hi);
    double dt = dist(t);
    if (near_excluded(t)) continue;
    if (dt < best) {
      best = dt;
      best_t = wrap01(t);
    }
  }
  return {best, best_t};
}

/// First curve (by index) meeting the root line in a point other than its hits.
inline std::optional<int> fifth_point(const TransversalProblem& pb, const Transversal& tr) {
  std::set<int> used(pb.spec.slots.begin(), pb.spec.slots.end());
  for (int ci : used) {
    std::vector<double> excl;
    for (const auto& h : tr.hits)
      if (h.curve == ci) excl.push_back(h.t);
    auto [gap, t] = line_curve_gap(tr, pb.curves[ci], pb.space == Space::Affine, excl, pb.config.delta_rep);
    if (gap < pb.config.five_point_tol) return ci;
  }
  return std::nullopt;
}

struct SolveOutcome {
  std::vector<Transversal> roots;
  std::vector<RawRoot> raw;  // parallel to roots
  bool family = false;
  std::optional<int> five_point_curve;
};

inline bool lex_less(const Transversal& a, const Transversal& b) {
  for (int i = 0; i < 4; ++i) {
    if (a.hits[i].t != b.hits[i].t) return a.hits[i].t < b.hits[i].t;
  }
  return false;
}

inline bool same_line(const Transversal& a, const Transversal& b, double radius) {
  return (a.plucker - b.plucker).norm() < radius;
}

/// Shared engine for affine and projective problems; never throws on
/// general-position violations, it records them.
inline SolveOutcome solve_raw(const TransversalProblem& pb) {
  pb.validate();
  SolveOutcome out;
  auto raw = multistart(pb);
  for (const auto& r : raw) {
    Transversal tr;
    try {
      tr = make_transversal(pb, r);
    } catch (const Error&) {
      continue;
    }
    if (!separated(pb, tr)) continue;
    bool dup = false;
    for (const auto& o : out.roots) dup = dup || same_line(o, tr, pb.config.dedupe_radius);
    if (dup) continue;
    // families must be detected before the order filter discards members
    if (!out.family && on_family(pb, r)) out.family = true;
    try {
      tr.order_ok = order_of_hits(line_params(tr), pb.spec, pb.config.delta_ord);
    } catch (const Error&) {
      continue;
    }
    if (pb.config.check_order && !tr.order_ok) continue;
    out.roots.push_back(tr);
    out.raw.push_back(r);
  }
  std::vector<int> idx(out.roots.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return lex_less(out.roots[a], out.roots[b]); });
  SolveOutcome sorted;
  sorted.family = out.family;
  for (int i : idx) {
    sorted.roots.push_back(out.roots[i]);
    sorted.raw.push_back(out.raw[i]);
  }
  if (!sorted.family)
    for (const auto& tr : sorted.roots) {
      sorted.five_point_curve = fifth_point(pb, tr);
      if (sorted.five_point_curve) break;
    }
  return sorted;
}

inline void raise_violations(const TransversalProblem& pb, const SolveOutcome& o) {
  if (o.family) throw Error(ErrorKind::NonIsolatedFamily, "a one-parameter family of lines meets the curves");
  if (o.five_point_curve)
    throw Error(ErrorKind::FivePointSecant, "a root meets " + pb.curves[*o.five_point_curve].name() + " again");
}

}  // namespace detail

/// All lines meeting the slot curves in the prescribed linear order, in R^3.
inline std::vector<Transversal> solve_transversals(const TransversalProblem& pb) {
  if (pb.space != Space::Affine) throw Error(ErrorKind::InvalidInput, "use solve_projective for projective problems");
  auto o = detail::solve_raw(pb);
  detail::raise_violations(pb, o);
  return o.roots;
}

/// All projective lines meeting the slot curves in the prescribed cyclic
/// order. Affine curves are embedded in the w = 1 chart.
inline std::vector<Transversal> solve_projective(TransversalProblem pb) {
  if (pb.spec.mode != OrderMode::Cyclic) throw Error(ErrorKind::InvalidInput, "projective problems use a cyclic order");
  pb.space = Space::Projective;
  auto o = detail::solve_raw(pb);
  detail::raise_violations(pb, o);
  return o.roots;
}

/// Quadrisecants of a single closed curve, each reported once.
inline std::vector<Transversal> quadrisecants(const ClosedCurve& k, SolverConfig cfg = {}) {
  TransversalProblem pb;
  pb.curves = {k};
  pb.spec = OrderSpec(OrderMode::Linear, {0, 0, 0, 0});
  pb.space = k.is_affine() ? Space::Affine : Space::Projective;
  if (pb.space == Space::Projective) pb.spec.mode = OrderMode::Cyclic;
  pb.config = cfg;
  auto o = detail::solve_raw(pb);
  detail::raise_violations(pb, o);
  return o.roots;
}

struct RootConditions {
  bool tangent_lines_skew = true;  // pairwise non-coplanar tangent lines
  double min_tangent_coplanarity = 0;
  bool jacobian_regular = true;
  double cond = 0;
  bool no_fifth_point = true;
  bool ok() const { return tangent_lines_skew && jacobian_regular && no_fifth_point; }
};

struct GeneralPositionReport {
  bool isolated = true;
  std::vector<RootConditions> roots;
  bool ok() const {
    if (!isolated) return false;
    for (const auto& r : roots)
      if (!r.ok()) return false;
    return true;
  }
};

/// Normalized coplanarity of the tangent lines at two hits; zero iff coplanar.
inline double tangent_coplanarity(const Hit& a, const Hit& b) {
  Eigen::Matrix4d m;
  m << a.hpoint, a.htangent, b.hpoint, b.htangent;
  double s = a.hpoint.norm() * a.htangent.norm() * b.hpoint.norm() * b.htangent.norm();
  return std::abs(m.determinant()) / s;
}

inline GeneralPositionReport general_position_report(const TransversalProblem& pb,
                                                     const std::vector<Transversal>& roots) {
  GeneralPositionReport rep;
  TransversalProblem q = pb;
  if (q.spec.mode == OrderMode::Cyclic) q.space = Space::Projective;
  auto f = [&](const auto& t) {
    using T = typename std::decay_t<decltype(t)>::Scalar;
    return q.space == Space::Affine ? residual4<T>(q, t) : residual_projective<T>(q, t);
  };
  for (const auto& tr : roots) {
    RootConditions rc;
    rc.min_tangent_coplanarity = 1e300;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        rc.min_tangent_coplanarity = std::min(rc.min_tangent_coplanarity, tangent_coplanarity(tr.hits[i], tr.hits[j]));
    rc.tangent_lines_skew = rc.min_tangent_coplanarity > q.config.tau_cop;
    Eigen::Vector4d t, val;
    for (int i = 0; i < 4; ++i) t(i) = tr.hits[i].t;
    Eigen::Matrix4d j;
    eval_with_jacobian<4, 4>(f, t, val, j);
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(j);
    auto sv = svd.singularValues();
    rc.cond = sv(3) > 0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    rc.jacobian_regular = rc.cond < q.config.kappa_max;
    rc.no_fifth_point = !detail::fifth_point(q, tr).has_value();
    rep.roots.push_back(rc);
  }
  TransversalProblem all = q;
  all.config.check_order = false;
  rep.isolated = !detail::solve_raw(all).family;
  return rep;
}

}  // namespace secantlink
