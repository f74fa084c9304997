#pragma once

#include "secantlink/geometry.hpp"
#include "secantlink/linking.hpp"
#include "secantlink/numerics.hpp"
#include "secantlink/transversal.hpp"
#include "secantlink/weights.hpp"

#include <array>
#include <optional>
#include <random>
#include <vector>

namespace secantlink {

/// Slot value standing for the problem's fixed point.
inline constexpr int kThroughPoint = -1;

/// Global sign fixed once on the chained six-curve scene.
inline constexpr int kCircleCalibration = 1;
inline constexpr const char* kCircleCalibrationId = "chain6-cyclic-123456";

struct CircleConfig {
  int grid = 32;
  int curve_samples = 256;
  double seed_threshold = 0.15;
  double tol_res = 1e-10;
  int max_iter = 60;
  int stall_window = 8;
  double dedupe_radius = 1e-6;
  double delta_rep = 1e-3;
  double delta_ord = 1e-6;
  double eps_area = 1e-12;
  double r_max = 1e3;
  long long seed_budget = 20'000'000;
  bool check_order = true;
  int threads = 1;
};

struct CircleProblem {
  std::vector<ClosedCurve> curves;
  OrderSpec spec;  // cyclic; kThroughPoint marks the fixed point
  std::optional<Point3> through;
  CircleConfig config;

  int size() const { return spec.size(); }
  bool is_fixed(int slot) const { return spec.slots.at(slot) == kThroughPoint; }

  /// Unknown index of each slot, or -1 for the fixed point.
  std::vector<int> unknown_index() const {
    std::vector<int> idx;
    int n = 0;
    for (int s : spec.slots) idx.push_back(s == kThroughPoint ? -1 : n++);
    return idx;
  }
  int unknowns() const {
    int n = 0;
    for (int s : spec.slots) n += s != kThroughPoint;
    return n;
  }

  void validate() const {
    if (spec.mode != OrderMode::Cyclic) throw Error(ErrorKind::InvalidInput, "circle problems use a cyclic order");
    if (size() < 5 || size() > 6) throw Error(ErrorKind::InvalidInput, "circle problems have five or six slots");
    for (int s : spec.slots) {
      if (s == kThroughPoint) {
        if (!through) throw Error(ErrorKind::InvalidInput, "fixed-point slot without a point");
      } else if (s < 0 || s >= static_cast<int>(curves.size())) {
        throw Error(ErrorKind::InvalidInput, "slot out of range");
      } else if (!curves[s].is_affine()) {
        throw Error(ErrorKind::InvalidInput, curves[s].name() + " is not an affine curve");
      }
    }
    if (2 * (size() - 3) != unknowns())
      throw Error(ErrorKind::InvalidInput, "slot count and fixed points do not give a square system");
  }
};

struct CircleHit {
  int slot = 0;
  int curve = 0;  // kThroughPoint for the fixed point
  double t = 0;
  Point3 point;
  Vec3 tangent = Vec3::Zero();  // oriented; zero for the fixed point
  double angle = 0;             // position on the circle, in [0, 1)
};

struct CircleTransversal {
  Circle3 circle;
  std::vector<CircleHit> hits;
  bool order_ok = true;
  int weight = 0;
  double cond = 0;
  double residual = 0;
};

/// Anchor slots of the concyclicity residual.
inline constexpr std::array<int, 3> kAnchors = {0, 2, 4};

/// Concyclicity residual of k points: the circle through the anchor points,
/// and for every other point its plane distance and radial defect.
template <typename T>
std::vector<T> concyclic_residual(const std::vector<Vec3T<T>>& p, double eps_area = 1e-12) {
  using std::sqrt;
  const Vec3T<T>& a = p[kAnchors[0]];
  const Vec3T<T>& b = p[kAnchors[1]];
  const Vec3T<T>& c = p[kAnchors[2]];
  Vec3T<T> cr = (b - a).cross(c - a);
  if (0.5 * std::sqrt(value_of(cr.squaredNorm())) <= eps_area)
    throw Error(ErrorKind::CollinearAnchors, "anchor points are collinear");
  CircleT<T> k = circumcircle<T>(a, b, c);
  std::vector<T> r;
  for (int i = 0; i < static_cast<int>(p.size()); ++i) {
    if (i == kAnchors[0] || i == kAnchors[1] || i == kAnchors[2]) continue;
    Vec3T<T> w = p[i] - k.center;
    T h = k.normal.dot(w);
    Vec3T<T> inplane = w - k.normal * h;
    r.push_back(h);
    r.push_back(sqrt(inplane.squaredNorm()) - k.radius);
  }
  return r;
}

/// residual6 and its fixed-point variants: N unknown curve parameters.
template <int N, typename T>
Eigen::Matrix<T, N, 1> circle_residual(const CircleProblem& pb, const Eigen::Matrix<T, N, 1>& x) {
  std::vector<Vec3T<T>> p;
  auto idx = pb.unknown_index();
  for (int i = 0; i < pb.size(); ++i) {
    if (idx[i] < 0) {
      p.push_back(pb.through->template cast<T>());
    } else {
      p.push_back(pb.curves[pb.spec.slots[i]].hpoint(x(idx[i])).template tail<3>());
    }
  }
  auto r = concyclic_residual<T>(p, pb.config.eps_area);
  Eigen::Matrix<T, N, 1> out;
  for (int i = 0; i < N; ++i) out(i) = r[i];
  return out;
}

namespace detail {

inline double circle_point_distance(const Circle3& k, const Point3& q) {
  Vec3 w = q - k.center;
  double h = k.normal.dot(w);
  double rho = (w - k.normal * h).norm();
  return std::hypot(h, rho - k.radius);
}

inline Circle3 canonical_circle(Circle3 k) {
  for (int i = 0; i < 3; ++i)
    if (std::abs(k.normal(i)) > 1e-9) {
      if (k.normal(i) < 0) k.normal = -k.normal;
      break;
    }
  return k;
}

inline Eigen::Matrix<double, 7, 1> circle_key(const Circle3& k) {
  Eigen::Matrix<double, 7, 1> v;
  v << k.center, k.radius, k.normal;
  return v;
}

struct CircleRaw {
  Eigen::VectorXd x;
  double residual = 0;
  double cond = 0;
  double min_singular = 0;
};

template <int N>
NewtonResult<N> circle_newton(const CircleProblem& pb, const Eigen::Matrix<double, N, 1>& x0) {
  NewtonOptions opt;
  opt.max_iter = pb.config.max_iter;
  opt.tol = pb.config.tol_res;
  opt.stall_window = pb.config.stall_window;
  auto f = [&](const auto& t) {
    using T = typename std::decay_t<decltype(t)>::Scalar;
    return circle_residual<N, T>(pb, t);
  };
  return damped_newton<N>(f, x0, opt);
}

template <int N>
std::vector<CircleRaw> circle_multistart(const CircleProblem& pb) {
  const auto& cfg = pb.config;
  const int g = cfg.grid;
  auto idx = pb.unknown_index();
  std::vector<int> grid_slots, free_slots;
  for (int a : kAnchors)
    if (idx[a] >= 0) grid_slots.push_back(a);
  for (int i = 0; i < pb.size(); ++i)
    if (i != kAnchors[0] && i != kAnchors[1] && i != kAnchors[2]) free_slots.push_back(i);
  std::vector<ClosedCurve> used;
  for (int s : pb.spec.slots)
    if (s != kThroughPoint) used.push_back(pb.curves[s]);
  const double threshold = cfg.seed_threshold * std::max(1.0, scene_extent(used));
  std::vector<std::vector<Point3>> samples(pb.size());
  for (int i : free_slots) samples[i] = pb.curves[pb.spec.slots[i]].sample(cfg.curve_samples);

  long long cells = 1;
  for (size_t k = 0; k < grid_slots.size(); ++k) cells *= g;
  std::vector<std::vector<Eigen::Matrix<double, N, 1>>> seeds(cells);
  parallel_for(static_cast<int>(cells), cfg.threads, [&](int cell) {
    std::vector<double> anchor_t(pb.size(), 0.0);
    std::array<Point3, 3> ap;
    int rem = cell;
    for (int a = 0; a < 3; ++a) {
      int slot = kAnchors[a];
      if (idx[slot] < 0) {
        ap[a] = *pb.through;
        continue;
      }
      anchor_t[slot] = static_cast<double>(rem % g) / g;
      rem /= g;
      ap[a] = pb.curves[pb.spec.slots[slot]].eval(anchor_t[slot]);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        int sa = kAnchors[a], sb = kAnchors[b];
        if (idx[sa] >= 0 && idx[sb] >= 0 && pb.spec.slots[sa] == pb.spec.slots[sb] &&
            circle_distance(anchor_t[sa], anchor_t[sb]) < 1.5 / g)
          return;
      }
    Circle3 k;
    try {
      k = circle_through(ap[0], ap[1], ap[2], 1e-9);
    } catch (const Error&) {
      return;
    }
    if (k.radius > cfg.r_max) return;
    std::vector<std::vector<double>> cand(free_slots.size());
    for (size_t f = 0; f < free_slots.size(); ++f) {
      int slot = free_slots[f];
      const auto& sm = samples[slot];
      const int n = static_cast<int>(sm.size());
      std::vector<double> d(n);
      for (int i = 0; i < n; ++i) d[i] = circle_point_distance(k, sm[i]);
      for (int i = 0; i < n; ++i) {
        if (d[i] >= threshold || d[i] > d[(i + 1) % n] || d[i] > d[(i + n - 1) % n]) continue;
        double t = static_cast<double>(i) / n;
        bool skip = false;
        for (int a : kAnchors)
          if (idx[a] >= 0 && pb.spec.slots[a] == pb.spec.slots[slot])
            skip = skip || circle_distance(t, anchor_t[a]) < 2.5 / n;
        if (!skip) cand[f].push_back(t);
      }
      if (cand[f].empty()) return;
    }
    // cartesian product of the candidates
    std::vector<size_t> pos(free_slots.size(), 0);
    while (true) {
      Eigen::Matrix<double, N, 1> x;
      for (int a : kAnchors)
        if (idx[a] >= 0) x(idx[a]) = anchor_t[a];
      bool clash = false;
      for (size_t f = 0; f < free_slots.size(); ++f) {
        x(idx[free_slots[f]]) = cand[f][pos[f]];
        for (size_t e = 0; e < f; ++e)
          if (pb.spec.slots[free_slots[e]] == pb.spec.slots[free_slots[f]] &&
              circle_distance(cand[e][pos[e]], cand[f][pos[f]]) < 2.5 / cfg.curve_samples)
            clash = true;
      }
      if (!clash) seeds[cell].push_back(x);
      size_t f = 0;
      while (f < pos.size() && ++pos[f] == cand[f].size()) pos[f++] = 0;
      if (f == pos.size()) break;
    }
  });
  long long total = 0;
  for (const auto& s : seeds) total += static_cast<long long>(s.size());
  if (total > cfg.seed_budget)
    throw Error(ErrorKind::SeedBudgetExceeded, std::to_string(total) + " seeds exceed the budget");

  std::vector<std::vector<CircleRaw>> per(cells);
  parallel_for(static_cast<int>(cells), cfg.threads, [&](int cell) {
    for (const auto& x0 : seeds[cell]) {
      auto r = circle_newton<N>(pb, x0);
      if (!r.converged) continue;
      Eigen::VectorXd x = r.x;
      for (int i = 0; i < N; ++i) x(i) = wrap01(x(i));
      per[cell].push_back({x, r.residual, r.cond, r.min_singular});
    }
  });
  std::vector<CircleRaw> out;
  for (auto& v : per)
    for (auto& r : v) out.push_back(r);
  return out;
}

inline CircleTransversal make_circle_transversal(const CircleProblem& pb, const CircleRaw& r) {
  CircleTransversal ct;
  ct.residual = r.residual;
  ct.cond = r.cond;
  auto idx = pb.unknown_index();
  for (int i = 0; i < pb.size(); ++i) {
    CircleHit h;
    h.slot = i;
    h.curve = pb.spec.slots[i];
    if (idx[i] < 0) {
      h.point = *pb.through;
    } else {
      const auto& c = pb.curves[h.curve];
      h.t = r.x(idx[i]);
      h.point = c.eval(h.t);
      h.tangent = c.orientation() * c.deriv(h.t);
    }
    ct.hits.push_back(h);
  }
  ct.circle = canonical_circle(
      circle_through(ct.hits[kAnchors[0]].point, ct.hits[kAnchors[1]].point, ct.hits[kAnchors[2]].point,
                     pb.config.eps_area));
  for (auto& h : ct.hits) h.angle = ct.circle.angle_of(h.point) / kTwoPi;
  return ct;
}

inline bool circle_separated(const CircleProblem& pb, const CircleTransversal& ct) {
  for (size_t i = 0; i < ct.hits.size(); ++i)
    for (size_t j = i + 1; j < ct.hits.size(); ++j) {
      const auto& a = ct.hits[i];
      const auto& b = ct.hits[j];
      if (circle_distance(a.angle, b.angle) <= pb.config.delta_ord) return false;
      if (a.curve == b.curve && a.curve != kThroughPoint && circle_distance(a.t, b.t) <= pb.config.delta_rep)
        return false;
    }
  return true;
}

inline bool circle_lex_less(const CircleTransversal& a, const CircleTransversal& b) {
  for (size_t i = 0; i < a.hits.size(); ++i)
    if (a.hits[i].t != b.hits[i].t) return a.hits[i].t < b.hits[i].t;
  return false;
}

template <int N>
std::vector<CircleTransversal> solve_circles_n(const CircleProblem& pb) {
  auto raw = circle_multistart<N>(pb);
  std::vector<CircleTransversal> out;
  bool family = false;
  NewtonOptions opt;
  opt.max_iter = pb.config.max_iter;
  opt.tol = pb.config.tol_res;
  auto f = [&](const auto& t) {
    using T = typename std::decay_t<decltype(t)>::Scalar;
    return circle_residual<N, T>(pb, t);
  };
  for (const auto& r : raw) {
    CircleTransversal ct;
    try {
      ct = make_circle_transversal(pb, r);
    } catch (const Error&) {
      continue;
    }
    if (ct.circle.radius > pb.config.r_max || !circle_separated(pb, ct)) continue;
    bool dup = false;
    for (const auto& o : out)
      dup = dup || (circle_key(o.circle) - circle_key(ct.circle)).norm() < pb.config.dedupe_radius;
    if (dup) continue;
    if (!family && rank_deficient(r.min_singular, r.min_singular * r.cond))
      family = continues_as_family<N>(f, Eigen::Matrix<double, N, 1>(r.x), opt);
    std::vector<double> ang;
    for (const auto& h : ct.hits) ang.push_back(h.angle);
    try {
      ct.order_ok = order_of_hits(ang, pb.spec, pb.config.delta_ord);
    } catch (const Error&) {
      continue;
    }
    if (pb.config.check_order && !ct.order_ok) continue;
    out.push_back(ct);
  }
  if (family) throw Error(ErrorKind::NonIsolatedFamily, "a one-parameter family of circles meets the curves");
  std::sort(out.begin(), out.end(), circle_lex_less);
  return out;
}

}  // namespace detail

/// Circles meeting the slot curves (and the fixed point, if any) in the
/// prescribed cyclic order.
inline std::vector<CircleTransversal> solve_circles(const CircleProblem& pb) {
  pb.validate();
  switch (pb.unknowns()) {
    case 4: return detail::solve_circles_n<4>(pb);
    case 6: return detail::solve_circles_n<6>(pb);
    default: throw Error(ErrorKind::InvalidInput, "unsupported number of unknowns");
  }
}

/// Circle through p and two points of a line, as the image of the line
/// under inversion about p.
inline Circle3 circle_from_line_image(const Point3& p, const Point3& a, const Point3& b) {
  return detail::canonical_circle(circle_through(p, invert(a, p, 1.0), invert(b, p, 1.0)));
}

/// Circles through p meeting four curves in the cyclic order (c1, c2, c3, c4, p),
/// via inversion about p and the line solver.
inline std::vector<CircleTransversal> circles_through_point(const std::vector<ClosedCurve>& curves, const Point3& p,
                                                            const std::vector<int>& slots, SolverConfig cfg = {},
                                                            int samples = 2048) {
  if (slots.size() != 4) throw Error(ErrorKind::InvalidInput, "four curve slots expected");
  TransversalProblem lp;
  for (const auto& c : curves) lp.curves.push_back(invert_curve(c, p, 1.0, samples));
  lp.spec = OrderSpec(OrderMode::Linear, slots);
  lp.config = cfg;
  auto lines = solve_transversals(lp);
  std::vector<CircleTransversal> out;
  for (const auto& tr : lines) {
    CircleTransversal ct;
    ct.circle = circle_from_line_image(p, *tr.hits[0].point, *tr.hits[3].point);
    ct.residual = tr.residual;
    ct.cond = tr.cond;
    for (const auto& h : tr.hits) {
      CircleHit ch;
      ch.slot = h.slot;
      ch.curve = h.curve;
      ch.t = h.t;
      ch.point = invert(*h.point, p, 1.0);
      ch.tangent = curves[h.curve].orientation() * curves[h.curve].deriv(h.t);
      ch.angle = ct.circle.angle_of(ch.point) / kTwoPi;
      ct.hits.push_back(ch);
    }
    CircleHit ph;
    ph.slot = 4;
    ph.curve = kThroughPoint;
    ph.point = p;
    ph.angle = ct.circle.angle_of(p) / kTwoPi;
    ct.hits.push_back(ph);
    out.push_back(ct);
  }
  return out;
}

struct CircleJets {
  std::array<Point3, 6> p;
  std::array<Vec3, 6> w;
};

inline CircleJets circle_jets(const CircleTransversal& ct) {
  if (ct.hits.size() != 6) throw Error(ErrorKind::InvalidInput, "circle weights need six hits");
  CircleJets j;
  for (int i = 0; i < 6; ++i) {
    j.p[i] = ct.hits[i].point;
    j.w[i] = ct.hits[i].tangent;
  }
  return j;
}

struct CircleWeightDetail {
  int weight = 0;
  int o_val = 0;
  std::array<int, 5> sign_products{};  // w_i * sign(tau_i), w_i the line weight after inverting about p_i
  Eigen::Matrix<double, 5, 1> tau;
  double frame_det = 0;
  bool consistent = true;
};

namespace detail {

template <typename T>
Vec3T<T> invert_t(const Vec3T<T>& q, const Vec3T<T>& c) {
  Vec3T<T> v = q - c;
  return c + v / v.squaredNorm();
}

/// Tangent of the five-point concyclic family at the first five hits, in
/// oriented curve parameters.
inline Eigen::Matrix<double, 5, 1> family_tangent(const CircleJets& j) {
  auto f = [&](const auto& s) {
    using T = typename std::decay_t<decltype(s)>::Scalar;
    std::vector<Vec3T<T>> p;
    for (int i = 0; i < 5; ++i) p.push_back(j.p[i].template cast<T>() + j.w[i].template cast<T>() * s(i));
    auto r = concyclic_residual<T>(p);
    Eigen::Matrix<T, 4, 1> out;
    for (int i = 0; i < 4; ++i) out(i) = r[i];
    return out;
  };
  Eigen::Matrix<double, 5, 1> s0 = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 4, 1> val;
  Eigen::Matrix<double, 4, 5> jac;
  eval_with_jacobian<4, 5>(f, s0, val, jac);
  return null_vector<4>(jac);
}

/// Line weight of the four hits after p_center, seen from an inversion about
/// p_center (the remaining points then lie on a line in the same order).
inline int inverted_line_weight(const CircleJets& j, int center) {
  Jets lj;
  for (int k = 0; k < 4; ++k) {
    int i = (center + 1 + k) % 5;
    Point3 q = invert(j.p[i], j.p[center], 1.0);
    Vec3 dq = inversion_jacobian(j.p[i], j.p[center], 1.0) * j.w[i];
    lj.x[k] = to_homogeneous(q);
    lj.w[k] = to_homogeneous_direction(dq);
  }
  return line_weight(lj).weight;
}

}  // namespace detail

/// Weight of a circle meeting six curves, hits taken in slot order.
inline CircleWeightDetail circle_weight(const CircleJets& j, double det_tol = 1e-10) {
  CircleWeightDetail d;
  d.tau = detail::family_tangent(j);
  for (int i = 0; i < 5; ++i) d.sign_products[i] = detail::inverted_line_weight(j, i) * sign_of(d.tau(i));
  d.o_val = d.sign_products[4];
  d.consistent = d.o_val != 0;
  for (int i = 0; i < 5; ++i) d.consistent = d.consistent && d.sign_products[i] == d.o_val;
  // swept point with fixed cross-ratio against p1, p3, p5
  Point3 q0 = detail::invert_t<double>(j.p[5], j.p[4]);
  Point3 a0 = detail::invert_t<double>(j.p[0], j.p[4]);
  Point3 b0 = detail::invert_t<double>(j.p[2], j.p[4]);
  double lambda = (q0 - a0).dot(b0 - a0) / (b0 - a0).squaredNorm();
  auto sweep = [&](const auto& s) {
    using T = typename std::decay_t<decltype(s)>::Scalar;
    Vec3T<T> p1 = j.p[0].template cast<T>() + j.w[0].template cast<T>() * s(0);
    Vec3T<T> p3 = j.p[2].template cast<T>() + j.w[2].template cast<T>() * s(1);
    Vec3T<T> p5 = j.p[4].template cast<T>() + j.w[4].template cast<T>() * s(2);
    Vec3T<T> a = detail::invert_t<T>(p1, p5), b = detail::invert_t<T>(p3, p5);
    Vec3T<T> q = a + (b - a) * T(lambda);
    return Vec3T<T>(detail::invert_t<T>(q, p5));
  };
  Eigen::Vector3d s0 = Eigen::Vector3d::Zero(), val;
  Eigen::Matrix3d jac;
  eval_with_jacobian<3, 3>(sweep, s0, val, jac);
  Vec3 e = jac * Eigen::Vector3d(d.tau(0), d.tau(2), d.tau(4));
  Circle3 k = circle_through(j.p[0], j.p[2], j.p[4]);
  auto ang = [&](int i) { return k.angle_of(j.p[i]); };
  auto fwd = [&](double from, double to) {
    double a = std::fmod(to - from, kTwoPi);
    return a < 0 ? a + kTwoPi : a;
  };
  int s = fwd(ang(0), ang(1)) < fwd(ang(0), ang(2)) ? 1 : -1;
  Vec3 f = s * k.normal.cross(j.p[5] - k.center);
  Eigen::Matrix3d m;
  m << e, f, j.w[5];
  double scale = e.norm() * f.norm() * j.w[5].norm();
  d.frame_det = scale > 0 ? m.determinant() / scale : 0.0;
  if (std::abs(d.frame_det) < det_tol)
    throw Error(ErrorKind::TangentFrameDegenerate, "swept-surface frame is degenerate at the sixth hit");
  if (!d.consistent) throw Error(ErrorKind::OrientationInconsistent, "family orientation signs disagree");
  d.weight = kCircleCalibration * d.o_val * sign_of(d.frame_det);
  return d;
}

inline int weight_circle(const CircleTransversal& ct) { return circle_weight(circle_jets(ct)).weight; }

struct CircleSectionDegree {
  int degree = 0;
  double value = 0;  // the regular value t* on C_i
  int preimages = 0;
};

/// Degree of the section P_i -> C_i of the family of circles meeting five
/// curves in cyclic order. Preimages of t* are the circles through c_i(t*),
/// found by inversion about that point; each counts with the family
/// orientation (read off at the index before i) times the sign of the
/// family tangent at index i.
inline CircleSectionDegree circle_section_degree(const std::vector<ClosedCurve>& curves, int i, unsigned seed = 7,
                                                 SolverConfig cfg = {}, int retries = 100) {
  if (curves.size() != 5) throw Error(ErrorKind::InvalidInput, "five curves expected");
  if (i < 0 || i > 4) throw Error(ErrorKind::InvalidInput, "section index out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int ref = (i + 4) % 5;
  for (int attempt = 0; attempt < retries; ++attempt) {
    const double ts = u(rng);
    const Point3 p = curves[i].eval(ts);
    std::vector<ClosedCurve> others;
    for (int k = 1; k <= 4; ++k) others.push_back(curves[(i + k) % 5]);
    std::vector<CircleTransversal> found;
    try {
      found = circles_through_point(others, p, {0, 1, 2, 3}, cfg);
    } catch (const Error& e) {
      if (e.is_general_position_violation()) continue;
      throw;
    }
    CircleSectionDegree sd;
    sd.value = ts;
    bool regular = true;
    for (const auto& ct : found) {
      CircleJets j;
      for (int k = 0; k < 4; ++k) {
        j.p[(i + 1 + k) % 5] = ct.hits[k].point;
        j.w[(i + 1 + k) % 5] = ct.hits[k].tangent;
      }
      j.p[i] = p;
      j.w[i] = curves[i].orientation() * curves[i].deriv(ts);
      try {
        auto tau = detail::family_tangent(j);
        std::array<int, 5> prod{};
        for (int k = 0; k < 5; ++k) prod[k] = detail::inverted_line_weight(j, k) * sign_of(tau(k));
        for (int k = 0; k < 5; ++k) regular = regular && prod[k] == prod[ref] && prod[k] != 0;
        if (!regular) break;
        sd.degree += prod[ref] * sign_of(tau(i));
        ++sd.preimages;
      } catch (const Error& e) {
        if (!e.is_general_position_violation()) throw;
        regular = false;
        break;
      }
    }
    if (regular) return sd;
  }
  throw Error(ErrorKind::NoRegularValue, "no regular value found for the circle section map");
}

/// lk(s1,s2) lk(s3,s4) lk(s5,s6) - lk(s2,s3) lk(s4,s5) lk(s6,s1) for the
/// supported six-slot patterns.
inline int theorem_value_circles(const OrderSpec& spec, const LinkingMatrix& m) {
  if (spec.size() != 6) throw Error(ErrorKind::UnsupportedPattern, "circle formulas need six slots");
  static const std::vector<std::vector<int>> supported = {{0, 1, 2, 3, 4, 5}, {0, 1, 0, 2, 3, 4}, {0, 1, 2, 0, 3, 4},
                                                          {0, 1, 0, 1, 2, 3}, {0, 1, 0, 2, 1, 3}, {0, 1, 2, 0, 1, 3}};
  if (std::find(supported.begin(), supported.end(), slot_pattern(spec.slots)) == supported.end())
    throw Error(ErrorKind::UnsupportedPattern, "unsupported circle slot pattern");
  const auto& s = spec.slots;
  auto lk = [&](int a, int b) {
    HalfInt h = m.at(s[a], s[b]);
    if (!h.is_integer()) throw Error(ErrorKind::InvalidInput, "affine linking numbers must be integers");
    return h.twice / 2;
  };
  return lk(0, 1) * lk(2, 3) * lk(4, 5) - lk(1, 2) * lk(3, 4) * lk(5, 0);
}

struct WeightedCircle {
  CircleTransversal circle;
  CircleWeightDetail detail;
};

struct CircleSignatureReport {
  OrderSpec spec;
  std::vector<WeightedCircle> circles;
  int signature = 0;
  int theorem = 0;
  bool match = false;
  bool count_bound_ok = false;
  LinkingMatrix lk;
  std::string calibration = kCircleCalibrationId;
};

inline CircleSignatureReport verify_circles(const CircleProblem& pb) {
  CircleSignatureReport r;
  r.spec = pb.spec;
  std::vector<ClosedCurve> cs = pb.curves;
  r.lk = linking_matrix(cs, Space::Affine);
  r.theorem = theorem_value_circles(pb.spec, r.lk);
  for (auto& ct : solve_circles(pb)) {
    auto d = circle_weight(circle_jets(ct));
    ct.weight = d.weight;
    r.signature += d.weight;
    r.circles.push_back({ct, d});
  }
  r.match = r.signature == r.theorem;
  r.count_bound_ok = static_cast<int>(r.circles.size()) >= std::abs(r.theorem);
  return r;
}

}  // namespace secantlink
