#pragma once

#include "secantlink/curve.hpp"
#include "secantlink/geometry.hpp"
#include "secantlink/linking.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace secantlink {

/// A count or signature known in advance for one order spec.
struct Expectation {
  OrderSpec spec;
  std::optional<int> count;
  std::optional<int> signature;
};

struct Fixture {
  std::string name;
  Space space = Space::Affine;
  std::vector<ClosedCurve> curves;
  std::vector<std::vector<int>> lk_twice;  // expected 2 lk(C_i, C_j)
  std::vector<Expectation> line_expectations;
  std::vector<Expectation> circle_expectations;
  std::map<std::string, double> metadata;

  HalfInt expected_lk(int i, int j) const { return {lk_twice.at(i).at(j)}; }
};

/// Fourier coefficients of a smooth periodic map sampled exactly enough to
/// recover trigonometric polynomials of the given degree.
inline ClosedCurve fourier_from_function(std::string name, const std::function<Point3(double)>& f, int degree,
                                         int orientation = 1) {
  const int m = 4 * (degree + 1);
  Eigen::Matrix<double, 3, Eigen::Dynamic> c = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, degree + 1);
  Eigen::Matrix<double, 3, Eigen::Dynamic> s = c;
  for (int j = 0; j < m; ++j) {
    double t = static_cast<double>(j) / m;
    Point3 p = f(t);
    c.col(0) += p / m;
    for (int k = 1; k <= degree; ++k) {
      c.col(k) += (2.0 / m) * std::cos(kTwoPi * k * t) * p;
      s.col(k) += (2.0 / m) * std::sin(kTwoPi * k * t) * p;
    }
  }
  c = (c.array().abs() < 1e-13).select(0.0, c);
  s = (s.array().abs() < 1e-13).select(0.0, s);
  return ClosedCurve::fourier(std::move(name), c, s, orientation);
}

namespace detail {

inline std::vector<std::vector<int>> lk_table(int n, const std::vector<std::tuple<int, int, int>>& entries) {
  std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
  for (auto [i, j, v] : entries) {
    m[i][j] = v;
    m[j][i] = v;
  }
  return m;
}

inline Eigen::Matrix3d rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Hopf pair with lk = +1: a unit circle and a unit circle through its center.
inline std::pair<ClosedCurve, ClosedCurve> hopf_pair(const std::string& a, const std::string& b, const Point3& c,
                                                     const Eigen::Matrix3d& r) {
  Vec3 ex = r.col(0), ey = r.col(1), ez = r.col(2);
  return {ClosedCurve::circle(a, c, ex, ey, 1.0), ClosedCurve::circle(b, c + ex, ex, ez, 1.0, -1)};
}

/// Point on the hyperboloid x^2 + y^2 - z^2 = 1 along the ruling line at
/// angle a, s units from the waist.
inline Vec4 ruling_point(double a, double s, int ruling) {
  return Vec4(1.0, std::cos(a) - ruling * s * std::sin(a), std::sin(a) + ruling * s * std::cos(a), s);
}

/// Ruling line of the hyperboloid through its waist point at angle a.
/// ruling = +1 or -1 selects one of the two families.
inline ClosedCurve ruling_line(const std::string& name, double a, int ruling, double rho = 1.0, double kappa = 1.0) {
  Vec4 p(1.0, rho * std::cos(a), rho * std::sin(a), 0.0);
  Vec4 q(0.0, -ruling * std::sin(a), ruling * std::cos(a), kappa);
  return ClosedCurve::projective_line(name, p, q);
}

}  // namespace detail

inline Fixture make_hopf_pairs(int n_pairs, double separation = 10.0) {
  if (n_pairs < 1 || n_pairs > 3) throw Error(ErrorKind::InvalidInput, "1 to 3 Hopf pairs");
  // each pair fits in a ball of radius 2.3 about its center + ex/2
  if (separation <= 4.6) throw Error(ErrorKind::SeparationTooSmall, "Hopf pairs would overlap");
  Fixture f;
  f.name = n_pairs == 1 ? "hopf" : "hopf" + std::to_string(n_pairs);
  const Vec3 dir = Vec3(0.37, 0.81, 0.45).normalized();
  std::vector<std::tuple<int, int, int>> lk;
  for (int k = 0; k < n_pairs; ++k) {
    auto r = detail::rotation(Vec3(0.2, 0.5, 1.0), 0.9 * k);
    auto [a, b] = detail::hopf_pair("C" + std::to_string(2 * k + 1), "C" + std::to_string(2 * k + 2),
                                    k * separation * dir, r);
    f.curves.push_back(a);
    f.curves.push_back(b);
    lk.emplace_back(2 * k, 2 * k + 1, 2);
  }
  f.lk_twice = detail::lk_table(2 * n_pairs, lk);
  f.metadata["separation"] = separation;
  if (n_pairs >= 2) {
    f.line_expectations.push_back({OrderSpec(OrderMode::Linear, {0, 1, 2, 3}), 1, 1});
    f.line_expectations.push_back({OrderSpec(OrderMode::Linear, {0, 2, 1, 3}), std::nullopt, 0});
  }
  return f;
}

/// Two components of the (2, 2n) torus link on the torus R = 2, r = 1.
inline Fixture make_torus_link(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "winding must be positive");
  Fixture f;
  f.name = "torus_link_" + std::to_string(n);
  for (int k = 0; k < 2; ++k) {
    auto g = [n, k](double t) {
      double th = kTwoPi * t, ph = kTwoPi * n * t + kPi * k;
      return Point3((2.0 + std::cos(ph)) * std::cos(th), (2.0 + std::cos(ph)) * std::sin(th), std::sin(ph));
    };
    f.curves.push_back(fourier_from_function("C" + std::to_string(k + 1), g, n + 1, k == 0 ? 1 : -1));
  }
  f.lk_twice = detail::lk_table(2, {{0, 1, 2 * n}});
  f.line_expectations.push_back({OrderSpec(OrderMode::Linear, {0, 1, 0, 1}), std::nullopt, n * n});
  return f;
}

/// Four disjoint projective lines. Positive and Negative start from one
/// ruling of x^2 + y^2 - z^2 = 1 and push the last line inside the
/// hyperboloid; Amphicheiral keeps three ruling lines and threads the fourth
/// through the two sheets of the ruled surface next to C3.
enum class FourLines { Positive, Negative, Amphicheiral, Ruling };

inline Fixture make_four_lines(FourLines variant) {
  Fixture f;
  f.space = Space::Projective;
  const int ruling = variant == FourLines::Negative ? -1 : 1;
  const double rho = 0.9, kappa = 1.1;
  switch (variant) {
    case FourLines::Positive:
    case FourLines::Negative:
    case FourLines::Ruling: {
      f.name = variant == FourLines::Positive   ? "four_lines_positive"
               : variant == FourLines::Negative ? "four_lines_negative"
                                                : "hyperboloid_ruling";
      for (int i = 0; i < 4; ++i) {
        bool moved = i == 3 && variant != FourLines::Ruling;
        f.curves.push_back(detail::ruling_line("C" + std::to_string(i + 1), kPi / 2 * i, ruling, moved ? rho : 1.0,
                                               moved ? kappa : 1.0));
      }
      int v = ruling;
      f.lk_twice = detail::lk_table(4, {{0, 1, v}, {0, 2, v}, {0, 3, v}, {1, 2, v}, {1, 3, v}, {2, 3, v}});
      if (variant != FourLines::Ruling) {
        f.metadata["rho"] = rho;
        f.metadata["kappa"] = kappa;
        f.line_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 1, 2, 3}), 0, 0});
        f.line_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 1, 3, 2}), 0, 0});
        f.line_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 2, 1, 3}), 0, 0});
      }
      break;
    }
    case FourLines::Amphicheiral: {
      f.name = "amphicheiral";
      for (int i = 0; i < 3; ++i)
        f.curves.push_back(detail::ruling_line("C" + std::to_string(i + 1), kTwoPi / 3 * i, ruling));
      Vec4 a = detail::ruling_point(kPi, 0.3, ruling);
      Vec4 b = detail::ruling_point(5 * kPi / 3, -0.5, ruling);
      Vec4 d = b - a;
      d(0) = 0;
      f.curves.push_back(ClosedCurve::projective_line("C4", a, d.normalized()));
      f.metadata["a_angle"] = kPi;
      f.metadata["b_angle"] = 5 * kPi / 3;
      f.lk_twice = detail::lk_table(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, -1}});
      f.line_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 1, 2, 3}), 1, -1});
      f.line_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 1, 3, 2}), 1, -1});
      f.line_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 2, 1, 3}), 0, 0});
      break;
    }
  }
  return f;
}

/// A curve on the hyperboloid w^2 + x^2 = y^2 + z^2 of bidegree (3, 1).
inline Fixture make_bidegree31() {
  Fixture f;
  f.name = "bidegree31";
  f.space = Space::Projective;
  Eigen::Matrix<double, 4, Eigen::Dynamic> c = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, 5);
  Eigen::Matrix<double, 4, Eigen::Dynamic> s = c;
  c(0, 2) = 1.0;  // w = cos 2 pi t
  s(1, 2) = 1.0;  // x = sin 2 pi t
  s(2, 4) = 1.0;  // y = sin 4 pi t
  c(3, 4) = 1.0;  // z = cos 4 pi t
  f.curves.push_back(ClosedCurve::homogeneous("K", c, s));
  f.lk_twice = {{0}};
  return f;
}

inline Fixture make_trefoil() {
  Fixture f;
  f.name = "trefoil";
  auto g = [](double t) {
    double u = kTwoPi * t;
    return Point3(std::sin(u) + 2 * std::sin(2 * u), std::cos(u) - 2 * std::cos(2 * u), -std::sin(3 * u));
  };
  f.curves.push_back(fourier_from_function("K", g, 3));
  f.lk_twice = {{0}};
  return f;
}

inline Fixture make_round_circle() {
  Fixture f;
  f.name = "circle";
  f.curves.push_back(ClosedCurve::circle("K", Point3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 1.0));
  f.lk_twice = {{0}};
  return f;
}

/// Four small unlinked circles near the vertices of a regular tetrahedron.
inline Fixture make_split() {
  Fixture f;
  f.name = "split";
  const std::array<Vec3, 4> v = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  for (int i = 0; i < 4; ++i) {
    Vec3 n = v[(i + 1) % 4].normalized();
    Vec3 u = n.unitOrthogonal();
    f.curves.push_back(ClosedCurve::circle("C" + std::to_string(i + 1), 2.0 * v[i], u, n.cross(u), 0.2));
  }
  f.lk_twice = detail::lk_table(4, {});
  f.line_expectations.push_back({OrderSpec(OrderMode::Linear, {0, 1, 2, 3}), 0, 0});
  return f;
}

/// C1 links both C2 and C3, which are unlinked with each other.
inline Fixture make_chain3() {
  Fixture f;
  f.name = "chain3";
  // C1 is a saddle-shaped loop so that tangent lines at its two hits are skew
  f.curves.push_back(fourier_from_function(
      "C1", [](double t) { return Point3(std::cos(kTwoPi * t), std::sin(kTwoPi * t), 0.25 * std::sin(2 * kTwoPi * t)); },
      2));
  f.curves.push_back(ClosedCurve::circle("C2", Point3(1.0, 0.15, -0.05), Vec3(1, -0.2, 0.1), Vec3(0.1, 0.2, 1), 0.8, -1));
  f.curves.push_back(
      ClosedCurve::circle("C3", Point3(-0.95, 0.3, 0.1), Vec3(0.9, 0.3, 0.1), Vec3(0.1, -0.3, 0.95), 0.8));
  f.lk_twice = detail::lk_table(3, {{0, 1, 2}, {0, 2, 2}});
  f.line_expectations.push_back({OrderSpec(OrderMode::Linear, {0, 1, 0, 2}), std::nullopt, 1});
  f.line_expectations.push_back({OrderSpec(OrderMode::Linear, {0, 1, 2, 0}), std::nullopt, 1});
  return f;
}

/// Circle through the origin tangent to the z-axis, and two circles of
/// radius 1/2 in the planes y = +-1 touching the y-axis from above.
inline Fixture make_whitney_umbrella(double r1 = 1.0) {
  Fixture f;
  f.name = "whitney_umbrella";
  f.curves.push_back(ClosedCurve::circle("C1", Point3(-r1, 0, 0), Vec3::UnitX(), Vec3::UnitZ(), r1));
  f.curves.push_back(ClosedCurve::circle("C2", Point3(0, 1, 0.5), Vec3::UnitZ(), Vec3::UnitX(), 0.5));
  f.curves.push_back(ClosedCurve::circle("C3", Point3(0, -1, 0.5), Vec3::UnitZ(), Vec3::UnitX(), 0.5));
  f.lk_twice = detail::lk_table(3, {});
  return f;
}

/// Three roughly parallel circles stacked along z.
inline Fixture make_stacked_circles() {
  Fixture f;
  f.name = "stacked_circles";
  const std::array<Point3, 3> c = {Point3(0, 0, 0), Point3(0.15, -0.1, 1.0), Point3(-0.1, 0.2, 2.0)};
  const std::array<double, 3> r = {1.0, 1.2, 0.9};
  for (int i = 0; i < 3; ++i) {
    auto rot = detail::rotation(Vec3(1, 2, 0), 0.1 * (i - 1));
    f.curves.push_back(
        ClosedCurve::circle("C" + std::to_string(i + 1), c[i], rot.col(0), rot.col(1), r[i]));
  }
  f.lk_twice = detail::lk_table(3, {});
  return f;
}

/// Three Hopf pairs placed around a circle of radius `ring`, each pair
/// tangent to the ring.
inline Fixture make_chain6(double ring = 4.0) {
  Fixture f;
  f.name = "chain6";
  std::vector<std::tuple<int, int, int>> lk;
  for (int k = 0; k < 3; ++k) {
    double th = kTwoPi * k / 3 + 0.2;
    Eigen::Matrix3d r;
    r.col(0) = Vec3(-std::sin(th), std::cos(th), 0.0);
    r.col(1) = Vec3(std::cos(th), std::sin(th), 0.0);
    r.col(2) = r.col(0).cross(r.col(1));
    r = detail::rotation(r.col(1), 0.3 * (k + 1)) * r;
    auto [a, b] = detail::hopf_pair("C" + std::to_string(2 * k + 1), "C" + std::to_string(2 * k + 2),
                                    ring * r.col(1) + Vec3(0, 0, 0.2 * k), r);
    f.curves.push_back(a);
    f.curves.push_back(b);
    lk.emplace_back(2 * k, 2 * k + 1, 2);
  }
  f.lk_twice = detail::lk_table(6, lk);
  f.metadata["ring"] = ring;
  f.circle_expectations.push_back({OrderSpec(OrderMode::Cyclic, {0, 1, 2, 3, 4, 5}), std::nullopt, 1});
  return f;
}

/// Smooth random displacement of every curve by at most `magnitude`.
/// Draws that bring two curves closer than half their original distance are
/// rejected and redrawn.
inline Fixture perturb(const Fixture& f, double magnitude, unsigned seed, int degree = 2, int attempts = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int n = static_cast<int>(f.curves.size());
  std::vector<std::vector<double>> base(n, std::vector<double>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (f.curves[i].is_affine() && f.curves[j].is_affine()) base[i][j] = min_distance(f.curves[i], f.curves[j]);
  for (int a = 0; a < attempts; ++a) {
    Fixture g = f;
    for (int i = 0; i < n; ++i) {
      const auto& c = f.curves[i];
      Eigen::Matrix<double, 3, Eigen::Dynamic> dc = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, degree + 1);
      Eigen::Matrix<double, 3, Eigen::Dynamic> ds = dc;
      for (int k = 0; k <= degree; ++k)
        for (int r = 0; r < 3; ++r) {
          dc(r, k) = unif(rng);
          ds(r, k) = k == 0 ? 0.0 : unif(rng);
        }
      // the l1 norm of the coefficients bounds the displacement
      double bound = dc.cwiseAbs().sum() + ds.cwiseAbs().sum();
      dc *= magnitude / bound;
      ds *= magnitude / bound;
      if (c.is_affine()) {
        auto disp = [dc, ds, degree](double t) {
          Point3 p = dc.col(0);
          for (int k = 1; k <= degree; ++k)
            p += dc.col(k) * std::cos(kTwoPi * k * t) + ds.col(k) * std::sin(kTwoPi * k * t);
          return p;
        };
        if (const auto* fr = std::get_if<FourierRep>(&c.rep())) {
          const int d = std::max(fr->degree(), degree);
          Eigen::Matrix<double, 3, Eigen::Dynamic> cc = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, d + 1);
          Eigen::Matrix<double, 3, Eigen::Dynamic> ss = cc;
          cc.leftCols(fr->degree() + 1) = fr->cos_coeffs;
          ss.leftCols(fr->degree() + 1) = fr->sin_coeffs;
          cc.leftCols(degree + 1) += dc;
          ss.leftCols(degree + 1) += ds;
          g.curves[i] = ClosedCurve::fourier(c.name(), cc, ss, c.orientation());
        } else {
          std::vector<Point3> pts;
          const int m = std::get<PolylineRep>(c.rep()).size();
          for (int j = 0; j < m; ++j) {
            double t = static_cast<double>(j) / m;
            pts.push_back(c.eval(t) + disp(t));
          }
          g.curves[i] = ClosedCurve::polyline(c.name(), pts, c.orientation());
        }
      } else {
        // projective curves move by a projective map close to the identity
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        for (int r = 0; r < 4; ++r)
          for (int k = 0; k < 4; ++k) m(r, k) += magnitude * unif(rng) / 4.0;
        g.curves[i] = c.projectively_transformed(m);
      }
    }
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = i + 1; j < n && ok; ++j)
        if (base[i][j] > 0) ok = min_distance(g.curves[i], g.curves[j]) >= 0.5 * base[i][j];
    if (ok) {
      g.name = f.name + "_perturbed";
      g.metadata["perturb_magnitude"] = magnitude;
      g.metadata["perturb_seed"] = seed;
      return g;
    }
  }
  throw Error(ErrorKind::SeparationTooSmall, "no isotopy-safe perturbation found for " + f.name);
}

/// Exact image of a round circle under inversion about `center` with the
/// given radius, with the orientation carried over. Throws if the curve is
/// not a round circle or passes through the center.
inline ClosedCurve invert_round_circle(const ClosedCurve& c, const Point3& center, double radius = 1.0) {
  const auto* f = std::get_if<FourierRep>(&c.rep());
  if (!f || f->degree() != 1) throw Error(ErrorKind::InvalidCurve, c.name() + " is not a round circle");
  const Vec3 a = f->cos_coeffs.col(1), b = f->sin_coeffs.col(1);
  if (std::abs(a.norm() - b.norm()) > 1e-12 * a.norm() || std::abs(a.dot(b)) > 1e-12 * a.squaredNorm())
    throw Error(ErrorKind::InvalidCurve, c.name() + " is not a round circle");
  const Point3 q0 = invert(c.eval(0.0), center, radius);
  const Point3 q1 = invert(c.eval(1.0 / 3), center, radius);
  const Point3 q2 = invert(c.eval(2.0 / 3), center, radius);
  Circle3 k = circle_through(q0, q1, q2);
  Vec3 u = (q0 - k.center).normalized();
  Vec3 v = k.normal.cross(u);
  // parameter direction of the image, read off from a nearby sample
  Vec3 qe = invert(c.eval(1e-3), center, radius) - k.center;
  int orient = qe.dot(v) > 0 ? 1 : -1;
  return ClosedCurve::circle(c.name(), k.center, u, orient * v, k.radius, c.orientation());
}

/// Fixture with every round circle inverted exactly about `center`.
inline Fixture inverted_fixture(const Fixture& f, const Point3& center, double radius = 1.0) {
  Fixture g = f;
  g.name = f.name + "_inverted";
  for (auto& c : g.curves) c = invert_round_circle(c, center, radius);
  // inversion reverses orientation of R^3, so linking numbers change sign
  for (auto& row : g.lk_twice)
    for (auto& v : row) v = -v;
  g.line_expectations.clear();
  g.circle_expectations.clear();
  return g;
}

/// Names accepted by make_fixture.
inline std::vector<std::string> fixture_names() {
  return {"hopf2", "hopf3", "torus_link_1", "torus_link_2", "torus_link_3", "four_lines_positive",
          "four_lines_negative", "amphicheiral", "hyperboloid_ruling", "bidegree31", "trefoil", "circle",
          "split", "chain3", "whitney_umbrella", "stacked_circles", "chain6"};
}

inline Fixture make_fixture(const std::string& name) {
  if (name == "hopf2") return make_hopf_pairs(2);
  if (name == "hopf3") return make_hopf_pairs(3);
  if (name.rfind("torus_link_", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(name.substr(11));
    } catch (const std::exception&) {
      n = 0;
    }
    if (n >= 1 && n <= 8) return make_torus_link(n);
  }
  if (name == "four_lines_positive") return make_four_lines(FourLines::Positive);
  if (name == "four_lines_negative") return make_four_lines(FourLines::Negative);
  if (name == "amphicheiral") return make_four_lines(FourLines::Amphicheiral);
  if (name == "hyperboloid_ruling") return make_four_lines(FourLines::Ruling);
  if (name == "bidegree31") return make_bidegree31();
  if (name == "trefoil") return make_trefoil();
  if (name == "circle") return make_round_circle();
  if (name == "split") return make_split();
  if (name == "chain3") return make_chain3();
  if (name == "whitney_umbrella") return make_whitney_umbrella();
  if (name == "stacked_circles") return make_stacked_circles();
  if (name == "chain6") return make_chain6();
  throw Error(ErrorKind::InvalidInput, "unknown fixture " + name);
}

}  // namespace secantlink
