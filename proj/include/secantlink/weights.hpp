#pragma once

#include "secantlink/linking.hpp"
#include "secantlink/transversal.hpp"

#include <array>
#include <string>
#include <vector>

namespace secantlink {

/// Global sign fixed once on the Hopf-pairs calibration scene.
inline constexpr int kLineCalibration = 1;
inline constexpr const char* kCalibrationId = "hopf2-linear-1234";

/// Point and oriented tangent of each hit, as vectors of R^4.
struct Jets {
  std::array<Vec4, 4> x;
  std::array<Vec4, 4> w;
};

inline Jets jets_of(const Transversal& tr) {
  Jets j;
  for (int i = 0; i < 4; ++i) {
    j.x[i] = tr.hits[i].hpoint;
    j.w[i] = tr.hits[i].htangent;
  }
  return j;
}

/// Sign of the linking number of the tangent lines at two hits.
inline int tangent_lk_sign(const Vec4& xa, const Vec4& wa, const Vec4& xb, const Vec4& wb) {
  Eigen::Matrix4d m;
  m << xa, wa, xb, wb;
  return sign_of(m.determinant());
}

struct WeightDetail {
  int weight = 0;
  int o_val = 0;                      // branch orientation sign at the secant through hits 1..3
  std::array<int, 3> sign_products{};  // sign(lk(L_j, L_k)) * sign(tau_i) for i = 1, 2, 3
  Eigen::Vector3d tau;                // tangent of the pointed-secant branch in (t1, t2, t3)
  double frame_det = 0;
  bool consistent = true;
};

namespace detail {

/// Coefficients (a, b) with x ~ a p + b q, by least squares.
inline Eigen::Vector2d span_coords(const Vec4& p, const Vec4& q, const Vec4& x) {
  Eigen::Matrix<double, 4, 2> m;
  m << p, q;
  return m.colPivHouseholderQr().solve(x);
}

/// Unit tangent of the collinear-triple curve through hits 1..3.
inline Eigen::Vector3d secant_tangent(const Jets& j) {
  auto nc = plane_complement(j.x[0], j.x[1]);
  Eigen::Matrix<double, 4, 2> n;
  n << nc[0], nc[1];
  Eigen::Vector2d ab = span_coords(j.x[0], j.x[1], j.x[2]);
  Eigen::Matrix<double, 2, 3> jac;
  jac.col(0) = -ab(0) * n.transpose() * j.w[0];
  jac.col(1) = -ab(1) * n.transpose() * j.w[1];
  jac.col(2) = n.transpose() * j.w[2];
  return null_vector<2>(jac);
}

/// Unit tangent of the line plane at x, pointing in the direction in which
/// the doubled angle runs p1 -> p2 -> p3.
inline Vec4 along_line(const Jets& j, const Vec4& x) {
  Vec4 u = j.x[0].normalized();
  Vec4 v = (j.x[1] - u * u.dot(j.x[1])).normalized();
  auto phi = [&](const Vec4& y) {
    double a = 2.0 * std::atan2(v.dot(y), u.dot(y));
    return a < 0 ? a + kTwoPi : a;
  };
  int s = phi(j.x[2]) > phi(j.x[1]) ? 1 : -1;
  return s * (-(v.dot(x)) * u + u.dot(x) * v);
}

}  // namespace detail

/// Weight of a line from the jets of its four hits, taken in slot order.
inline WeightDetail line_weight(const Jets& j, double det_tol = 1e-10) {
  WeightDetail d;
  d.tau = detail::secant_tangent(j);
  int lk23 = tangent_lk_sign(j.x[1], j.w[1], j.x[2], j.w[2]);
  int lk31 = tangent_lk_sign(j.x[2], j.w[2], j.x[0], j.w[0]);
  int lk12 = tangent_lk_sign(j.x[0], j.w[0], j.x[1], j.w[1]);
  d.sign_products = {lk23 * sign_of(d.tau(0)), lk31 * sign_of(d.tau(1)), lk12 * sign_of(d.tau(2))};
  d.o_val = d.sign_products[0];
  d.consistent = d.sign_products[0] == d.sign_products[1] && d.sign_products[1] == d.sign_products[2] && d.o_val != 0;
  Eigen::Vector2d ab = detail::span_coords(j.x[0], j.x[2], j.x[3]);
  Vec4 e = ab(0) * d.tau(0) * j.w[0] + ab(1) * d.tau(2) * j.w[2];
  Vec4 f = detail::along_line(j, j.x[3]);
  Eigen::Matrix4d m;
  m << j.x[3], e, f, j.w[3];
  double scale = j.x[3].norm() * e.norm() * f.norm() * j.w[3].norm();
  d.frame_det = scale > 0 ? m.determinant() / scale : 0.0;
  if (std::abs(d.frame_det) < det_tol)
    throw Error(ErrorKind::TangentFrameDegenerate, "surface frame is degenerate at the fourth hit");
  if (!d.consistent) throw Error(ErrorKind::OrientationInconsistent, "secant orientation signs disagree");
  d.weight = kLineCalibration * d.o_val * sign_of(d.frame_det);
  return d;
}

inline int weight_affine(const Transversal& tr) { return line_weight(jets_of(tr)).weight; }
inline int weight_projective(const Transversal& tr) { return line_weight(jets_of(tr)).weight; }

/// Slot pattern after relabeling curves by first appearance.
inline std::vector<int> slot_pattern(const std::vector<int>& slots) {
  std::vector<int> seen, out;
  for (int s : slots) {
    auto it = std::find(seen.begin(), seen.end(), s);
    if (it == seen.end()) {
      out.push_back(static_cast<int>(seen.size()));
      seen.push_back(s);
    } else {
      out.push_back(static_cast<int>(it - seen.begin()));
    }
  }
  return out;
}

/// Exact value of the signature formula, as a multiple of 1/2.
struct TheoremValue {
  int twice = 0;
  double value() const { return 0.5 * twice; }
  bool operator==(const TheoremValue&) const = default;
};

/// Linking-number formula for the line signature of `spec`.
inline TheoremValue theorem_value(const OrderSpec& spec, const LinkingMatrix& m) {
  const auto& s = spec.slots;
  auto lk2 = [&](int a, int b) { return m.at(s[a], s[b]).twice; };
  if (spec.size() != 4) throw Error(ErrorKind::UnsupportedPattern, "line formulas need four slots");
  auto pat = slot_pattern(s);
  if (spec.mode == OrderMode::Cyclic) {
    if (pat != std::vector<int>{0, 1, 2, 3}) throw Error(ErrorKind::UnsupportedPattern, "cyclic spec must be distinct");
    // 2 (lk12 lk34 - lk23 lk41) with lk = twice / 2
    int v = lk2(0, 1) * lk2(2, 3) - lk2(1, 2) * lk2(3, 0);
    return {v};
  }
  static const std::vector<std::vector<int>> supported = {{0, 1, 2, 3}, {0, 1, 0, 1}, {0, 1, 0, 2}, {0, 1, 2, 0}};
  auto rev = slot_pattern(std::vector<int>(s.rbegin(), s.rend()));
  bool ok = std::find(supported.begin(), supported.end(), pat) != supported.end() ||
            std::find(supported.begin(), supported.end(), rev) != supported.end();
  if (!ok) throw Error(ErrorKind::UnsupportedPattern, "unsupported linear slot pattern");
  int p = lk2(0, 1) * lk2(2, 3);
  if (p % 2 != 0) throw Error(ErrorKind::InvalidInput, "affine linking numbers must be integers");
  return {p / 2};
}

struct WeightedTransversal {
  Transversal line;
  WeightDetail detail;
};

struct SignatureReport {
  OrderSpec spec;
  Space space = Space::Affine;
  std::vector<WeightedTransversal> lines;
  int signature = 0;
  TheoremValue theorem;
  bool match = false;
  bool count_bound_ok = false;  // number of lines >= |theorem value|
  LinkingMatrix lk;
  std::string calibration = kCalibrationId;
};

/// Solve, weigh and compare with the linking-number formula.
inline SignatureReport verify(const TransversalProblem& pb) {
  SignatureReport r;
  r.spec = pb.spec;
  r.space = pb.spec.mode == OrderMode::Cyclic ? Space::Projective : Space::Affine;
  r.lk = linking_matrix(pb.curves, r.space);
  r.theorem = theorem_value(pb.spec, r.lk);
  auto roots = r.space == Space::Projective ? solve_projective(pb) : solve_transversals(pb);
  for (auto& tr : roots) {
    WeightDetail d = line_weight(jets_of(tr));
    tr.weight = d.weight;
    r.signature += d.weight;
    r.lines.push_back({tr, d});
  }
  r.match = 2 * r.signature == r.theorem.twice;
  r.count_bound_ok = 2 * static_cast<int>(r.lines.size()) >= std::abs(r.theorem.twice);
  return r;
}

}  // namespace secantlink
