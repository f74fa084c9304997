#include "oracles.hpp"

#include "secantlink/circles.hpp"
#include "secantlink/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace secantlink;

namespace {

LinkingMatrix matrix_of(const std::vector<std::vector<int>>& lk) {
  const int n = static_cast<int>(lk.size());
  LinkingMatrix m;
  m.raw = Eigen::MatrixXd::Zero(n, n);
  m.rounded.assign(n, std::vector<HalfInt>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.raw(i, j) = lk[i][j];
      m.rounded[i][j] = HalfInt::whole(lk[i][j]);
    }
  return m;
}

CircleProblem six(const Fixture& f, std::vector<int> slots) {
  CircleProblem pb;
  pb.curves = f.curves;
  pb.spec = OrderSpec(OrderMode::Cyclic, std::move(slots));
  return pb;
}

// one solve of the chain, shared by the tests that need it
const CircleSignatureReport& chain_report() {
  static const CircleSignatureReport r = verify_circles(six(make_chain6(), {0, 1, 2, 3, 4, 5}));
  return r;
}

int signature_of(const std::vector<CircleJets>& jets) {
  int s = 0;
  for (const auto& j : jets) s += circle_weight(j).weight;
  return s;
}

}  // namespace

TEST(CircleResidual, VanishesOnConcyclicPoints) {
  Circle3 k{Point3(0.3, -0.2, 1.0), 1.7, Vec3(0.2, 0.4, 0.9).normalized()};
  std::vector<Vec3> p;
  for (double a : {0.1, 0.9, 1.7, 2.9, 4.0, 5.5}) p.push_back(k.at(a));
  auto r = concyclic_residual<double>(p);
  ASSERT_EQ(r.size(), 6u);
  for (double v : r) EXPECT_NEAR(v, 0.0, 1e-12);
  p[3] += 0.01 * k.normal;
  EXPECT_GT(std::abs(concyclic_residual<double>(p)[2]), 1e-3);
}

TEST(CircleResidual, CollinearAnchorsThrow) {
  std::vector<Vec3> p = {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(1, 0, 0), Vec3(0, 1, 1), Vec3(2, 0, 0), Vec3(0, 0, 1)};
  try {
    concyclic_residual<double>(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CollinearAnchors);
  }
}

TEST(CircleResidual, JacobianMatchesFiniteDifferences) {
  auto pb = six(make_chain6(), {0, 1, 2, 3, 4, 5});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  using V6 = Eigen::Matrix<double, 6, 1>;
  for (int k = 0; k < 10; ++k) {
    V6 t;
    for (int i = 0; i < 6; ++i) t(i) = u(rng);
    V6 val;
    Eigen::Matrix<double, 6, 6> jac;
    eval_with_jacobian<6, 6>(
        [&](const auto& x) { return circle_residual<6, typename std::decay_t<decltype(x)>::Scalar>(pb, x); }, t, val,
        jac);
    Eigen::Matrix<double, 6, 6> fd;
    const double h = 1e-6;
    for (int c = 0; c < 6; ++c) {
      V6 a = t, b = t;
      a(c) += h;
      b(c) -= h;
      fd.col(c) = (circle_residual<6, double>(pb, a) - circle_residual<6, double>(pb, b)) / (2 * h);
    }
    EXPECT_LT((jac - fd).norm(), 1e-5 * (1 + jac.norm()));
  }
}

TEST(CircleTheorem, PatternValues) {
  std::vector<std::vector<int>> lk(6, std::vector<int>(6, 0));
  auto set = [&](int a, int b, int v) { lk[a][b] = lk[b][a] = v; };
  set(0, 1, 2);
  set(2, 3, 1);
  auto v = [&](std::vector<int> s) { return theorem_value_circles(OrderSpec(OrderMode::Cyclic, s), matrix_of(lk)); };
  EXPECT_EQ(v({0, 1, 0, 1, 2, 3}), 4);  // lk12^2 lk34

  set(1, 2, -1);
  set(0, 3, 3);
  set(4, 5, 1);
  set(0, 4, 1);
  EXPECT_EQ(v({0, 1, 0, 1, 2, 3}), 2 * 2 * 1 - 2 * (-1) * 3);  // lk12 lk12 lk34 - lk21 lk12 lk41
  EXPECT_EQ(v({0, 1, 2, 3, 4, 5}), 2 * 1 * 1 - (-1) * 0 * 0);  // lk12 lk34 lk56 - lk23 lk45 lk61
  EXPECT_EQ(v({0, 1, 0, 2, 3, 4}), 2 * 0 * 0 - 2 * 1 * 1);     // lk12 lk13 lk45 - lk21 lk34 lk51
  EXPECT_EQ(v({0, 1, 2, 0, 3, 4}), 2 * 0 * 0 - (-1) * 3 * 1);  // lk12 lk31 lk45 - lk23 lk14 lk51
  EXPECT_THROW(v({0, 0, 1, 2, 3, 4}), Error);
  EXPECT_THROW(v({0, 1, 2, 3, 4}), Error);
}

TEST(CircleSolver, ChainAgreesWithScan) {
  auto f = make_chain6();
  const auto& r = chain_report();
  auto ref = oracle::scan_circles(f.curves, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(r.circles.size(), ref.size());
  for (const auto& o : ref) {
    int found = 0;
    for (const auto& wc : r.circles) {
      bool same = true;
      for (int k = 0; k < 6; ++k) same = same && oracle::cdist(wc.circle.hits[k].t, o.t[k]) < 1e-6;
      if (same) {
        ++found;
        EXPECT_NEAR(wc.circle.circle.radius, o.radius, 1e-7);
        EXPECT_LT((wc.circle.circle.center - o.center).norm(), 1e-7);
      }
    }
    EXPECT_EQ(found, 1);
  }
}

TEST(CircleSolver, ChainSignatureMatches) {
  const auto& r = chain_report();
  EXPECT_EQ(r.theorem, 1);
  EXPECT_EQ(r.signature, 1);
  EXPECT_TRUE(r.match);
  EXPECT_TRUE(r.count_bound_ok);
  for (const auto& wc : r.circles) {
    const auto& sp = wc.detail.sign_products;
    EXPECT_TRUE(wc.detail.consistent);
    for (size_t i = 1; i < sp.size(); ++i) EXPECT_EQ(sp[i], sp[0]);
  }
}

TEST(CircleSolver, ReorientedCurveNegatesWeights) {
  // reversing C1 negates lk12 and lk61, so both terms change sign
  const auto& r = chain_report();
  std::vector<CircleJets> jets;
  for (const auto& wc : r.circles) {
    auto j = circle_jets(wc.circle);
    for (int k = 0; k < 6; ++k)
      if (wc.circle.hits[k].curve == 0) j.w[k] = -j.w[k];
    jets.push_back(j);
  }
  EXPECT_EQ(signature_of(jets), -1);
}

TEST(CircleSolver, MirrorNegatesSignature) {
  const auto& r = chain_report();
  std::vector<CircleJets> jets;
  for (const auto& wc : r.circles) {
    auto j = circle_jets(wc.circle);
    for (int k = 0; k < 6; ++k) {
      j.p[k].x() = -j.p[k].x();
      j.w[k].x() = -j.w[k].x();
    }
    jets.push_back(j);
  }
  EXPECT_EQ(signature_of(jets), -1);
}

TEST(CircleSolver, ThroughPointMatchesInvertedLines) {
  // circles through p meeting the inverted curves are the images of the lines
  // meeting the original ones
  auto f = make_hopf_pairs(2);
  const Point3 p(0.4, -2.6, 1.9);
  TransversalProblem lp;
  lp.curves = f.curves;
  lp.spec = OrderSpec(OrderMode::Linear, {0, 1, 2, 3});
  auto lines = solve_transversals(lp);
  ASSERT_FALSE(lines.empty());

  CircleProblem cp;
  for (const auto& c : f.curves) cp.curves.push_back(invert_round_circle(c, p));
  cp.spec = OrderSpec(OrderMode::Cyclic, {0, 1, 2, 3, kThroughPoint});
  cp.through = p;
  auto circles = solve_circles(cp);
  ASSERT_EQ(circles.size(), lines.size());
  for (const auto& ct : circles) {
    ASSERT_EQ(ct.hits.size(), 5u);
    double best = 1e9;
    for (const auto& tr : lines) {
      double worst = 0;
      for (int k = 0; k < 4; ++k) {
        Point3 back = invert(ct.hits[k].point, p, 1.0);
        worst = std::max(worst, (back - *tr.hits[k].point).norm());
      }
      best = std::min(best, worst);
    }
    EXPECT_LT(best, 1e-6);
  }
}

TEST(CircleSolver, RejectsBadProblems) {
  auto f = make_chain6();
  auto pb = six(f, {0, 1, 2, 3, 4});
  EXPECT_THROW(solve_circles(pb), Error);
  pb = six(f, {0, 1, 2, 3, kThroughPoint});
  EXPECT_THROW(solve_circles(pb), Error);  // no point given
  pb = six(f, {0, 1, 2, 3, 4, 5});
  pb.spec.mode = OrderMode::Linear;
  EXPECT_THROW(solve_circles(pb), Error);
}

TEST(CircleSection, DegreeIsProductOfLinkingNumbers) {
  auto f = make_hopf_pairs(3);
  std::vector<ClosedCurve> five(f.curves.begin(), f.curves.begin() + 5);
  for (int i = 0; i < 5; ++i) {
    auto lk = [&](int a, int b) { return f.lk_twice[a % 5][b % 5] / 2; };
    int expected = lk(i + 1, i + 2) * lk(i + 3, i + 4);
    auto sd = circle_section_degree(five, i);
    EXPECT_EQ(sd.degree, expected) << i;
    EXPECT_GE(sd.preimages, std::abs(expected));
  }
}

TEST(CircleSection, RelabelingShiftsIndex) {
  auto f = make_hopf_pairs(3);
  std::vector<ClosedCurve> five(f.curves.begin(), f.curves.begin() + 5);
  std::vector<ClosedCurve> rotated;
  for (int k = 0; k < 5; ++k) rotated.push_back(five[(k + 2) % 5]);
  // curve 4 of the original is curve 2 of the rotated list
  EXPECT_EQ(circle_section_degree(five, 4).degree, circle_section_degree(rotated, 2).degree);
  EXPECT_EQ(circle_section_degree(five, 4, 3).degree, 1);
}
