#include "secantlink/fixtures.hpp"
#include "secantlink/secant_surface.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <set>

using namespace secantlink;

namespace {

// a round circle well away from the others, tilted so that no symmetry of
// the scene survives
ClosedCurve far_circle() {
  Vec3 u = Vec3(0.8, 0.3, -0.2).normalized();
  Vec3 v = u.cross(Vec3(0.1, 0.2, 1.0)).normalized();
  return ClosedCurve::circle("F", Point3(7.3, 1.9, -0.8), u, v, 0.7);
}

SecantProblem with_far_circle(const Fixture& f) {
  SecantProblem pb;
  pb.curves = {f.curves[0], f.curves[1], far_circle()};
  pb.space = Space::Affine;
  return pb;
}

SecantProblem projective_triple(FourLines v) {
  auto f = make_four_lines(v);
  SecantProblem pb;
  pb.curves = {f.curves[0], f.curves[1], f.curves[2]};
  pb.space = Space::Projective;
  return pb;
}

int regular_branches(const std::vector<SecantBranch>& bs) {
  int n = 0;
  for (const auto& b : bs) n += b.orientation != 0;
  return n;
}

}  // namespace

TEST(SecantSurface, AffineDegreeIsLinkingNumber) {
  struct Case {
    Fixture f;
    int lk;
  };
  std::vector<Case> cases = {{make_hopf_pairs(1), 1}, {make_torus_link(2), 2}, {make_torus_link(3), 3}};
  for (const auto& c : cases) {
    auto pb = with_far_circle(c.f);
    auto branches = trace_branches(pb);
    ASSERT_FALSE(branches.empty()) << c.f.name;
    EXPECT_EQ(regular_branches(branches), static_cast<int>(branches.size()));
    auto sd = section_degree(pb, branches, 2);
    EXPECT_EQ(sd.degree, c.lk) << c.f.name;
    EXPECT_GE(sd.preimages, std::abs(c.lk));
    EXPECT_EQ(sd.preimages % 2, std::abs(c.lk) % 2);
  }
}

TEST(SecantSurface, UnlinkedPairHasDegreeZero) {
  auto f = make_split();
  SecantProblem pb;
  pb.curves = {f.curves[0], f.curves[1], far_circle()};
  auto branches = trace_branches(pb);
  EXPECT_EQ(section_degree(pb, branches, 2).degree, 0);
}

TEST(SecantSurface, ReorientingFlipsDegree) {
  auto f = make_hopf_pairs(1);
  auto pb = with_far_circle(f);
  pb.curves[0] = pb.curves[0].reversed();
  auto branches = trace_branches(pb);
  EXPECT_EQ(section_degree(pb, branches, 2).degree, -1);
}

TEST(SecantSurface, DegreeDoesNotDependOnRegularValue) {
  auto pb = with_far_circle(make_torus_link(2));
  auto branches = trace_branches(pb);
  std::set<double> values;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    auto sd = section_degree(pb, branches, 2, seed);
    EXPECT_EQ(sd.degree, 2) << seed;
    values.insert(sd.value);
  }
  EXPECT_EQ(values.size(), 5u);
}

TEST(SecantSurface, ProjectiveLinesHaveHalfIntegerLinkingDegrees) {
  for (auto v : {FourLines::Positive, FourLines::Negative}) {
    auto pb = projective_triple(v);
    auto branches = trace_branches(pb);
    ASSERT_FALSE(branches.empty());
    const int expected = v == FourLines::Positive ? 1 : -1;  // 2 lk of two lines
    for (int i = 0; i < 3; ++i) EXPECT_EQ(section_degree(pb, branches, i).degree, expected) << i;
  }
}

TEST(SecantSurface, RegularVerticesHaveEqualSignProducts) {
  auto pb = with_far_circle(make_torus_link(2));
  auto branches = trace_branches(pb);
  int regular = 0;
  for (const auto& b : branches)
    for (const auto& v : b.vertices) {
      if (!v.regular) continue;
      ++regular;
      EXPECT_EQ(v.sign_products[0], v.sign_products[1]);
      EXPECT_EQ(v.sign_products[1], v.sign_products[2]);
      EXPECT_EQ(v.orientation, v.sign_products[0]);
      EXPECT_NE(v.orientation, 0);
    }
  EXPECT_GT(regular, 100);
}

TEST(SecantSurface, WhitneyPinchesAreAlmostRegular) {
  auto f = make_whitney_umbrella();
  SecantProblem pb;
  pb.curves = {f.curves[0], f.curves[1], f.curves[2]};
  auto branches = trace_branches(pb);
  int pinches = 0;
  for (const auto& b : branches) {
    EXPECT_EQ(b.pinches.size() % 2, 0u);
    for (const auto& p : b.pinches) {
      ++pinches;
      EXPECT_EQ(p.cls, Regularity::AlmostRegular);
      EXPECT_NE(p.lk_before, p.lk_after);
      EXPECT_EQ(p.product_before, p.product_after);
      EXPECT_NE(p.product_before, 0);
    }
  }
  EXPECT_GT(pinches, 0);
}

TEST(SecantSurface, StackedCirclesHaveDegreeZero) {
  auto f = make_stacked_circles();
  SecantProblem pb;
  pb.curves = {f.curves[0], f.curves[1], f.curves[2]};
  auto branches = trace_branches(pb);
  for (const auto& b : branches)
    for (const auto& p : b.pinches) EXPECT_EQ(p.product_before, p.product_after);
  for (int i : {0, 2}) EXPECT_EQ(section_degree(pb, branches, i).degree, 0);
}

TEST(SecantSurface, PointedSecantFlagsCoplanarTangents) {
  auto f = make_whitney_umbrella();
  SecantProblem pb;
  pb.curves = {f.curves[0], f.curves[1], f.curves[2]};
  // the y-axis meets C1 at the origin and C2, C3 at their lowest points,
  // where both tangents are parallel to the x-axis
  const Eigen::Vector3d t(0.0, 0.5, 0.5);
  std::array<Point3, 3> p;
  for (int i = 0; i < 3; ++i) p[i] = pb.curves[i].eval(t(i));
  EXPECT_LT(p[0].norm(), 1e-12);
  EXPECT_LT((p[1] - Point3(0, 1, 0)).norm(), 1e-12);
  EXPECT_LT((p[2] - Point3(0, -1, 0)).norm(), 1e-12);
  auto ps = pointed_secant(pb, t);
  EXPECT_NEAR(ps.cop[0], 0.0, 1e-12);
  EXPECT_GT(std::abs(ps.cop[1]), 0.1);
  EXPECT_GT(std::abs(ps.cop[2]), 0.1);
  EXPECT_NE(ps.cls, Regularity::Regular);
  EXPECT_EQ(ps.special, 0);

  auto generic = pointed_secant(pb, Eigen::Vector3d(0.0, 0.45, 0.55));
  EXPECT_GT(std::abs(generic.cop[0]), 1e-6);
}

TEST(SweptSurface, ProjectiveBranchesAreClosedSurfaces) {
  auto pb = projective_triple(FourLines::Positive);
  auto branches = trace_branches(pb);
  auto s = build_swept_surface(pb, branches, 32);
  for (int b = 0; b < static_cast<int>(branches.size()); ++b) {
    EXPECT_EQ(euler_characteristic(s, b), 0) << b;
    EXPECT_TRUE(boundary_edges(s, [&](int f) { return s.face_branch[f] == b; }).empty());
  }
}

TEST(SweptSurface, StripBoundariesAreSections) {
  auto pb = projective_triple(FourLines::Positive);
  auto branches = trace_branches(pb);
  auto s = build_swept_surface(pb, branches, 32);
  for (int b = 0; b < static_cast<int>(branches.size()); ++b) {
    const int m = static_cast<int>(branches[b].vertices.size());
    for (int strip = 0; strip < 3; ++strip) {
      auto edges = boundary_edges(s, [&](int f) { return s.face_branch[f] == b && s.face_strip[f] == strip; });
      const auto& lo = s.sections[b][strip];
      const auto& hi = s.sections[b][(strip + 1) % 3];
      std::set<int> lo_set(lo.begin(), lo.end()), hi_set(hi.begin(), hi.end());
      ASSERT_EQ(static_cast<int>(edges.size()), 2 * m);
      int forward_lo = 0, forward_hi = 0;
      for (auto [u, v] : edges) {
        bool on_lo = lo_set.count(u) && lo_set.count(v);
        bool on_hi = hi_set.count(u) && hi_set.count(v);
        ASSERT_TRUE(on_lo != on_hi);
        // loops are stored in trace order; count edges that follow it
        auto& loop = on_lo ? lo : hi;
        int iu = static_cast<int>(std::find(loop.begin(), loop.end(), u) - loop.begin());
        bool fwd = loop[(iu + 1) % m] == v;
        (on_lo ? forward_lo : forward_hi) += fwd ? 1 : -1;
      }
      // the two boundary loops run opposite ways
      EXPECT_EQ(std::abs(forward_lo), m);
      EXPECT_EQ(forward_lo, -forward_hi);
    }
  }
}

TEST(SweptSurface, AffineBoundaryContainsThirdSection) {
  auto pb = with_far_circle(make_hopf_pairs(1));
  auto branches = trace_branches(pb);
  auto s = build_swept_surface(pb, branches, 16);
  ASSERT_FALSE(s.faces.empty());
  auto edges = boundary_edges(s, [](int) { return true; });
  std::set<std::pair<int, int>> undirected;
  for (auto [u, v] : edges) undirected.insert({std::min(u, v), std::max(u, v)});
  int used = 0;
  for (size_t b = 0; b < s.sections.size(); ++b) {
    const auto& p3 = s.sections[b][2];
    const int m = static_cast<int>(p3.size());
    for (int a = 0; a < m; ++a) {
      int u = p3[a], v = p3[(a + 1) % m];
      EXPECT_TRUE(undirected.count({std::min(u, v), std::max(u, v)}));
    }
    ++used;
  }
  EXPECT_GT(used, 0);
  for (const auto& face : s.faces)
    for (int k : face) EXPECT_NEAR(s.vertices[k](0), 1.0, 1e-12);
}

TEST(SweptSurface, ObjRoundTrip) {
  auto pb = projective_triple(FourLines::Positive);
  auto branches = trace_branches(pb);
  auto s = build_swept_surface(pb, branches, 16);
  auto path = (std::filesystem::temp_directory_path() / "secantlink_roundtrip.obj").string();
  export_mesh(s, path);
  auto back = import_obj_vertices(path);
  std::remove(path.c_str());
  ASSERT_EQ(back.size(), s.vertices.size());
  double worst = 0;
  for (size_t i = 0; i < back.size(); ++i) worst = std::max(worst, (back[i] - s.vertices[i]).norm());
  EXPECT_LT(worst, 1e-9);
}

TEST(SweptSurface, FiberMustBeMultipleOfFour) {
  auto pb = projective_triple(FourLines::Positive);
  auto branches = trace_branches(pb);
  EXPECT_THROW(build_swept_surface(pb, branches, 30), Error);
}
