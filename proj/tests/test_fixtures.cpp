#include "secantlink/fixtures.hpp"
#include "secantlink/weights.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace secantlink;

namespace {

bool general_position(const std::string& name) { return name != "hyperboloid_ruling"; }

std::vector<std::vector<int>> rounded_table(const Fixture& f) {
  auto m = linking_matrix(f.curves, f.space);
  std::vector<std::vector<int>> out(m.size(), std::vector<int>(m.size(), 0));
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j)
      if (i != j) out[i][j] = m.at(i, j).twice;
  return out;
}

struct LineOutcome {
  size_t count;
  int signature;
};

LineOutcome lines_of(const Fixture& f, const OrderSpec& spec) {
  TransversalProblem pb;
  pb.curves = f.curves;
  pb.spec = spec;
  pb.space = f.space;
  auto r = verify(pb);
  return {r.lines.size(), r.signature};
}

size_t quadrisecant_count(const Fixture& f) { return quadrisecants(f.curves[0]).size(); }

}  // namespace

TEST(Fixtures, NamesAreUniqueAndBuild) {
  auto names = fixture_names();
  std::set<std::string> unique(names.begin(), names.end());
  EXPECT_EQ(unique.size(), names.size());
  for (const auto& n : names) {
    auto f = make_fixture(n);
    EXPECT_FALSE(f.curves.empty()) << n;
    EXPECT_EQ(f.lk_twice.size(), f.curves.size()) << n;
    for (const auto& c : f.curves) EXPECT_NO_THROW(check_curve(c)) << n;
  }
}

TEST(Fixtures, UnknownNamesThrow) {
  for (const auto& n : {"nope", "torus_link_0", "torus_link_9", "torus_link_x"}) {
    try {
      make_fixture(n);
      FAIL() << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    }
  }
  EXPECT_THROW(make_hopf_pairs(2, 4.0), Error);
}

TEST(Fixtures, LinkingTablesMatch) {
  for (const auto& n : fixture_names()) {
    auto f = make_fixture(n);
    if (f.curves.size() < 2) continue;
    EXPECT_EQ(rounded_table(f), f.lk_twice) << n;
  }
}

TEST(Fixtures, InversionNegatesLinking) {
  auto f = make_hopf_pairs(2);
  auto g = inverted_fixture(f, Point3(0.4, -2.6, 1.9), 1.5);
  auto table = rounded_table(g);
  for (size_t i = 0; i < table.size(); ++i)
    for (size_t j = 0; j < table.size(); ++j) EXPECT_EQ(table[i][j], -f.lk_twice[i][j]);
  EXPECT_EQ(g.lk_twice[0][1], -f.lk_twice[0][1]);
  EXPECT_TRUE(g.line_expectations.empty());
}

TEST(Perturbation, DisplacementIsBounded) {
  auto f = make_chain3();
  const double mag = 0.05;
  auto g = perturb(f, mag, 3);
  for (size_t i = 0; i < f.curves.size(); ++i)
    for (int k = 0; k < 200; ++k) {
      double t = k / 200.0;
      EXPECT_LE((g.curves[i].eval(t) - f.curves[i].eval(t)).norm(), mag + 1e-12);
    }
  auto h = perturb(f, mag, 3);
  for (size_t i = 0; i < f.curves.size(); ++i) EXPECT_EQ(h.curves[i].eval(0.3), g.curves[i].eval(0.3));
  EXPECT_EQ(g.metadata.at("perturb_seed"), 3.0);
}

TEST(Perturbation, LinkingAndLinesAreInvariant) {
  for (const auto& n : fixture_names()) {
    if (!general_position(n)) continue;
    auto f = make_fixture(n);
    std::vector<LineOutcome> base;
    for (const auto& e : f.line_expectations) base.push_back(lines_of(f, e.spec));
    for (unsigned seed = 1; seed <= 10; ++seed) {
      auto g = perturb(f, 0.05, seed);
      if (g.curves.size() >= 2) {
        EXPECT_EQ(rounded_table(g), f.lk_twice) << n << " seed " << seed;
      }
      for (size_t k = 0; k < f.line_expectations.size(); ++k) {
        auto o = lines_of(g, f.line_expectations[k].spec);
        EXPECT_EQ(o.count, base[k].count) << n << " seed " << seed;
        EXPECT_EQ(o.signature, base[k].signature) << n << " seed " << seed;
      }
    }
  }
}

TEST(Perturbation, QuadrisecantCountsAreStable) {
  for (const auto& n : {"bidegree31", "trefoil"}) {
    auto f = make_fixture(n);
    const size_t base = quadrisecant_count(f);
    for (unsigned seed = 1; seed <= 10; ++seed) EXPECT_EQ(quadrisecant_count(perturb(f, 0.02, seed)), base) << n;
  }
}
