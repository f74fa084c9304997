#include "secantlink/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace secantlink;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("secantlink_io_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// runs the command-line tool and returns its exit status
int cli(const std::string& args) {
  std::string cmd = std::string(SECANTLINK_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json cli_json(const std::string& args, int* code = nullptr) {
  static int counter = 0;
  fs::path out = scratch_dir() / ("report_" + std::to_string(counter++) + ".json");
  int c = cli(args + " --out " + out.string());
  if (code) *code = c;
  return Json::parse(read_file(out));
}

void expect_same_curve(const ClosedCurve& a, const ClosedCurve& b) {
  EXPECT_EQ(a.name(), b.name());
  EXPECT_EQ(a.orientation(), b.orientation());
  EXPECT_EQ(a.is_affine(), b.is_affine());
  for (int k = 0; k < 16; ++k) {
    double t = k / 16.0 + 0.01;
    EXPECT_LT((a.hpoint(t) - b.hpoint(t)).norm(), 1e-15);
  }
}

}  // namespace

TEST(Spec, ParseAndFormat) {
  auto s = parse_spec("cyclic:1,2,4,3");
  EXPECT_EQ(s.mode, OrderMode::Cyclic);
  EXPECT_EQ(s.slots, (std::vector<int>{0, 1, 3, 2}));
  EXPECT_EQ(format_spec(s), "cyclic:1,2,4,3");
  EXPECT_EQ(format_spec(parse_spec("linear:1,1,1,1")), "linear:1,1,1,1");
}

TEST(Spec, RejectsMalformedText) {
  for (const auto& bad : {"1,2,3,4", "spiral:1,2,3,4", "linear:1,x,3,4", "linear:0,1,2,3", "linear:1", "linear:1,2.5,3,4"}) {
    try {
      parse_spec(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidInput) << bad;
    }
  }
}

TEST(RunConfigTest, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tol = 0;
  EXPECT_THROW(c.validate(), Error);
  c = RunConfig{};
  c.fiber = 30;
  EXPECT_THROW(c.validate(), Error);
  c = RunConfig{};
  c.threads = 0;
  EXPECT_THROW(c.validate(), Error);
  auto j = to_json(RunConfig{});
  EXPECT_EQ(j.at("seed"), 5);
  EXPECT_EQ(j.at("fiber"), 64);
}

TEST(SceneJson, RoundTripsEveryFixture) {
  for (const auto& n : fixture_names()) {
    auto f = make_fixture(n);
    auto text = scene_to_json(scene_of(f)).dump();
    auto s = scene_from_json(Json::parse(text));
    EXPECT_EQ(s.name, f.name);
    EXPECT_EQ(s.space, f.space);
    ASSERT_EQ(s.curves.size(), f.curves.size());
    for (size_t i = 0; i < s.curves.size(); ++i) expect_same_curve(s.curves[i], f.curves[i]);
  }
}

TEST(SceneJson, PolylineRoundTrip) {
  std::vector<Point3> pts = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(1, 1, 0.5), Point3(0, 1, 0)};
  auto c = ClosedCurve::polyline("P", pts, -1);
  auto back = curve_from_json(curve_to_json(c));
  expect_same_curve(c, back);
  auto s = scene_from_json(Json::array({curve_to_json(c)}));
  EXPECT_EQ(s.space, Space::Affine);
}

TEST(SceneJson, RejectsBadInput) {
  auto good = curve_to_json(ClosedCurve::circle("A", Point3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 1.0));
  auto expect_invalid = [](const Json& j) {
    try {
      scene_from_json(j);
      FAIL() << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    }
  };
  expect_invalid(Json::object());
  expect_invalid(Json::array());
  Json bad = good;
  bad["coefficients"][0] = Json::array({1, 2, 3});
  expect_invalid(Json::array({bad}));
  bad = good;
  bad["space"] = "hyperbolic";
  expect_invalid(Json::array({bad}));
  bad = good;
  bad.erase("name");
  expect_invalid(Json::array({bad}));

  fs::path p = scratch_dir() / "broken.json";
  std::ofstream(p) << "{ \"curves\": [ ";
  try {
    load_scene(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
  try {
    load_scene((scratch_dir() / "missing.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Reports, CsvHasOneRowPerLine) {
  auto f = make_hopf_pairs(2);
  TransversalProblem pb{f.curves, OrderSpec(OrderMode::Linear, {0, 1, 2, 3}), Space::Affine, {}};
  auto lines = solve_transversals(pb);
  auto csv = lines_csv(lines);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "index,weight,residual,cond,t1,t2,t3,t4");
  size_t rows = 0;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, lines.size());
}

TEST(Cli, VerifyHopfPairs) {
  int code = -1;
  auto j = cli_json("verify --fixture hopf2 --spec linear:1,2,3,4", &code);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(j.at("report").at("signature"), 1);
  EXPECT_EQ(j.at("match"), true);
  EXPECT_EQ(j.at("config").at("command"), "verify");
}

TEST(Cli, LinkingMatrixOfAmphicheiralLines) {
  int code = -1;
  auto j = cli_json("lk --fixture amphicheiral", &code);
  EXPECT_EQ(code, 0);
  const auto& r = j.at("linking").at("rounded");
  EXPECT_DOUBLE_EQ(r[0][1].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(r[2][3].get<double>(), -0.5);
}

TEST(Cli, LinesWithCsv) {
  fs::path csv = scratch_dir() / "lines.csv";
  int code = -1;
  auto j = cli_json("lines --fixture amphicheiral --spec cyclic:1,2,4,3 --csv " + csv.string(), &code);
  EXPECT_EQ(code, 0);
  ASSERT_EQ(j.at("count"), 1);
  EXPECT_EQ(j.at("lines")[0].at("weight"), -1);
  EXPECT_NE(read_file(csv).find("index,weight"), std::string::npos);
}

TEST(Cli, SceneFileFromFixtures) {
  fs::path scene = scratch_dir() / "trefoil.json";
  ASSERT_EQ(cli("fixtures trefoil --out " + scene.string()), 0);
  int code = -1;
  auto j = cli_json("lines --scene " + scene.string() + " --spec linear:1,1,1,1", &code);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(j.at("count").get<size_t>(), quadrisecants(make_trefoil().curves[0]).size());
}

TEST(Cli, SurfaceWritesMesh) {
  fs::path obj = scratch_dir() / "surface.obj";
  int code = -1;
  auto j = cli_json("surface --fixture four_lines_positive --fiber 16 --obj " + obj.string(), &code);
  EXPECT_EQ(code, 0);
  for (const auto& k : {"P1", "P2", "P3"}) EXPECT_EQ(j.at("section_degrees").at(k).at("degree"), 1);
  EXPECT_TRUE(fs::exists(obj));
  EXPECT_EQ(import_obj_vertices(obj.string()).size(), j.at("mesh").at("vertices").get<size_t>());
}

TEST(Cli, FixtureListing) {
  int code = -1;
  auto j = cli_json("fixtures", &code);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(j.at("fixtures").size(), fixture_names().size());
}

TEST(Cli, ExitCodes) {
  fs::path broken = scratch_dir() / "broken_cli.json";
  std::ofstream(broken) << "[ { \"name\": ";
  EXPECT_EQ(cli("lines --scene " + broken.string() + " --spec linear:1,2,3,4"), 3);
  EXPECT_EQ(cli("lines --fixture nope --spec linear:1,2,3,4"), 3);
  EXPECT_EQ(cli("lines --fixture hopf2"), 3);                         // missing --spec
  EXPECT_EQ(cli("lines --fixture hopf2 --spec linear:1,2,3,9"), 3);  // no curve 9
  EXPECT_EQ(cli("verify --fixture hopf2 --spec cyclic:1,2,3,4,1"), 3);
  EXPECT_EQ(cli("lines --fixture hopf2 --spec linear:1,2,3,4 --tol -1"), 3);
  EXPECT_EQ(cli("frobnicate"), 3);
  EXPECT_EQ(cli("lines --fixture hyperboloid_ruling --spec cyclic:1,2,3,4"), 2);
  EXPECT_EQ(cli("--help"), 0);
}
