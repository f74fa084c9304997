// Command-line front end: linking matrices, transversal lines and circles,
// secant surfaces and signature checks on scenes or built-in fixtures.

#include "secantlink/secantlink.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace secantlink;

namespace {

enum Exit { kOk = 0, kMismatch = 1, kGeneralPosition = 2, kInput = 3, kNumerical = 4 };

Scene resolve_scene(const RunConfig& cfg) {
  if (!cfg.fixture.empty() && !cfg.scene.empty()) throw Error(ErrorKind::InvalidInput, "give --fixture or --scene, not both");
  if (!cfg.fixture.empty()) return scene_of(make_fixture(cfg.fixture));
  if (!cfg.scene.empty()) return load_scene(cfg.scene);
  throw Error(ErrorKind::InvalidInput, "a scene is required (--fixture or --scene)");
}

SolverConfig line_config(const RunConfig& cfg) {
  SolverConfig s;
  if (cfg.grid > 0) s.grid = cfg.grid;
  s.tol_res = cfg.tol;
  s.threads = cfg.threads;
  return s;
}

CircleConfig circle_config(const RunConfig& cfg) {
  CircleConfig s;
  if (cfg.grid > 0) s.grid = cfg.grid;
  s.tol_res = cfg.tol;
  s.threads = cfg.threads;
  return s;
}

void emit(const RunConfig& cfg, Json report) {
  report["config"] = to_json(cfg);
  std::string text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
}

void check_slots(const OrderSpec& spec, const Scene& scene) {
  for (int s : spec.slots)
    if (s < 0 || s >= static_cast<int>(scene.curves.size()))
      throw Error(ErrorKind::InvalidInput, "spec refers to curve " + std::to_string(s + 1) + " of " +
                                               std::to_string(scene.curves.size()));
}

int run_lk(const RunConfig& cfg) {
  Scene scene = resolve_scene(cfg);
  auto m = linking_matrix(scene.curves, scene.space);
  emit(cfg, Json{{"scene", scene.name}, {"linking", to_json(m)}});
  return kOk;
}

std::vector<Transversal> solve_lines(const Scene& scene, const OrderSpec& spec, const RunConfig& cfg) {
  TransversalProblem pb{scene.curves, spec, scene.space, line_config(cfg)};
  return spec.mode == OrderMode::Cyclic ? solve_projective(pb) : solve_transversals(pb);
}

int run_lines(const RunConfig& cfg) {
  Scene scene = resolve_scene(cfg);
  OrderSpec spec = parse_spec(cfg.spec);
  check_slots(spec, scene);
  auto lines = solve_lines(scene, spec, cfg);
  Json arr = Json::array();
  const auto pat = slot_pattern(spec.slots);
  const bool weighted = spec.size() == 4 && pat.size() == 4 && pat[0] != pat[1];
  for (auto& l : lines) {
    if (weighted) l.weight = line_weight(jets_of(l)).weight;
    arr.push_back(to_json(l));
  }
  emit(cfg, Json{{"scene", scene.name}, {"spec", format_spec(spec)}, {"count", lines.size()}, {"lines", arr}});
  if (!cfg.csv.empty()) write_text(cfg.csv, lines_csv(lines));
  return kOk;
}

int run_circles(const RunConfig& cfg) {
  Scene scene = resolve_scene(cfg);
  OrderSpec spec = parse_spec(cfg.spec);
  check_slots(spec, scene);
  if (scene.space != Space::Affine) throw Error(ErrorKind::InvalidInput, "circles need an affine scene");
  CircleProblem pb{scene.curves, spec, std::nullopt, circle_config(cfg)};
  Json report{{"scene", scene.name}, {"spec", format_spec(spec)}};
  std::vector<CircleTransversal> circles;
  if (spec.size() == 6) {
    auto r = verify_circles(pb);
    for (const auto& c : r.circles) circles.push_back(c.circle);
    report["signature_report"] = to_json(r);
  } else {
    circles = solve_circles(pb);
  }
  Json arr = Json::array();
  for (const auto& c : circles) arr.push_back(to_json(c));
  report["count"] = circles.size();
  report["circles"] = arr;
  emit(cfg, report);
  if (!cfg.csv.empty()) write_text(cfg.csv, circles_csv(circles));
  return kOk;
}

int run_surface(const RunConfig& cfg, const std::string& curves_arg) {
  Scene scene = resolve_scene(cfg);
  OrderSpec pick = parse_spec("linear:" + curves_arg);
  if (pick.size() != 3) throw Error(ErrorKind::InvalidInput, "--curves takes three indices");
  check_slots(pick, scene);
  SecantProblem pb;
  for (int i = 0; i < 3; ++i) pb.curves[i] = scene.curves[pick.slots[i]];
  pb.space = scene.space;
  if (cfg.grid > 0) pb.config.grid = cfg.grid;
  pb.config.threads = cfg.threads;
  auto branches = trace_branches(pb);
  Json report{{"scene", scene.name}, {"curves", curves_arg}, {"space", to_string(pb.space)}};
  Json arr = Json::array();
  bool degenerate = false;
  for (const auto& b : branches) {
    arr.push_back(to_json(b));
    for (const auto& p : b.pinches) degenerate = degenerate || p.cls == Regularity::Degenerate;
  }
  report["branches"] = arr;
  Json degrees = Json::object();
  std::vector<int> sections = pb.space == Space::Affine ? std::vector<int>{2} : std::vector<int>{0, 1, 2};
  for (int i : sections) {
    auto sd = section_degree(pb, branches, i, cfg.seed);
    degrees["P" + std::to_string(i + 1)] = {{"degree", sd.degree}, {"value", sd.value}, {"preimages", sd.preimages}};
  }
  report["section_degrees"] = degrees;
  auto surf = build_swept_surface(pb, branches, cfg.fiber);
  Json chi = Json::array();
  for (int b = 0; b < static_cast<int>(branches.size()); ++b)
    if (pb.space == Space::Projective || branches[b].middle == 1) chi.push_back(euler_characteristic(surf, b));
  report["euler_characteristic"] = chi;
  report["mesh"] = {{"vertices", surf.vertices.size()}, {"faces", surf.faces.size()}, {"fiber", surf.fiber}};
  if (!cfg.obj.empty()) export_mesh(surf, cfg.obj);
  report["degenerate"] = degenerate;
  emit(cfg, report);
  return degenerate ? kGeneralPosition : kOk;
}

int run_verify(const RunConfig& cfg) {
  Scene scene = resolve_scene(cfg);
  OrderSpec spec = parse_spec(cfg.spec);
  check_slots(spec, scene);
  Json report{{"scene", scene.name}};
  bool match = false;
  if (spec.size() == 4) {
    TransversalProblem pb{scene.curves, spec, scene.space, line_config(cfg)};
    auto r = verify(pb);
    match = r.match;
    report["kind"] = "lines";
    report["report"] = to_json(r);
  } else if (spec.size() == 6) {
    CircleProblem pb{scene.curves, spec, std::nullopt, circle_config(cfg)};
    auto r = verify_circles(pb);
    match = r.match;
    report["kind"] = "circles";
    report["report"] = to_json(r);
  } else {
    throw Error(ErrorKind::UnsupportedPattern, "verify takes four slots (lines) or six (circles)");
  }
  report["match"] = match;
  emit(cfg, report);
  return match ? kOk : kMismatch;
}

int run_fixtures(const RunConfig& cfg, const std::string& name) {
  if (name.empty()) {
    Json list = Json::array();
    for (const auto& n : fixture_names()) {
      auto f = make_fixture(n);
      list.push_back({{"name", n}, {"space", to_string(f.space)}, {"curves", f.curves.size()}});
    }
    emit(cfg, Json{{"fixtures", list}});
    return kOk;
  }
  std::string text = scene_to_json(scene_of(make_fixture(name))).dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
  return kOk;
}

int exit_code(const Error& e) {
  if (e.is_general_position_violation()) return kGeneralPosition;
  switch (e.kind()) {
    case ErrorKind::InvalidInput:
    case ErrorKind::InvalidCurve:
    case ErrorKind::Io:
    case ErrorKind::UnsupportedPattern:
    case ErrorKind::CurvesTooClose:
    case ErrorKind::CurveHitsCenter:
    case ErrorKind::SeparationTooSmall:
      return kInput;
    default:
      return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transversal lines and circles of space curves, with linking-number signatures"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.threads = default_threads();
  std::string curves_arg = "1,2,3";
  std::string fixture_name;

  auto common = [&](CLI::App* sub, bool with_spec) {
    sub->add_option("--fixture", cfg.fixture, "built-in fixture name");
    sub->add_option("--scene", cfg.scene, "scene JSON file");
    if (with_spec) sub->add_option("--spec", cfg.spec, "order spec, e.g. cyclic:1,2,3,4")->required();
    sub->add_option("--grid", cfg.grid, "seed grid size");
    sub->add_option("--tol", cfg.tol, "Newton residual tolerance");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--threads", cfg.threads, "worker threads");
    sub->add_option("--out", cfg.out, "write the JSON report here instead of stdout");
  };

  auto* lk = app.add_subcommand("lk", "linking matrix");
  common(lk, false);
  auto* lines = app.add_subcommand("lines", "lines meeting four curves in order");
  common(lines, true);
  lines->add_option("--csv", cfg.csv, "CSV summary path");
  auto* circles = app.add_subcommand("circles", "circles meeting five or six curves in cyclic order");
  common(circles, true);
  circles->add_option("--csv", cfg.csv, "CSV summary path");
  auto* surface = app.add_subcommand("surface", "secant surface of three curves");
  common(surface, false);
  surface->add_option("--curves", curves_arg, "three 1-based curve indices");
  surface->add_option("--obj", cfg.obj, "OBJ mesh path");
  surface->add_option("--fiber", cfg.fiber, "fiber resolution (multiple of 4)");
  auto* ver = app.add_subcommand("verify", "compare the signature with the linking-number formula");
  common(ver, true);
  auto* fx = app.add_subcommand("fixtures", "list fixtures or print one as scene JSON");
  fx->add_option("name", fixture_name, "fixture to print");
  fx->add_option("--out", cfg.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    cfg.validate();
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (sub == lk) return run_lk(cfg);
    if (sub == lines) return run_lines(cfg);
    if (sub == circles) return run_circles(cfg);
    if (sub == surface) return run_surface(cfg, curves_arg);
    if (sub == ver) return run_verify(cfg);
    return run_fixtures(cfg, fixture_name);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kInput;
  }
}
