#pragma once

#include "secantlink/circles.hpp"
#include "secantlink/curve.hpp"
#include "secantlink/fixtures.hpp"
#include "secantlink/geometry.hpp"
#include "secantlink/linking.hpp"
#include "secantlink/secant_surface.hpp"
#include "secantlink/transversal.hpp"
#include "secantlink/weights.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace secantlink {

using Json = nlohmann::json;

/// Resolved run parameters, embedded in every report.
struct RunConfig {
  std::string command;
  std::string fixture;
  std::string scene;
  std::string spec;
  int grid = 0;  // 0: solver default
  double tol = 1e-10;
  unsigned seed = 5;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int fiber = 64;
  std::string out;
  std::string csv;
  std::string obj;

  void validate() const {
    if (!(tol > 0)) throw Error(ErrorKind::InvalidInput, "tolerance must be positive");
    if (grid < 0) throw Error(ErrorKind::InvalidInput, "grid must be non-negative");
    if (threads < 1) throw Error(ErrorKind::InvalidInput, "thread count must be positive");
    if (fiber < 8 || fiber % 4 != 0) throw Error(ErrorKind::InvalidInput, "fiber must be a multiple of 4, at least 8");
  }
};

inline Json to_json(const RunConfig& c) {
  return Json{{"command", c.command}, {"fixture", c.fixture}, {"scene", c.scene}, {"spec", c.spec},
              {"grid", c.grid},       {"tol", c.tol},         {"seed", c.seed},   {"threads", c.threads},
              {"fiber", c.fiber},     {"out", c.out},         {"csv", c.csv},     {"obj", c.obj}};
}

/// "linear:1,2,3,4" or "cyclic:1,2,3,4" with 1-based curve indices.
inline OrderSpec parse_spec(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidInput, "spec must look like mode:i,j,k,l");
  std::string mode = text.substr(0, colon);
  OrderMode m;
  if (mode == "linear") {
    m = OrderMode::Linear;
  } else if (mode == "cyclic") {
    m = OrderMode::Cyclic;
  } else {
    throw Error(ErrorKind::InvalidInput, "spec mode must be linear or cyclic");
  }
  std::vector<int> slots;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      slots.push_back(v - 1);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, "bad curve index '" + item + "' in spec");
    }
  }
  return OrderSpec(m, slots);
}

inline std::string format_spec(const OrderSpec& s) {
  std::string out = s.mode == OrderMode::Linear ? "linear:" : "cyclic:";
  for (int i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s.slots[i] + 1);
  return out;
}

// Scene serialization. A Fourier row k holds (a_k, b_k): six numbers for an
// affine curve, eight (w, x, y, z) for a projective one.

inline Json curve_to_json(const ClosedCurve& c) {
  Json j;
  j["name"] = c.name();
  j["space"] = to_string(c.space());
  j["orientation"] = c.orientation();
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, PolylineRep>) {
          j["representation"] = "polyline";
          Json pts = Json::array();
          for (const auto& p : r.points) pts.push_back({p(0), p(1), p(2)});
          j["points"] = pts;
        } else {
          j["representation"] = "fourier";
          Json rows = Json::array();
          for (int k = 0; k <= r.degree(); ++k) {
            Json row = Json::array();
            for (int i = 0; i < r.cos_coeffs.rows(); ++i) row.push_back(r.cos_coeffs(i, k));
            for (int i = 0; i < r.sin_coeffs.rows(); ++i) row.push_back(r.sin_coeffs(i, k));
            rows.push_back(row);
          }
          j["coefficients"] = rows;
        }
      },
      c.rep());
  return j;
}

inline ClosedCurve curve_from_json(const Json& j) {
  try {
    const std::string name = j.at("name").get<std::string>();
    const std::string space = j.at("space").get<std::string>();
    const std::string rep = j.at("representation").get<std::string>();
    const int orientation = j.value("orientation", 1);
    if (space != "affine" && space != "projective") throw Error(ErrorKind::InvalidInput, "unknown space " + space);
    if (rep == "polyline") {
      if (space != "affine") throw Error(ErrorKind::InvalidInput, "polylines must be affine");
      std::vector<Point3> pts;
      for (const auto& p : j.at("points")) {
        if (p.size() != 3) throw Error(ErrorKind::InvalidInput, "polyline points have three coordinates");
        pts.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      }
      return ClosedCurve::polyline(name, std::move(pts), orientation);
    }
    if (rep != "fourier") throw Error(ErrorKind::InvalidInput, "unknown representation " + rep);
    const auto& rows = j.at("coefficients");
    const int dim = space == "affine" ? 3 : 4;
    const int n = static_cast<int>(rows.size());
    if (n < 1) throw Error(ErrorKind::InvalidInput, "empty coefficient list");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, n), s = c;
    for (int k = 0; k < n; ++k) {
      if (static_cast<int>(rows[k].size()) != 2 * dim)
        throw Error(ErrorKind::InvalidInput, "coefficient rows must have " + std::to_string(2 * dim) + " entries");
      for (int i = 0; i < dim; ++i) {
        c(i, k) = rows[k][i].get<double>();
        s(i, k) = rows[k][dim + i].get<double>();
      }
    }
    if (dim == 3) return ClosedCurve::fourier(name, c, s, orientation);
    return ClosedCurve::homogeneous(name, c, s, orientation);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed curve: ") + e.what());
  }
}

struct Scene {
  std::string name;
  Space space = Space::Affine;
  std::vector<ClosedCurve> curves;
};

inline Json scene_to_json(const Scene& s) {
  Json curves = Json::array();
  for (const auto& c : s.curves) curves.push_back(curve_to_json(c));
  return Json{{"name", s.name}, {"space", to_string(s.space)}, {"curves", curves}};
}

/// Accepts an object with a "curves" array or a bare array of curves.
inline Scene scene_from_json(const Json& j) {
  Scene s;
  const Json* list = &j;
  if (j.is_object()) {
    if (!j.contains("curves")) throw Error(ErrorKind::InvalidInput, "scene has no curves");
    list = &j.at("curves");
    s.name = j.value("name", std::string("scene"));
  }
  if (!list->is_array() || list->empty()) throw Error(ErrorKind::InvalidInput, "scene curves must be a non-empty array");
  bool projective = false;
  for (const auto& c : *list) {
    s.curves.push_back(curve_from_json(c));
    projective = projective || !s.curves.back().is_affine();
  }
  s.space = projective ? Space::Projective : Space::Affine;
  if (j.is_object() && j.contains("space")) {
    auto sp = j.at("space").get<std::string>();
    if (sp == "projective") s.space = Space::Projective;
    else if (sp != "affine") throw Error(ErrorKind::InvalidInput, "unknown scene space " + sp);
    if (sp == "affine" && projective) throw Error(ErrorKind::InvalidInput, "affine scene holds projective curves");
  }
  return s;
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed scene JSON: ") + e.what());
  }
  return scene_from_json(j);
}

inline Scene scene_of(const Fixture& f) { return {f.name, f.space, f.curves}; }

// Reports.

inline Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json to_json(const LinkingMatrix& m) {
  Json raw = Json::array(), rounded = Json::array();
  for (int i = 0; i < m.size(); ++i) {
    Json r = Json::array(), q = Json::array();
    for (int j = 0; j < m.size(); ++j) {
      r.push_back(m.raw(i, j));
      q.push_back(m.value(i, j));
    }
    raw.push_back(r);
    rounded.push_back(q);
  }
  return Json{{"space", to_string(m.space)}, {"raw", raw}, {"rounded", rounded}};
}

inline Json to_json(const Transversal& tr) {
  Json hits = Json::array();
  for (const auto& h : tr.hits) {
    Json jh{{"slot", h.slot + 1}, {"curve", h.curve + 1}, {"t", h.t}, {"s", h.s}, {"hpoint", vec_json(h.hpoint)}};
    if (h.point) jh["point"] = vec_json(*h.point);
    hits.push_back(jh);
  }
  Json j{{"plucker", vec_json(tr.plucker)}, {"hits", hits},          {"order_ok", tr.order_ok},
         {"weight", tr.weight},             {"cond", tr.cond},       {"residual", tr.residual}};
  if (tr.line) j["line"] = {{"direction", vec_json(tr.line->d)}, {"moment", vec_json(tr.line->m)}};
  return j;
}

inline Json to_json(const SignatureReport& r) {
  Json lines = Json::array();
  for (const auto& l : r.lines) {
    Json j = to_json(l.line);
    j["o_val"] = l.detail.o_val;
    j["sign_products"] = l.detail.sign_products;
    j["frame_det"] = l.detail.frame_det;
    lines.push_back(j);
  }
  return Json{{"spec", format_spec(r.spec)},         {"space", to_string(r.space)}, {"lines", lines},
              {"count", r.lines.size()},             {"signature", r.signature},    {"theorem", r.theorem.value()},
              {"match", r.match},                    {"count_bound_ok", r.count_bound_ok},
              {"linking", to_json(r.lk)},            {"calibration", r.calibration}};
}

inline Json to_json(const CircleTransversal& ct) {
  Json hits = Json::array();
  for (const auto& h : ct.hits) {
    Json jh{{"slot", h.slot + 1}, {"t", h.t}, {"point", vec_json(h.point)}, {"angle", h.angle}};
    jh["curve"] = h.curve == kThroughPoint ? Json("point") : Json(h.curve + 1);
    hits.push_back(jh);
  }
  return Json{{"center", vec_json(ct.circle.center)},
              {"radius", ct.circle.radius},
              {"normal", vec_json(ct.circle.normal)},
              {"hits", hits},
              {"order_ok", ct.order_ok},
              {"weight", ct.weight},
              {"cond", ct.cond},
              {"residual", ct.residual}};
}

inline Json to_json(const CircleSignatureReport& r) {
  Json circles = Json::array();
  for (const auto& c : r.circles) {
    Json j = to_json(c.circle);
    j["o_val"] = c.detail.o_val;
    j["sign_products"] = c.detail.sign_products;
    j["frame_det"] = c.detail.frame_det;
    circles.push_back(j);
  }
  return Json{{"spec", format_spec(r.spec)}, {"circles", circles},        {"count", r.circles.size()},
              {"signature", r.signature},    {"theorem", r.theorem},      {"match", r.match},
              {"count_bound_ok", r.count_bound_ok}, {"linking", to_json(r.lk)}, {"calibration", r.calibration}};
}

inline Json to_json(const SecantBranch& b) {
  Json pinches = Json::array();
  for (const auto& p : b.pinches)
    pinches.push_back({{"t", vec_json(p.t)},
                       {"special", p.special + 1},
                       {"class", to_string(p.cls)},
                       {"lk_sign", {p.lk_before, p.lk_after}},
                       {"orientation_sign", {p.product_before, p.product_after}}});
  int regular = 0;
  for (const auto& v : b.vertices) regular += v.regular ? 1 : 0;
  Json j{{"vertices", b.vertices.size()}, {"regular_vertices", regular}, {"orientation", b.orientation},
         {"length", b.length},            {"pinches", pinches}};
  if (b.middle >= 0) j["middle"] = b.middle + 1;
  return j;
}

/// One row per transversal: index, weight, residual, then the hit parameters.
inline std::string lines_csv(const std::vector<Transversal>& lines) {
  std::ostringstream out;
  out.precision(17);
  out << "index,weight,residual,cond";
  size_t hits = lines.empty() ? 0 : lines.front().hits.size();
  for (size_t k = 0; k < hits; ++k) out << ",t" << k + 1;
  out << "\n";
  for (size_t i = 0; i < lines.size(); ++i) {
    out << i << "," << lines[i].weight << "," << lines[i].residual << "," << lines[i].cond;
    for (const auto& h : lines[i].hits) out << "," << h.t;
    out << "\n";
  }
  return out.str();
}

inline std::string circles_csv(const std::vector<CircleTransversal>& circles) {
  std::ostringstream out;
  out.precision(17);
  out << "index,weight,radius,cx,cy,cz";
  size_t hits = circles.empty() ? 0 : circles.front().hits.size();
  for (size_t k = 0; k < hits; ++k) out << ",t" << k + 1;
  out << "\n";
  for (size_t i = 0; i < circles.size(); ++i) {
    const auto& c = circles[i];
    out << i << "," << c.weight << "," << c.circle.radius << "," << c.circle.center(0) << "," << c.circle.center(1)
        << "," << c.circle.center(2);
    for (const auto& h : c.hits) out << "," << h.t;
    out << "\n";
  }
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace secantlink
