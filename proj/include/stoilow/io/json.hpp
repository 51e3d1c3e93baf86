#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include "stoilow/branch.hpp"
#include "stoilow/error.hpp"
#include "stoilow/factor.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/lifting.hpp"
#include "stoilow/normal.hpp"
#include "stoilow/regularity.hpp"
#include "stoilow/zoo.hpp"

namespace stoilow::io {

// Key order is insertion order so dumps are stable and readable.
using Json = nlohmann::ordered_json;

// Non-finite values have no JSON form; they become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json point(Point p) { return Json::array({number(p.real()), number(p.imag())}); }

inline Json points(const std::vector<Point>& ps) {
  Json a = Json::array();
  for (Point p : ps) a.push_back(point(p));
  return a;
}

inline Json rect(const Rect& r) { return Json::array({r.x0, r.y0, r.x1, r.y1}); }

inline Json grid_header(const Grid& g) {
  return Json{{"bounds", rect(g.bounds())}, {"cell_size", g.cell_size()}, {"nx", g.nx()}, {"ny", g.ny()}};
}

inline Json region(const CellRegion& r) {
  return Json{{"grid", grid_header(r.grid())}, {"cells", r.size()}, {"members", r.members()}};
}

inline Json evidence(const NormalEvidence& ev) {
  return Json{{"boundary_hausdorff", number(ev.boundary_hausdorff)},
              {"boundary_tolerance", number(ev.boundary_tolerance)},
              {"image_fill", number(ev.image_fill)},
              {"fill_threshold", number(ev.fill_threshold)},
              {"fill_tolerance", number(ev.fill_tolerance)},
              {"lipschitz", number(ev.lipschitz)}};
}

inline Json normal_domain(const NormalDomain& nd, bool members = true) {
  Json j{{"center", point(nd.center)},
         {"radius", nd.radius},
         {"image_center", point(nd.image_center)},
         {"diameter", nd.diameter()},
         {"evidence", evidence(nd.evidence)}};
  if (members)
    j["region"] = region(nd.region);
  else
    j["region"] = Json{{"grid", grid_header(nd.grid())}, {"cells", nd.region.size()}};
  return j;
}

inline Json polyline(const Polyline& p) { return Json{{"vertices", points(p.vertices())}, {"params", p.params()}}; }

inline Json lift_result(const LiftResult& r) {
  Json j{{"sup_error", number(r.sup_error)},
         {"levels_used", r.levels_used},
         {"start", point(r.lift.front())},
         {"end", point(r.lift.back())},
         {"lift", polyline(r.lift)},
         {"target", polyline(r.target)}};
  if (!r.chains.empty()) {
    Json levels = Json::array();
    for (const auto& c : r.chains)
      levels.push_back(Json{{"level", c.level},
                            {"intervals", c.intervals()},
                            {"epsilon", number(c.epsilon)},
                            {"delta", number(c.delta)},
                            {"tube_radius", number(c.tube_radius)},
                            {"budget_violations", c.budget_violations},
                            {"nesting_fallbacks", c.nesting_fallbacks}});
    j["levels"] = levels;
  }
  return j;
}

inline Json ray_lifts(const RayLifts& r) {
  Json lifts = Json::array();
  for (const auto& l : r.lifts)
    lifts.push_back(Json{{"end", point(l.lift.back())}, {"sup_error", number(l.sup_error)}, {"lift", polyline(l.lift)}});
  return Json{{"count", r.lifts.size()},
              {"start_clusters", r.start_clusters},
              {"end_clusters", r.end_clusters},
              {"raw_paths", r.raw_paths},
              {"lifts", lifts}};
}

inline Json local_degree(const LocalDegreeResult& r) {
  return Json{{"point", point(r.point)},
              {"rho", r.rho},
              {"degree", r.degree},
              {"min_image_gap", number(r.min_image_gap)},
              {"samples", r.samples}};
}

inline Json branch_report(const BranchReport& r) {
  Json pts = Json::array();
  for (const auto& b : r.branch_points)
    pts.push_back(Json{{"location", point(b.location)}, {"degree", b.degree}, {"isolation_radius", b.isolation_radius}});
  return Json{{"search", rect(r.search)},
              {"resolution", r.resolution},
              {"candidates", r.candidates},
              {"branch_points", pts},
              {"pairwise_isolated", pairwise_isolated(r)}};
}

inline Json chart_summary(const NormalFormChart& ch) {
  return Json{{"k", ch.k},
              {"orientation", ch.orientation},
              {"center", point(ch.nd.center)},
              {"radius", ch.nd.radius},
              {"cells", ch.psi.size()},
              {"base_cell", point(ch.nd.image->center(ch.base_cell))},
              {"residual", number(ch.residual)},
              {"deck", Json{{"ring_winding", ch.ring_winding},
                            {"ring_shift", ch.ring_shift},
                            {"seam_mismatches", ch.seam_mismatches},
                            {"consistent", ch.ring_winding == ch.orientation * ch.k && ch.ring_shift == 0 &&
                                               ch.seam_mismatches == 0}}},
              {"injectivity", Json{{"threshold", number(ch.injectivity_threshold)},
                                   {"violations", ch.injectivity_violations}}}};
}

// Cell table of psi values: one [x, y, re psi, im psi] row per region cell.
inline Json chart_table(const NormalFormChart& ch) {
  const RegionImage& ri = *ch.nd.image;
  Json rows = Json::array();
  for (std::size_t i = 0; i < ch.psi.size(); ++i) {
    Point c = ri.center(Local(i));
    rows.push_back(Json::array({c.real(), c.imag(), ch.psi[i].real(), ch.psi[i].imag()}));
  }
  return Json{{"k", ch.k},
              {"phi", Json{{"translate", point(-ch.nd.image_center)}, {"scale", 1.0 / ch.nd.radius}}},
              {"grid", grid_header(ri.grid())},
              {"psi", rows}};
}

inline Json normal_form_report(const NormalFormReport& r) {
  return Json{{"probes", r.probes},
              {"max_residual", number(r.max_residual)},
              {"mean_residual", number(r.mean_residual)},
              {"min_separation_ratio", number(r.min_separation_ratio)},
              {"boundary_deviation", number(r.boundary_deviation)},
              {"center_modulus", number(r.center_modulus)}};
}

inline Json conservation(const ConservationReport& r) {
  return Json{{"degree", r.degree},
              {"probes", points(r.probes)},
              {"counts", r.counts},
              {"dissenting", r.dissenting},
              {"all_equal", r.all_equal}};
}

inline Json regularity(const RegularityReport& r) {
  return Json{{"openness_suspect", r.openness_suspect},
              {"lightness_suspect", r.lightness_suspect},
              {"openness_witnesses", points(r.openness_witnesses)},
              {"lightness_witnesses", points(r.lightness_witnesses)},
              {"max_fiber_diameter", number(r.max_fiber_diameter)},
              {"probes", r.probes}};
}

inline Json zoo_entry(const ZooEntry& e) {
  Json bps = Json::array();
  for (const auto& b : e.truth.branch_points) bps.push_back(Json{{"location", point(b.location)}, {"degree", b.degree}});
  const DomainSpec& d = e.map.domain();
  Json dom = d.shape() == DomainSpec::Shape::Disk
                 ? Json{{"disk", Json{{"center", point(d.center())}, {"radius", d.radius()}}}}
                 : Json{{"rectangle", rect(d.bounding_box())}};
  return Json{{"id", e.map.label()},
              {"domain", dom},
              {"claims", Json{{"light", e.map.claims().light},
                              {"open", e.map.claims().open},
                              {"discrete", e.map.claims().discrete}}},
              {"holomorphic", e.truth.holomorphic},
              {"branch_points", bps},
              {"critical_values", points(e.truth.critical_values)}};
}

// Typed access to one JSON object with field-path diagnostics.
class Fields {
 public:
  Fields(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(ErrorCode::ParseError, path_ + ": expected an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void error(const std::string& key, const std::string& what) const {
    fail(ErrorCode::ParseError, at(key) + ": " + what);
  }

  const Json& raw(const std::string& key) const {
    if (!has(key)) error(key, "missing required field");
    return obj_.at(key);
  }

  double real(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) error(key, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) error(key, "expected a finite number");
    return x;
  }
  double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

  double positive(const std::string& key) const {
    double x = real(key);
    if (!(x > 0)) error(key, "must be positive, got " + raw(key).dump());
    return x;
  }
  double positive(const std::string& key, double fallback) const { return has(key) ? positive(key) : fallback; }
  std::optional<double> optional_positive(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return positive(key);
  }

  int integer(const std::string& key, int lo, int fallback) const {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_integer()) error(key, "expected an integer");
    long long x = v.get<long long>();
    if (x < lo || x > 1000000000) error(key, "must be an integer >= " + std::to_string(lo));
    return int(x);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      error(key, "expected an unsigned integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) error(key, "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string() || v.get<std::string>().empty()) error(key, "expected a nonempty string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  // [re, im]
  Point pt(const std::string& key) const { return as_point(raw(key), at(key)); }
  Point pt(const std::string& key, Point fallback) const { return has(key) ? pt(key) : fallback; }

  std::vector<Point> pts(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array()) error(key, "expected an array of [re, im] points");
    std::vector<Point> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_point(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  // [x0, y0, x1, y1] with positive width and height
  Rect box(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 4) error(key, "expected [x0, y0, x1, y1]");
    double c[4];
    for (int i = 0; i < 4; ++i) {
      if (!v[std::size_t(i)].is_number()) error(key, "expected [x0, y0, x1, y1]");
      c[i] = v[std::size_t(i)].get<double>();
    }
    Rect r{c[0], c[1], c[2], c[3]};
    if (!r.valid()) error(key, "box must have positive width and height");
    return r;
  }
  Rect box(const std::string& key, Rect fallback) const { return has(key) ? box(key) : fallback; }

  // Rejects keys outside `known`, so typos do not silently fall back to defaults.
  void only(std::initializer_list<const char*> known) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool ok = false;
      for (const char* k : known) ok = ok || it.key() == k;
      if (!ok) error(it.key(), "unknown field");
    }
  }

 private:
  static Point as_point(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(ErrorCode::ParseError, where + ": expected [re, im]");
    double x = v[0].get<double>(), y = v[1].get<double>();
    if (!std::isfinite(x) || !std::isfinite(y)) fail(ErrorCode::ParseError, where + ": expected finite coordinates");
    return {x, y};
  }

  const Json& obj_;
  std::string path_;
};

// Parses JSON text; syntax errors carry the 1-based line and column.
inline Json parse_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    fail(ErrorCode::ParseError, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

}  // namespace stoilow::io
