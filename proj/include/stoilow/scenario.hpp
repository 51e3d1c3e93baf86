#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "stoilow/branch.hpp"
#include "stoilow/error.hpp"
#include "stoilow/factor.hpp"
#include "stoilow/io/json.hpp"
#include "stoilow/io/svg.hpp"
#include "stoilow/lifting.hpp"
#include "stoilow/normal.hpp"
#include "stoilow/regularity.hpp"
#include "stoilow/zoo.hpp"

namespace stoilow {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

// Task parameters. Optional radii fall back to the normal-radius search.
struct NormalTask {
  Point at;
  std::optional<double> radius;
  double cell = 0.01;
  double extent = 1.0;
};
struct LiftTask {
  Point center;
  std::optional<double> radius;
  std::vector<Point> path;
  Point from;
  double tol = 1e-3;
  double cell = 0.01;
  double extent = 1.0;
};
struct RayLiftsTask {
  Point center;
  std::optional<double> radius;
  Point dir{1, 0};
  double tol = 1e-3;
  std::optional<int> max_lifts;  // scenario-wide cap when absent
  double cell = 0.01;
  double extent = 1.0;
};
struct DegreeTask {
  Point at;
  double rho = 0.1;
  int samples = 64;
};
struct BranchTask {
  Rect box;
  double cell = 0.01;
};
struct FactorTask {
  Point at;
  std::optional<double> radius;
  double cell = 0.01;
  double tol = 1e-2;
  double extent = 1.0;
  int probes = 1000;
  std::optional<int> force_k;
};
struct ConservationTask {
  Point center;
  std::optional<double> radius;
  int probes = 50;
  double cell = 0.01;
  double extent = 1.0;
};
struct RegularityTask {
  Rect box{-0.5, -0.5, 0.5, 0.5};
  double resolution = 0.01;
};

using Task = std::variant<NormalTask, LiftTask, RayLiftsTask, DegreeTask, BranchTask, FactorTask, ConservationTask,
                          RegularityTask>;

inline constexpr const char* kTaskNames[] = {"normal", "lift",         "raylifts",  "degree",
                                             "branch", "factor",       "conservation", "regularity"};

inline std::string task_name(const Task& t) { return kTaskNames[t.index()]; }

struct Scenario {
  std::string map;
  std::string pre = "id", post = "id";
  std::string output = "out";
  bool render = false;
  std::uint64_t seed = 1;
  int max_lifts = 64;
  std::vector<Task> tasks;
};

namespace detail {

using io::Json;

inline Json opt(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

inline Json params_json(const Task& task) {
  return std::visit(
      [](const auto& t) -> Json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, NormalTask>)
          return Json{{"at", io::point(t.at)}, {"radius", opt(t.radius)}, {"cell", t.cell}, {"extent", t.extent}};
        else if constexpr (std::is_same_v<T, LiftTask>)
          return Json{{"center", io::point(t.center)}, {"radius", opt(t.radius)}, {"path", io::points(t.path)},
                      {"from", io::point(t.from)},     {"tol", t.tol},            {"cell", t.cell},
                      {"extent", t.extent}};
        else if constexpr (std::is_same_v<T, RayLiftsTask>)
          return Json{{"center", io::point(t.center)}, {"radius", opt(t.radius)},
                      {"dir", io::point(t.dir)},       {"tol", t.tol},
                      {"max_lifts", t.max_lifts ? Json(*t.max_lifts) : Json(nullptr)},
                      {"cell", t.cell},                {"extent", t.extent}};
        else if constexpr (std::is_same_v<T, DegreeTask>)
          return Json{{"at", io::point(t.at)}, {"rho", t.rho}, {"samples", t.samples}};
        else if constexpr (std::is_same_v<T, BranchTask>)
          return Json{{"box", io::rect(t.box)}, {"cell", t.cell}};
        else if constexpr (std::is_same_v<T, FactorTask>)
          return Json{{"at", io::point(t.at)}, {"radius", opt(t.radius)}, {"cell", t.cell},
                      {"tol", t.tol},          {"extent", t.extent},      {"probes", t.probes},
                      {"force_k", t.force_k ? Json(*t.force_k) : Json(nullptr)}};
        else if constexpr (std::is_same_v<T, ConservationTask>)
          return Json{{"center", io::point(t.center)}, {"radius", opt(t.radius)}, {"probes", t.probes},
                      {"cell", t.cell},                {"extent", t.extent}};
        else
          return Json{{"box", io::rect(t.box)}, {"resolution", t.resolution}};
      },
      task);
}

inline Task parse_task(const Json& j, const std::string& path) {
  io::Fields f(j, path);
  std::string type = f.text("type");
  if (type == "normal") {
    f.only({"type", "at", "radius", "cell", "extent"});
    return NormalTask{f.pt("at"), f.optional_positive("radius"), f.positive("cell", 0.01), f.positive("extent", 1.0)};
  }
  if (type == "lift") {
    f.only({"type", "center", "radius", "path", "from", "tol", "cell", "extent"});
    LiftTask t{f.pt("center"), f.optional_positive("radius"), f.pts("path"), f.pt("from"),
               f.positive("tol", 1e-3), f.positive("cell", 0.01), f.positive("extent", 1.0)};
    if (t.path.size() < 2) f.error("path", "needs at least 2 points");
    return t;
  }
  if (type == "raylifts") {
    f.only({"type", "center", "radius", "dir", "tol", "max_lifts", "cell", "extent"});
    RayLiftsTask t{f.pt("center"), f.optional_positive("radius"), f.pt("dir", {1, 0}), f.positive("tol", 1e-3),
                   std::nullopt, f.positive("cell", 0.01), f.positive("extent", 1.0)};
    if (t.dir == Point{0, 0}) f.error("dir", "must be nonzero");
    if (t.tol >= 1) f.error("tol", "must be below 1");
    if (f.has("max_lifts")) t.max_lifts = f.integer("max_lifts", 1, 64);
    return t;
  }
  if (type == "degree") {
    f.only({"type", "at", "rho", "samples"});
    return DegreeTask{f.pt("at"), f.positive("rho"), f.integer("samples", 64, 64)};
  }
  if (type == "branch") {
    f.only({"type", "box", "cell"});
    return BranchTask{f.box("box"), f.positive("cell", 0.01)};
  }
  if (type == "factor") {
    f.only({"type", "at", "radius", "cell", "tol", "extent", "probes", "force_k"});
    FactorTask t{f.pt("at"), f.optional_positive("radius"), f.positive("cell", 0.01), f.positive("tol", 1e-2),
                 f.positive("extent", 1.0), f.integer("probes", 1, 1000), std::nullopt};
    if (f.has("force_k")) t.force_k = f.integer("force_k", 1, 1);
    return t;
  }
  if (type == "conservation") {
    f.only({"type", "center", "radius", "probes", "cell", "extent"});
    return ConservationTask{f.pt("center"), f.optional_positive("radius"), f.integer("probes", 1, 50),
                            f.positive("cell", 0.01), f.positive("extent", 1.0)};
  }
  if (type == "regularity") {
    f.only({"type", "box", "resolution"});
    return RegularityTask{f.box("box", {-0.5, -0.5, 0.5, 0.5}), f.positive("resolution", 0.01)};
  }
  f.error("type", "unknown task type \"" + type + "\"");
}

}  // namespace detail

inline Scenario parse_scenario(const io::Json& j) {
  io::Fields f(j, "");
  f.only({"map", "pre", "post", "output", "render", "seed", "max_lifts", "tasks"});
  Scenario s;
  s.map = f.text("map");
  s.pre = f.text("pre", "id");
  s.post = f.text("post", "id");
  for (const char* key : {"pre", "post"}) {
    try {
      homeomorphism_by_name(key == std::string("pre") ? s.pre : s.post);
    } catch (const Error& e) {
      f.error(key, e.what());
    }
  }
  s.output = f.text("output", "out");
  s.render = f.boolean("render", false);
  s.seed = f.seed("seed", 1);
  s.max_lifts = f.integer("max_lifts", 1, 64);
  const io::Json& tasks = f.raw("tasks");
  if (!tasks.is_array()) f.error("tasks", "expected an array");
  for (std::size_t i = 0; i < tasks.size(); ++i)
    s.tasks.push_back(detail::parse_task(tasks[i], "tasks[" + std::to_string(i) + "]"));
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  io::Json j = io::parse_text(ss.str(), path);
  try {
    return parse_scenario(j);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

// Scenario echo for reports; the output directory is left out so reports
// written to different places compare equal.
inline io::Json scenario_json(const Scenario& s) {
  io::Json tasks = io::Json::array();
  for (const Task& t : s.tasks) {
    io::Json p{{"type", task_name(t)}};
    p.update(detail::params_json(t));
    tasks.push_back(p);
  }
  return io::Json{{"map", s.map},         {"pre", s.pre},   {"post", s.post}, {"render", s.render},
                  {"seed", s.seed},       {"max_lifts", s.max_lifts}, {"tasks", tasks}};
}

struct TaskOutcome {
  std::string kind;
  bool ok = false;
  io::Json result;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
  double seconds = 0;
  std::string svg;                 // empty unless rendered
  std::optional<io::Json> chart;   // factor tasks: psi table
};

struct Report {
  io::Json doc;
  bool success = true;
  std::vector<TaskOutcome> outcomes;
};

namespace detail {

inline Rect points_bounds(const std::vector<Point>& pts) {
  Rect r = Rect::bounding(pts);
  if (!r.valid()) r = r.inflated(1e-3);
  return r;
}

inline Rect region_bounds(const CellRegion& region) {
  const double h = region.grid().cell_size();
  return points_bounds(region.centers()).inflated(h);
}

inline std::vector<Point> thin(const std::vector<Point>& pts, std::size_t cap) {
  if (pts.size() <= cap) return pts;
  std::vector<Point> out;
  const std::size_t step = (pts.size() + cap - 1) / cap;
  for (std::size_t i = 0; i < pts.size(); i += step) out.push_back(pts[i]);
  return out;
}

inline std::vector<Point> circle_points(Point c, double r, int n = 180) {
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) out.push_back(c + std::polar(r, kTwoPi * i / n));
  return out;
}

// Hex color on a hue wheel; hex rather than hsl() for wider viewer support.
inline std::string hue(double angle) {
  double hdeg = std::fmod((angle + kPi) / kTwoPi * 360.0, 360.0);
  double x = 1 - std::abs(std::fmod(hdeg / 60.0, 2.0) - 1);
  double rgb[3] = {0, 0, 0};
  int sector = int(hdeg / 60.0) % 6;
  const int order[6][3] = {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}, {2, 1, 0}, {1, 2, 0}, {0, 2, 1}};
  rgb[order[sector][0]] = 1;
  rgb[order[sector][1]] = x;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(std::lround(40 + 170 * rgb[0])),
                int(std::lround(40 + 170 * rgb[1])), int(std::lround(40 + 170 * rgb[2])));
  return buf;
}

// Domain panel plus image panel, shared by normal, lift, raylifts, conservation.
struct TwoPanels {
  io::SvgDocument doc;
  io::SvgPanel left, right;
  TwoPanels(const std::string& title, const NormalDomain& nd, const Rect& domain_extra, const Rect& image_extra)
      : doc(title),
        left(doc.panel(io::window(hull(region_bounds(nd.region), domain_extra)), "domain: U(x, f, r)")),
        right(doc.panel(io::window(hull(Rect::centered(nd.image_center, nd.radius), image_extra)),
                        "image: B(f(x), r)")) {
    left.region(nd.region, "#cfe0f5", "#4a78b0");
    left.dot(nd.center, 3, "#000");
    right.circle(nd.image_center, nd.radius, "#4a78b0", "#eef4fb");
    right.dot(nd.image_center, 3, "#000");
  }
  static Rect hull(const Rect& a, const Rect& b) {
    if (!b.valid()) return a;
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
  }
};

struct Runner {
  const PlanarMap& map;
  const Scenario& scenario;
  std::uint64_t seed;
  bool render;
  TaskOutcome& out;

  NormalOptions normal_options() const {
    NormalOptions o;
    o.seed = seed;
    return o;
  }
  LiftOptions lift_options() const {
    LiftOptions o;
    o.seed = seed;
    return o;
  }

  void operator()(const NormalTask& t) {
    FittedNormal fit = fit_normal_domain(map, t.at, t.radius, t.cell, t.extent, normal_options());
    const NormalDomain& nd = fit.nd;
    out.result = io::normal_domain(nd);
    out.result["v_half_side"] = fit.v_half_side;
    out.result["normal_neighbourhood"] = is_normal_neighbourhood(map, nd);
    if (!render) return;
    TwoPanels p("normal " + map.label(), nd, {}, {});
    std::vector<Point> fb;
    for (Point q : thin(region_boundary(nd.region), 2000)) fb.push_back(map(q));
    for (Point w : fb) p.right.dot(w, 1.2, "#c0392b");
    out.svg = p.doc.str();
  }

  void operator()(const LiftTask& t) {
    NormalDomain nd = fit_normal_domain(map, t.center, t.radius, t.cell, t.extent, normal_options()).nd;
    Polyline beta = Polyline::through(t.path);
    LiftResult lr = lift_path(map, nd, beta, t.from, t.tol, lift_options());
    out.result = io::lift_result(lr);
    out.result["normal_domain"] = io::normal_domain(nd, false);
    if (!render) return;
    TwoPanels p("lift " + map.label(), nd, points_bounds(lr.lift.vertices()), points_bounds(t.path));
    p.left.polyline(lr.lift.vertices(), "#c0392b", 2);
    p.left.dot(t.from, 3, "#c0392b");
    p.right.polyline(t.path, "#c0392b", 2);
    out.svg = p.doc.str();
  }

  void operator()(const RayLiftsTask& t) {
    NormalDomain nd = fit_normal_domain(map, t.center, t.radius, t.cell, t.extent, normal_options()).nd;
    RayLifts rl = enumerate_ray_lifts(map, nd, t.dir, t.tol, t.max_lifts.value_or(scenario.max_lifts), lift_options());
    out.result = io::ray_lifts(rl);
    out.result["direction"] = io::point(t.dir / std::abs(t.dir));
    out.result["normal_domain"] = io::normal_domain(nd, false);
    if (!render) return;
    TwoPanels p("raylifts " + map.label(), nd, {}, {});
    for (const auto& l : rl.lifts) {
      p.left.polyline(l.lift.vertices(), "#c0392b", 2);
      p.left.dot(l.lift.back(), 3, "#c0392b");
    }
    if (!rl.lifts.empty()) p.right.polyline(rl.lifts.front().target.vertices(), "#c0392b", 2);
    out.svg = p.doc.str();
  }

  void operator()(const DegreeTask& t) {
    LocalDegreeResult d = local_degree(map, t.at, t.rho, t.samples);
    out.result = io::local_degree(d);
    if (!render) return;
    std::vector<Point> loop = circle_points(t.at, t.rho, 256), image;
    for (Point q : loop) image.push_back(map(q));
    Point fz = map(t.at);
    io::SvgDocument doc("degree " + map.label() + ": " + std::to_string(d.degree));
    io::SvgPanel a = doc.panel(io::window(Rect::centered(t.at, t.rho)), "probe loop");
    a.polyline(loop, "#4a78b0", 1.5, true);
    a.dot(t.at, 3, "#000");
    std::vector<Point> both = image;
    both.push_back(fz);
    io::SvgPanel b = doc.panel(io::window(points_bounds(both)), "image loop");
    b.polyline(image, "#c0392b", 1.5, true);
    b.dot(fz, 3, "#000");
    out.svg = doc.str();
  }

  void operator()(const BranchTask& t) {
    BranchReport rep = detect_branch_points(map, t.box, Grid(t.box, t.cell));
    out.result = io::branch_report(rep);
    if (!render) return;
    io::SvgDocument doc("branch " + map.label());
    io::SvgPanel a = doc.panel(io::window(t.box), "branch points");
    a.box(t.box, "#555");
    for (const auto& bp : rep.branch_points) {
      a.circle(bp.location, bp.isolation_radius, "#4a78b0", "none", 1);
      a.dot(bp.location, 2.0 + 1.5 * std::abs(bp.degree), "#c0392b");
      a.label(bp.location, "k=" + std::to_string(bp.degree));
    }
    out.svg = doc.str();
  }

  void operator()(const FactorTask& t) {
    FactorOptions fo;
    fo.tol = t.tol;
    fo.force_k = t.force_k;
    fo.radius = t.radius;
    fo.normal = normal_options();
    NormalFormChart ch = build_normal_form(map, t.at, grid_around(map, t.at, t.extent, t.cell), fo);
    NormalFormReport vr = verify_normal_form(map, ch, t.probes, seed);
    out.result = io::chart_summary(ch);
    out.result["verification"] = io::normal_form_report(vr);
    out.result["normal_domain"] = io::normal_domain(ch.nd, false);
    out.chart = io::chart_table(ch);
    if (!render) return;
    const RegionImage& ri = *ch.nd.image;
    const int stride = std::max(1, int(std::ceil(std::sqrt(double(ri.size()) / 1500.0))));
    io::SvgDocument doc("factor " + map.label() + ": k=" + std::to_string(ch.k));
    io::SvgPanel u = doc.panel(io::window(region_bounds(ch.nd.region)), "U, colored by arg psi");
    u.region(ch.nd.region, "#eeeeee", "#777");
    io::SvgPanel d = doc.panel(io::window(Rect::centered({0, 0}, 1)), "psi(U) in the unit disk");
    d.circle({0, 0}, 1, "#777");
    io::SvgPanel v = doc.panel(io::window(Rect::centered(ch.nd.image_center, ch.nd.radius)), "fU = phi^-1(psi^k)");
    v.circle(ch.nd.image_center, ch.nd.radius, "#777");
    for (std::size_t i = 0; i < ri.size(); ++i) {
      Cell at = ri.cell(Local(i));
      if (at.col % stride || at.row % stride) continue;
      Point w = ch.psi[i];
      std::string c = hue(std::arg(w));
      u.dot(ri.center(Local(i)), 1.6, c);
      d.dot(w, 1.6, c);
      v.dot(ri.image(Local(i)), 1.6, c);
    }
    out.svg = doc.str();
  }

  void operator()(const ConservationTask& t) {
    NormalDomain nd = fit_normal_domain(map, t.center, t.radius, t.cell, t.extent, normal_options()).nd;
    ConservationReport rep = degree_conservation_check(map, nd, t.probes, seed);
    out.result = io::conservation(rep);
    out.result["normal_neighbourhood"] = is_normal_neighbourhood(map, nd);
    out.result["normal_domain"] = io::normal_domain(nd, false);
    if (!render) return;
    TwoPanels p("conservation " + map.label(), nd, {}, {});
    for (std::size_t i = 0; i < rep.probes.size(); ++i)
      p.right.dot(rep.probes[i], 2.5, rep.counts[i] == std::abs(rep.degree) ? "#27ae60" : "#c0392b");
    out.svg = p.doc.str();
  }

  void operator()(const RegularityTask& t) {
    RegularityReport rep = check_regularity(map, t.box, t.resolution);
    out.result = io::regularity(rep);
    if (!render) return;
    io::SvgDocument doc("regularity " + map.label());
    io::SvgPanel a = doc.panel(io::window(t.box), "witnesses: open (red), light (blue)");
    a.box(t.box, "#555");
    for (Point w : rep.openness_witnesses) a.dot(w, 3, "#c0392b");
    for (Point w : rep.lightness_witnesses) a.dot(w, 3, "#2e86c1");
    out.svg = doc.str();
  }
};

}  // namespace detail

// Runs every task against one shared map instance. Task failures become
// error entries; later tasks still run.
inline Report run(const Scenario& s) {
  using Clock = std::chrono::steady_clock;
  Report rep;
  io::Json tasks = io::Json::array(), timing = io::Json::array();
  std::optional<ZooEntry> entry;
  std::optional<Error> map_error;
  auto t0 = Clock::now();
  try {
    entry = lookup_map(s.map, s.pre, s.post);
  } catch (const Error& e) {
    map_error = e;
  }
  for (std::size_t i = 0; i < s.tasks.size(); ++i) {
    TaskOutcome out;
    out.kind = task_name(s.tasks[i]);
    auto start = Clock::now();
    try {
      if (map_error) throw *map_error;
      detail::Runner runner{entry->map, s, mix_seed(s.seed, i + 1), s.render, out};
      std::visit(runner, s.tasks[i]);
      out.ok = true;
    } catch (const Error& e) {
      out.ok = false;
      out.code = e.code();
      out.message = e.what();
      out.svg.clear();
      out.chart.reset();
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    io::Json t{{"index", i}, {"kind", out.kind}, {"params", detail::params_json(s.tasks[i])}};
    if (out.ok) {
      t["status"] = "ok";
      t["result"] = out.result;
    } else {
      t["status"] = "error";
      t["error"] = io::Json{{"code", std::string(to_string(out.code))}, {"message", out.message}};
    }
    tasks.push_back(std::move(t));
    timing.push_back(out.seconds);
    rep.success = rep.success && out.ok;
    rep.outcomes.push_back(std::move(out));
  }
  double total = std::chrono::duration<double>(Clock::now() - t0).count();
  rep.doc = io::Json{{"report_version", kReportVersion},
                     {"tool", io::Json{{"name", "stoilow"}, {"version", kVersion}}},
                     {"scenario", scenario_json(s)},
                     {"success", rep.success},
                     {"tasks", tasks},
                     {"timing", io::Json{{"unit", "seconds"}, {"total", total}, {"tasks", timing}}}};
  return rep;
}

// report.json, task-<i>.svg and, for factor tasks, chart-<i>.json.
inline void write_report(const Report& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot write " + (fs::path(dir) / name).string());
    f << text;
  };
  put("report.json", rep.doc.dump(2) + "\n");
  for (std::size_t i = 0; i < rep.outcomes.size(); ++i) {
    if (!rep.outcomes[i].svg.empty()) put("task-" + std::to_string(i) + ".svg", rep.outcomes[i].svg);
    if (rep.outcomes[i].chart) put("chart-" + std::to_string(i) + ".json", rep.outcomes[i].chart->dump() + "\n");
  }
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<int> max_lifts;
  bool render = false;  // forces rendering on
};

inline Report run_scenario(const std::string& path, const RunOverrides& ov = {}) {
  Scenario s = load_scenario(path);
  if (ov.seed) s.seed = *ov.seed;
  if (ov.output) s.output = *ov.output;
  if (ov.max_lifts) s.max_lifts = *ov.max_lifts;
  s.render = s.render || ov.render;
  Report rep = run(s);
  write_report(rep, s.output);
  return rep;
}

}  // namespace stoilow
