// stoilow: command-line front end. Single-task subcommands print a report to
// stdout; `run` executes a scenario file and writes its report directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include "stoilow/stoilow.hpp"

using namespace stoilow;

namespace {

std::vector<double> numbers(const std::string& text, std::size_t want, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, flag + ": cannot read \"" + item + "\" as a number");
    }
  }
  if (out.size() != want)
    fail(ErrorCode::ParseError, flag + ": expected " + std::to_string(want) + " comma-separated numbers");
  return out;
}

Point point_arg(const std::string& text, const std::string& flag) {
  auto v = numbers(text, 2, flag);
  return {v[0], v[1]};
}

Rect box_arg(const std::string& text, const std::string& flag) {
  auto v = numbers(text, 4, flag);
  Rect r{v[0], v[1], v[2], v[3]};
  if (!r.valid()) fail(ErrorCode::ParseError, flag + ": box must have positive width and height");
  return r;
}

// A file of "re im" (or "re,im") lines, or inline "x,y;x,y;...".
std::vector<Point> path_arg(const std::string& text) {
  std::vector<Point> out;
  if (std::filesystem::is_regular_file(text)) {
    std::ifstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      for (char& c : line)
        if (c == ',') c = ' ';
      std::istringstream ls(line);
      double x, y;
      if (!(ls >> x)) continue;
      if (!(ls >> y)) fail(ErrorCode::ParseError, text + ":" + std::to_string(n) + ": expected \"re im\"");
      out.push_back({x, y});
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
      if (!item.empty()) out.push_back(point_arg(item, "--path"));
  }
  if (out.size() < 2) fail(ErrorCode::ParseError, "--path: needs at least 2 points");
  return out;
}

struct Globals {
  std::optional<double> cell, tol;
  std::string out, svg;
  std::uint64_t seed = 1;
  int max_lifts = 64;
  std::string pre = "id", post = "id";
};

int single(const Globals& g, const std::string& map, Task task) {
  Scenario s;
  s.map = map;
  s.pre = g.pre;
  s.post = g.post;
  s.seed = g.seed;
  s.max_lifts = g.max_lifts;
  s.render = !g.svg.empty();
  s.tasks.push_back(std::move(task));
  Report rep = run(s);
  std::cout << rep.doc.dump(2) << "\n";
  if (!g.out.empty()) write_report(rep, g.out);
  if (!g.svg.empty() && !rep.outcomes.front().svg.empty()) {
    std::ofstream f(g.svg, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot write " + g.svg);
    f << rep.outcomes.front().svg;
  }
  if (!rep.success) {
    const auto& o = rep.outcomes.front();
    std::cerr << "stoilow: " << to_string(o.code) << ": " << o.message << "\n";
  }
  return rep.success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal domains, path lifting, local degree, branch points and normal forms of planar maps"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  double cell = 0, tol = 0;
  app.add_option("--cell", cell, "grid cell size")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "tolerance (lift, raylifts, factor)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "write report.json (and SVG, charts) into this directory");
  app.add_option("--svg", g.svg, "write the task SVG to this file");
  app.add_option("--seed", g.seed, "seed for all random probe sampling")->capture_default_str();
  app.add_option("--max-lifts", g.max_lifts, "cap on distinct ray lifts")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--pre", g.pre, "pre-compose with a homeomorphism: id, shear, stretch, conj")->capture_default_str();
  app.add_option("--post", g.post, "post-compose with a homeomorphism")->capture_default_str();

  std::string map, at, center, dir = "1,0", box, path, from;
  double radius = 0, rho = 0, extent = 1.0;
  int samples = 64, probes = 0, force_k = 0;

  auto need_map = [&](CLI::App* sub) { sub->add_option("--map", map, "zoo id or sampled:<path>")->required(); };
  auto opt_radius = [&](CLI::App* sub) {
    sub->add_option("--radius", radius, "image disk radius (default: normal-radius search)")->check(CLI::PositiveNumber);
  };
  auto opt_extent = [&](CLI::App* sub) {
    sub->add_option("--extent", extent, "initial grid half-width around the center")->check(CLI::PositiveNumber);
  };

  auto* normal = app.add_subcommand("normal", "build and verify a normal domain U(x, f, r)");
  need_map(normal);
  normal->add_option("--at", at, "center re,im")->required();
  opt_radius(normal);
  opt_extent(normal);

  auto* lift = app.add_subcommand("lift", "lift a path through a normal domain");
  need_map(lift);
  lift->add_option("--center", center, "normal domain center re,im")->required();
  opt_radius(lift);
  lift->add_option("--path", path, "file of 're im' lines or inline x,y;x,y;...")->required();
  lift->add_option("--from", from, "start point of the lift re,im")->required();
  opt_extent(lift);

  auto* ray = app.add_subcommand("raylifts", "enumerate the lifts of a ray from f(center)");
  need_map(ray);
  ray->add_option("--center", center, "normal domain center re,im")->required();
  opt_radius(ray);
  ray->add_option("--dir", dir, "ray direction re,im")->capture_default_str();
  opt_extent(ray);

  auto* degree = app.add_subcommand("degree", "local degree by discrete winding");
  need_map(degree);
  degree->add_option("--at", at, "point re,im")->required();
  degree->add_option("--rho", rho, "probe radius")->required()->check(CLI::PositiveNumber);
  degree->add_option("--samples", samples, "initial loop samples (>= 64)")->capture_default_str();

  auto* branch = app.add_subcommand("branch", "detect and isolate branch points");
  need_map(branch);
  branch->add_option("--box", box, "search box x0,y0,x1,y1")->required();

  auto* factor = app.add_subcommand("factor", "numerical normal form f = phi^-1 o z^k o psi");
  need_map(factor);
  factor->add_option("--at", at, "branch point re,im")->required();
  opt_radius(factor);
  factor->add_option("--probes", probes, "verification probes (default 1000)");
  factor->add_option("--force-k", force_k, "use this k instead of the local degree");
  opt_extent(factor);

  auto* conserve = app.add_subcommand("conserve", "preimage counts against the local degree");
  need_map(conserve);
  conserve->add_option("--center", center, "normal domain center re,im")->required();
  opt_radius(conserve);
  conserve->add_option("--probes", probes, "probe count (default 50)");
  opt_extent(conserve);

  auto* regularity = app.add_subcommand("regularity", "heuristic openness and lightness probes");
  need_map(regularity);
  regularity->add_option("--box", box, "region x0,y0,x1,y1 (default -0.5,-0.5,0.5,0.5)");

  std::string scenario_path;
  bool render = false;
  auto* run_cmd = app.add_subcommand("run", "run a scenario file");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON")->required();
  run_cmd->add_flag("--render", render, "render every task to task-<i>.svg");

  auto* zoo_cmd = app.add_subcommand("zoo", "built-in maps");
  zoo_cmd->require_subcommand(1);
  auto* zoo_list = zoo_cmd->add_subcommand("list", "print the zoo with ground truth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version requests exit 0; malformed arguments share code 2
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (app.count("--cell")) g.cell = cell;
  if (app.count("--tol")) g.tol = tol;

  try {
    auto r = [&]() { return radius > 0 ? std::optional<double>(radius) : std::nullopt; };
    const double h = g.cell.value_or(0.01);
    if (*normal) return single(g, map, NormalTask{point_arg(at, "--at"), r(), h, extent});
    if (*lift)
      return single(g, map,
                    LiftTask{point_arg(center, "--center"), r(), path_arg(path), point_arg(from, "--from"),
                             g.tol.value_or(1e-3), h, extent});
    if (*ray) {
      Point d = point_arg(dir, "--dir");
      if (d == Point{0, 0}) fail(ErrorCode::ParseError, "--dir: must be nonzero");
      return single(g, map, RayLiftsTask{point_arg(center, "--center"), r(), d, g.tol.value_or(1e-3), g.max_lifts, h, extent});
    }
    if (*degree) {
      if (samples < 64) fail(ErrorCode::ParseError, "--samples: must be at least 64");
      return single(g, map, DegreeTask{point_arg(at, "--at"), rho, samples});
    }
    if (*branch) return single(g, map, BranchTask{box_arg(box, "--box"), h});
    if (*factor) {
      FactorTask t{point_arg(at, "--at"), r(), h, g.tol.value_or(1e-2), extent, probes > 0 ? probes : 1000,
                   std::nullopt};
      if (force_k > 0) t.force_k = force_k;
      return single(g, map, t);
    }
    if (*conserve)
      return single(g, map, ConservationTask{point_arg(center, "--center"), r(), probes > 0 ? probes : 50, h, extent});
    if (*regularity)
      return single(g, map,
                    RegularityTask{box.empty() ? Rect{-0.5, -0.5, 0.5, 0.5} : box_arg(box, "--box"), h});
    if (*run_cmd) {
      RunOverrides ov;
      if (app.count("--seed")) ov.seed = g.seed;
      if (!g.out.empty()) ov.output = g.out;
      if (app.count("--max-lifts")) ov.max_lifts = g.max_lifts;
      ov.render = render;
      Report rep = run_scenario(scenario_path, ov);
      for (const auto& o : rep.outcomes) {
        std::printf("%-13s %s", o.kind.c_str(), o.ok ? "ok" : "error");
        if (!o.ok) std::printf(" %s: %s", std::string(to_string(o.code)).c_str(), o.message.c_str());
        std::printf("\n");
      }
      std::string dir = ov.output.value_or(load_scenario(scenario_path).output);
      std::printf("report: %s\n", (std::filesystem::path(dir) / "report.json").string().c_str());
      return rep.success ? 0 : 1;
    }
    if (*zoo_list) {
      io::Json all = io::Json::array();
      for (const auto& e : zoo()) all.push_back(io::zoo_entry(e));
      std::cout << all.dump(2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "stoilow: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
