#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/grid.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region.hpp"
#include "stoilow/region_image.hpp"

namespace stoilow {

struct NormalEvidence {
  double boundary_hausdorff = 0;
  double image_fill = 0;
  // Thresholds the evidence was checked against.
  double boundary_tolerance = 0;
  double fill_threshold = 0;
  double fill_tolerance = 0;
  double lipschitz = 0;
};

// Discrete U(x, f, r) together with its normality evidence. The sampled
// region image is shared so downstream algorithms do not re-evaluate the map.
struct NormalDomain {
  Point center;
  double radius = 0;
  Point image_center;
  CellRegion region;
  NormalEvidence evidence;
  std::shared_ptr<const RegionImage> image;

  const Grid& grid() const { return region.grid(); }
  double diameter() const { return region.diameter(); }
};

struct NormalOptions {
  double boundary_factor = 3.0;          // boundary tolerance = factor * h * L
  double fill_threshold = 0.99;
  int fill_samples = 1000;
  std::optional<double> lipschitz;       // default: empirical, adjacent jump / h
  std::optional<double> fill_tolerance;  // default: adjacent jump
  std::uint64_t seed = 1;
  bool verify = true;
};

struct RadiusResult {
  double radius = 0;
  double v_half_side = 0;  // half-side of the square V used
};

namespace detail {

inline double quarter_spread(const PlanarMap& map, Point p, double h) {
  Point fp = map(p);
  double q = 0.25 * h, s = 0;
  for (Point d : {Point{q, q}, Point{-q, q}, Point{-q, -q}, Point{q, -q}}) s = std::max(s, std::abs(map(p + d) - fp));
  return s;
}

// Boundary samples of the square centered at c with the given half-side,
// spaced at most h apart.
inline std::vector<Point> square_boundary(Point c, double s, double h) {
  int per_side = std::max(4, int(std::ceil(2 * s / h)));
  std::vector<Point> out;
  out.reserve(std::size_t(4 * per_side));
  Point corners[4] = {c + Point{-s, -s}, c + Point{s, -s}, c + Point{s, s}, c + Point{-s, s}};
  for (int e = 0; e < 4; ++e)
    for (int i = 0; i < per_side; ++i) out.push_back(corners[e] + (corners[(e + 1) % 4] - corners[e]) * (double(i) / per_side));
  return out;
}

}  // namespace detail

// Radius recipe: shrink squares V around x until no boundary sample of V is a
// fiber point of f(x); then r = dist(f(x), f(boundary samples)) / 2.
inline RadiusResult find_normal_radius(const PlanarMap& map, Point x, const Grid& grid) {
  const Rect& b = grid.bounds();
  if (!b.contains(x) || b.inner_distance(x) <= 0)
    fail(ErrorCode::InvalidArgument, "normal radius: point is not interior to the grid");
  detail::require_grid_in_domain(map, grid);
  const double h = grid.cell_size();
  Point fx = map(x);
  for (double s = std::min(0.5, 0.95 * b.inner_distance(x)); s >= 2 * h; s *= 0.5) {
    bool hit = false;
    double nearest = std::numeric_limits<double>::infinity();
    for (Point p : detail::square_boundary(x, s, h)) {
      double d = std::abs(map(p) - fx);
      if (d <= 2.1 * detail::quarter_spread(map, p, h)) {
        hit = true;
        break;
      }
      nearest = std::min(nearest, d);
    }
    if (!hit && nearest > 0) return {0.5 * nearest, s};
  }
  std::ostringstream os;
  os << "every square around (" << x.real() << ", " << x.imag() << ") down to 4 cells meets the fiber of f(x)";
  fail(ErrorCode::NoRadiusFound, os.str());
}

// Verification thresholds for a sampled region image; the measured fields are
// filled in by build_normal_domain.
inline NormalEvidence evidence_thresholds(const RegionImage& ri, const NormalOptions& opt) {
  NormalEvidence ev;
  const double h = ri.grid().cell_size();
  const double jump = std::max(ri.adjacent_jump(), 1e-300);
  ev.lipschitz = opt.lipschitz.value_or(jump / h);
  ev.boundary_tolerance = opt.boundary_factor * h * ev.lipschitz;
  ev.fill_threshold = opt.fill_threshold;
  ev.fill_tolerance = opt.fill_tolerance.value_or(jump);
  return ev;
}

namespace detail {

inline bool reaches_grid_edge(const CellRegion& region) {
  const Grid& g = region.grid();
  for (CellId id : region.members()) {
    Cell c = g.cell(id);
    if (c.col == 0 || c.row == 0 || c.col == g.nx() - 1 || c.row == g.ny() - 1) return true;
  }
  return false;
}

}  // namespace detail

inline NormalDomain certify_region(const PlanarMap& map, Point x, double r, CellRegion region,
                                   const NormalOptions& opt);

inline NormalDomain build_normal_domain(const PlanarMap& map, Point x, double r, const Grid& grid,
                                        const NormalOptions& opt = {}) {
  if (!(r > 0)) fail(ErrorCode::InvalidArgument, "normal domain radius must be positive");
  auto cell = grid.locate(x);
  if (!cell) fail(ErrorCode::OutOfDomain, "normal domain center lies outside the grid");
  Point fx = map.evaluate(x);
  return certify_region(map, x, r, preimage_component(map, TargetSet::disk(fx, r), grid, *cell), opt);
}

// Evidence and verification for an already rasterized U(x, f, r).
inline NormalDomain certify_region(const PlanarMap& map, Point x, double r, CellRegion region,
                                   const NormalOptions& opt) {
  NormalDomain nd;
  nd.center = x;
  nd.radius = r;
  nd.image_center = map.evaluate(x);
  nd.region = std::move(region);
  if (detail::reaches_grid_edge(nd.region))
    fail(ErrorCode::VerificationFailed, "region reaches the grid edge; enlarge the grid or shrink r");
  auto ri = std::make_shared<RegionImage>(map, nd.region);
  nd.image = ri;
  NormalEvidence ev = evidence_thresholds(*ri, opt);

  // f(boundary of U) against sampled circle of radius r
  std::vector<Point> fb;
  for (Point p : region_boundary(nd.region)) fb.push_back(map(p));
  double spacing = std::max(0.5 * std::max(ri->adjacent_jump(), 1e-12), kTwoPi * r / 20000);
  int nc = std::max(256, int(std::ceil(kTwoPi * r / spacing)));
  std::vector<Point> circle;
  circle.reserve(std::size_t(nc));
  for (int j = 0; j < nc; ++j) circle.push_back(nd.image_center + std::polar(r, kTwoPi * j / nc));
  ev.boundary_hausdorff = hausdorff_distance(fb, circle);

  // sampled B(f(x), r) against the images of cell centers
  Rng rng(mix_seed(opt.seed, 0x6e6f726d));
  int hits = 0;
  for (int i = 0; i < opt.fill_samples; ++i) {
    Point y = rng.in_disk(nd.image_center, r);
    Rect box = Rect::centered(y, ev.fill_tolerance);
    bool hit = false;
    ri->for_each_candidate(box, [&](RegionImage::Local c) {
      if (!hit && std::abs(ri->image(c) - y) <= ev.fill_tolerance) hit = true;
    });
    hits += hit;
  }
  ev.image_fill = opt.fill_samples > 0 ? double(hits) / opt.fill_samples : 1.0;
  nd.evidence = ev;

  if (opt.verify) {
    if (ev.boundary_hausdorff > ev.boundary_tolerance) {
      std::ostringstream os;
      os << "boundary hausdorff " << ev.boundary_hausdorff << " exceeds " << ev.boundary_tolerance;
      fail(ErrorCode::VerificationFailed, os.str());
    }
    if (ev.image_fill < ev.fill_threshold) {
      std::ostringstream os;
      os << "image fill " << ev.image_fill << " below " << ev.fill_threshold;
      fail(ErrorCode::VerificationFailed, os.str());
    }
  }
  return nd;
}

// 8-connected clusters of region cells that are fiber cells of y.
inline std::vector<std::vector<RegionImage::Local>> fiber_clusters(const RegionImage& ri, Point y) {
  std::vector<RegionImage::Local> cells = ri.fiber_cells(y);
  return ri.components(cells, true);
}

// The fiber cells of f(center) form a single cluster reaching within two
// cells of the center cell.
inline bool is_normal_neighbourhood(const PlanarMap& map, const NormalDomain& nd) {
  (void)map;
  const RegionImage& ri = *nd.image;
  auto home = ri.grid().locate(nd.center);
  if (!home) return false;
  auto clusters = fiber_clusters(ri, nd.image_center);
  int holding = 0;
  for (const auto& comp : clusters) {
    bool near_home = false;
    for (RegionImage::Local i : comp) {
      Cell c = ri.cell(i);
      if (std::max(std::abs(c.col - home->col), std::abs(c.row - home->row)) <= 2) near_home = true;
    }
    if (!near_home) return false;
    ++holding;
  }
  return holding <= 1;
}

// Grid of half-width `extent` around p, clipped to the domain's bounding box.
inline Grid grid_around(const PlanarMap& map, Point p, double extent, double cell) {
  Rect r = Rect::centered(p, extent);
  const Rect& d = map.domain().bounding_box();
  r = {std::max(r.x0, d.x0), std::max(r.y0, d.y0), std::min(r.x1, d.x1), std::min(r.y1, d.y1)};
  if (!r.valid()) fail(ErrorCode::OutOfDomain, "grid around the point misses the domain");
  return Grid(r, cell);
}

struct FittedNormal {
  NormalDomain nd;
  double v_half_side = 0;  // zero when the radius was given
};

// Normal domain on a grid of half-width `extent` around x, doubling the
// extent while the region touches the grid edge. The radius, when not given,
// comes from the first grid.
inline FittedNormal fit_normal_domain(const PlanarMap& map, Point x, std::optional<double> radius, double cell,
                                      double extent = 1.0, const NormalOptions& opt = {}) {
  if (!(cell > 0) || !(extent > 0)) fail(ErrorCode::InvalidArgument, "cell size and extent must be positive");
  FittedNormal out;
  const Rect& box = map.domain().bounding_box();
  for (;;) {
    Grid grid = grid_around(map, x, extent, cell);
    if (!radius) {
      RadiusResult rr = find_normal_radius(map, x, grid);
      radius = rr.radius;
      out.v_half_side = rr.v_half_side;
    }
    auto home = grid.locate(x);
    if (!home) fail(ErrorCode::OutOfDomain, "normal domain center lies outside the grid");
    Point fx = map.evaluate(x);
    CellRegion region = preimage_component(map, TargetSet::disk(fx, *radius), grid, *home);
    bool covers = box.x0 >= grid.bounds().x0 && box.y0 >= grid.bounds().y0 && box.x1 <= grid.bounds().x1 &&
                  box.y1 <= grid.bounds().y1;
    if (detail::reaches_grid_edge(region) && !covers) {
      extent *= 2;
      continue;
    }
    out.nd = certify_region(map, x, *radius, std::move(region), opt);
    return out;
  }
}

// Distance from the center to the nearest boundary sample of the region.
inline double inner_radius(const NormalDomain& nd) {
  double best = std::numeric_limits<double>::infinity();
  for (Point p : region_boundary(nd.region)) best = std::min(best, std::abs(p - nd.center));
  return best;
}

}  // namespace stoilow
