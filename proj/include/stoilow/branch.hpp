#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/grid.hpp"
#include "stoilow/lifting.hpp"
#include "stoilow/normal.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region_image.hpp"
#include "stoilow/winding.hpp"

namespace stoilow {

struct LocalDegreeResult {
  Point point;
  double rho = 0;
  int degree = 0;
  double min_image_gap = 0;
  int samples = 0;
};

// Winding number of f(z + rho e^{i theta}) around f(z).
inline LocalDegreeResult local_degree(const PlanarMap& map, Point z, double rho, int samples = 64) {
  if (!(rho > 0)) fail(ErrorCode::InvalidArgument, "probe radius must be positive");
  if (samples < 64) fail(ErrorCode::InvalidArgument, "local degree needs at least 64 samples");
  if (!map.domain().contains(Rect::centered(z, rho)))
    fail(ErrorCode::OutOfDomain, "probe disk is not inside the domain of " + map.label());
  StableWinding w = stable_winding(map, z, rho, samples, 1 << 16);
  std::ostringstream os;
  os << "at (" << z.real() << ", " << z.imag() << "), rho " << rho;
  if (w.degenerate) fail(ErrorCode::DegenerateLoop, "probe loop meets the fiber of f(z) " + os.str());
  if (!w.resolved) fail(ErrorCode::Unresolved, "winding did not stabilize below 65536 samples " + os.str());
  return {z, rho, int(w.degree), w.last.min_gap, w.last.samples};
}

struct PreimageCount {
  int count = 0;
  std::vector<Point> locations;  // cluster centroids
  bool flagged = false;          // zero count: evidence is stale
  std::optional<int> ray_lifts;  // cross-check, when requested
};

struct CountOptions {
  double margin = 0.02;
  bool cross_validate = false;
  double ray_tol = 0.02;
  int max_lifts = 64;
};

inline Point centroid(const RegionImage& ri, const std::vector<Local>& cells) {
  Point s{0, 0};
  for (Local i : cells) s += ri.center(i);
  return s / double(cells.size());
}

// Number of 8-connected clusters of region cells that are fiber cells of y.
inline PreimageCount count_preimages(const PlanarMap& map, const NormalDomain& nd, Point y,
                                     const CountOptions& opt = {}) {
  if (std::abs(y - nd.image_center) >= nd.radius * (1 - opt.margin))
    fail(ErrorCode::PreconditionFailed, "y is not inside the shrunken image disk");
  const RegionImage& ri = *nd.image;
  PreimageCount out;
  for (const auto& c : fiber_clusters(ri, y)) out.locations.push_back(centroid(ri, c));
  out.count = int(out.locations.size());
  out.flagged = out.count == 0;
  if (opt.cross_validate) {
    Point dir = y == nd.image_center ? Point{1, 0} : y - nd.image_center;
    out.ray_lifts = int(enumerate_ray_lifts(map, nd, dir, opt.ray_tol, opt.max_lifts).lifts.size());
  }
  return out;
}

struct BranchPoint {
  Point location;
  int degree = 0;
  double isolation_radius = 0;
};

struct BranchReport {
  Rect search;
  std::vector<BranchPoint> branch_points;
  double resolution = 0;
  int candidates = 0;  // cells flagged by the injectivity probe
};

struct BranchOptions {
  double ratio = 0.35;      // candidate if min pair ratio < ratio * local max ratio
  int max_cluster_width = 3;
  int probe_points = 8;
};

// True when every pair of reported points is farther apart than the sum of
// their isolation radii.
inline bool pairwise_isolated(const BranchReport& rep) {
  const auto& b = rep.branch_points;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j)
      if (std::abs(b[i].location - b[j].location) <= b[i].isolation_radius + b[j].isolation_radius) return false;
  return true;
}

namespace detail {

inline std::optional<int> try_degree(const PlanarMap& map, Point z, double rho) {
  if (!map.domain().contains(Rect::centered(z, rho))) return std::nullopt;
  StableWinding w = stable_winding(map, z, rho, 64, 1 << 16);
  if (!w.resolved) return std::nullopt;
  return int(w.degree);
}

}  // namespace detail

// Candidates from a non-injectivity probe, confirmed by small-loop degrees,
// clustered, then certified by degree stability and an isolation annulus.
inline BranchReport detect_branch_points(const PlanarMap& map, const Rect& search, const Grid& grid,
                                         const BranchOptions& opt = {}) {
  if (!map.domain().contains(search))
    fail(ErrorCode::OutOfDomain, "search rectangle is not inside the domain of " + map.label());
  const double h = grid.cell_size();
  BranchReport rep;
  rep.search = search;
  rep.resolution = h;

  // (i) non-injectivity probe: some sample pair maps much closer together
  // than the local stretch predicts. Pairs are taken within a cell and
  // between a cell's samples and its neighbours' centers, so a branch point
  // on a cell corner or edge is still straddled by a near-antipodal pair.
  const int nx = grid.nx(), ny = grid.ny();
  std::vector<std::array<Point, 5>> pts(grid.size()), img(grid.size());
  std::vector<bool> inside(grid.size(), false);
  for (int row = 0; row < ny; ++row)
    for (int col = 0; col < nx; ++col) {
      CellId id = grid.id({col, row});
      pts[id] = grid.samples({col, row});
      if (!search.contains(pts[id][0]) || !map.domain().contains(grid.cell_rect({col, row}))) continue;
      inside[id] = true;
      for (int j = 0; j < 5; ++j) img[id][j] = map(pts[id][j]);
    }
  std::vector<double> lo(grid.size(), std::numeric_limits<double>::infinity()), hi(grid.size(), 0);
  auto pair = [&](CellId id, Point za, Point wa, Point zb, Point wb) {
    double r = std::abs(wa - wb) / std::abs(za - zb);
    lo[id] = std::min(lo[id], r);
    hi[id] = std::max(hi[id], r);
  };
  for (int row = 0; row < ny; ++row)
    for (int col = 0; col < nx; ++col) {
      CellId id = grid.id({col, row});
      if (!inside[id]) continue;
      for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) pair(id, pts[id][a], img[id][a], pts[id][b], img[id][b]);
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          Cell n{col + dc, row + dr};
          if ((dr == 0 && dc == 0) || !grid.in_range(n) || !inside[grid.id(n)]) continue;
          CellId nid = grid.id(n);
          for (int a = 0; a < 5; ++a) pair(id, pts[id][a], img[id][a], pts[nid][0], img[nid][0]);
        }
    }
  std::vector<CellId> confirmed;
  for (int row = 0; row < ny; ++row)
    for (int col = 0; col < nx; ++col) {
      CellId id = grid.id({col, row});
      if (!inside[id]) continue;
      double block = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          Cell n{col + dc, row + dr};
          if (grid.in_range(n) && inside[grid.id(n)]) block = std::max(block, hi[grid.id(n)]);
        }
      if (!(lo[id] < opt.ratio * block)) continue;
      ++rep.candidates;
      // (ii) small-loop degree around the candidate
      Point c = grid.center(id);
      std::optional<int> d = detail::try_degree(map, c, 1.5 * h);
      if (!d) d = detail::try_degree(map, c, 1.25 * h);
      if (d && std::abs(*d) >= 2) confirmed.push_back(id);
    }

  // 8-connected clusters of confirmed cells
  std::vector<std::vector<CellId>> clusters;
  {
    std::vector<bool> seen(confirmed.size(), false);
    auto pos = [&](CellId id) -> std::ptrdiff_t {
      auto it = std::lower_bound(confirmed.begin(), confirmed.end(), id);
      return it != confirmed.end() && *it == id ? it - confirmed.begin() : -1;
    };
    for (std::size_t s = 0; s < confirmed.size(); ++s) {
      if (seen[s]) continue;
      std::vector<CellId> comp{confirmed[s]};
      seen[s] = true;
      for (std::size_t head = 0; head < comp.size(); ++head) {
        Cell c = grid.cell(comp[head]);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            Cell n{c.col + dc, c.row + dr};
            if (!grid.in_range(n)) continue;
            std::ptrdiff_t p = pos(grid.id(n));
            if (p < 0 || seen[std::size_t(p)]) continue;
            seen[std::size_t(p)] = true;
            comp.push_back(grid.id(n));
          }
      }
      clusters.push_back(std::move(comp));
    }
  }

  std::vector<Point> where;
  for (const auto& comp : clusters) {
    int c0 = nx, c1 = -1, r0 = ny, r1 = -1;
    Point sum{0, 0};
    for (CellId id : comp) {
      Cell c = grid.cell(id);
      c0 = std::min(c0, c.col), c1 = std::max(c1, c.col), r0 = std::min(r0, c.row), r1 = std::max(r1, c.row);
      sum += grid.center(id);
    }
    Point loc = sum / double(comp.size());
    if (c1 - c0 + 1 > opt.max_cluster_width || r1 - r0 + 1 > opt.max_cluster_width) {
      std::ostringstream os;
      os << "branch candidates near (" << loc.real() << ", " << loc.imag() << ") spread over " << (c1 - c0 + 1)
         << "x" << (r1 - r0 + 1) << " cells";
      fail(ErrorCode::NonIsolatedBranch, os.str());
    }
    where.push_back(loc);
  }

  for (std::size_t i = 0; i < where.size(); ++i) {
    Point loc = where[i];
    std::optional<int> degree;
    for (double rho : {8 * h, 4 * h, 2 * h}) {
      std::optional<int> d = detail::try_degree(map, loc, rho);
      if (!d) continue;
      if (degree && *degree != *d) {
        std::ostringstream os;
        os << "degree near (" << loc.real() << ", " << loc.imag() << ") changes with the probe radius";
        fail(ErrorCode::NonIsolatedBranch, os.str());
      }
      degree = d;
    }
    if (!degree || std::abs(*degree) < 2) continue;

    double cap = 0.25 * std::min(search.width(), search.height());
    for (std::size_t j = 0; j < where.size(); ++j)
      if (j != i) cap = std::min(cap, 0.45 * std::abs(where[j] - loc));
    double isolation = 0;
    for (double rho = cap; rho >= 2 * h; rho *= 0.5) {
      bool ok = true;
      for (int j = 0; j < opt.probe_points && ok; ++j) {
        Point p = loc + std::polar(0.5 * rho, kTwoPi * j / opt.probe_points);
        std::optional<int> d = detail::try_degree(map, p, 0.25 * rho);
        ok = d && std::abs(*d) == 1;
      }
      if (ok) {
        isolation = rho;
        break;
      }
    }
    if (isolation == 0) {
      std::ostringstream os;
      os << "no annulus around (" << loc.real() << ", " << loc.imag() << ") shows degree-1 behaviour above 2 cells";
      fail(ErrorCode::NonIsolatedBranch, os.str());
    }
    rep.branch_points.push_back({loc, *degree, isolation});
  }
  std::sort(rep.branch_points.begin(), rep.branch_points.end(), [](const BranchPoint& a, const BranchPoint& b) {
    return a.location.real() < b.location.real() ||
           (a.location.real() == b.location.real() && a.location.imag() < b.location.imag());
  });
  return rep;
}

struct ConservationReport {
  int degree = 0;
  std::vector<Point> probes;
  std::vector<int> counts;
  int dissenting = 0;
  bool all_equal = true;
};

// Probe radius for the center's local degree: half the distance to the
// region boundary.
inline double center_probe_radius(const NormalDomain& nd) { return 0.5 * inner_radius(nd); }

inline ConservationReport degree_conservation_check(const PlanarMap& map, const NormalDomain& nd, int probe_count,
                                                    std::uint64_t seed = 1) {
  if (probe_count < 1) fail(ErrorCode::InvalidArgument, "probe count must be positive");
  ConservationReport rep;
  rep.degree = local_degree(map, nd.center, center_probe_radius(nd)).degree;
  Rng rng(mix_seed(seed, 0x636f6e73));
  const double r0 = 0.05 * nd.radius, r1 = 0.9 * nd.radius;
  for (int i = 0; i < probe_count; ++i) {
    // area-uniform in the annulus r0 < |y - f(x)| < r1
    double rad = std::sqrt(rng.uniform(r0 * r0, r1 * r1));
    Point y = nd.image_center + std::polar(rad, rng.uniform(0, kTwoPi));
    int c = count_preimages(map, nd, y).count;
    rep.probes.push_back(y);
    rep.counts.push_back(c);
    if (c != std::abs(rep.degree)) ++rep.dissenting;
  }
  rep.all_equal = rep.dissenting == 0;
  return rep;
}

}  // namespace stoilow
