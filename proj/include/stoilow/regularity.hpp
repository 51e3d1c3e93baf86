#pragma once

#include <cmath>
#include <vector>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/grid.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region.hpp"
#include "stoilow/region_image.hpp"
#include "stoilow/winding.hpp"

namespace stoilow {

struct RegularityReport {
  bool openness_suspect = false;
  bool lightness_suspect = false;
  std::vector<Point> openness_witnesses;
  std::vector<Point> lightness_witnesses;
  // Largest fiber-component diameter seen per probe point.
  double max_fiber_diameter = 0;
  int probes = 0;
};

struct RegularityOptions {
  int lattice = 5;              // probe points per side
  double fiber_factor = 16.0;   // lightness flag above fiber_factor * resolution
};

// Heuristic precheck of openness and lightness on a rectangle.
//
// Openness: at each lattice point z some dyadic circle around z must have an
// image loop with nonzero winding around f(z) and positive gap, which forces
// f(B(z,rho)) to contain a disk around f(z).
// Lightness: the 8-connected fiber-cell cluster through z must stay small.
inline RegularityReport check_regularity(const PlanarMap& map, const Rect& region, double resolution,
                                         const RegularityOptions& opt = {}) {
  if (!(resolution > 0)) fail(ErrorCode::InvalidArgument, "resolution must be positive");
  if (!map.domain().contains(region))
    fail(ErrorCode::OutOfDomain, "regularity region is not inside the domain of " + map.label());
  RegularityReport rep;
  Grid grid(region, resolution);
  std::vector<CellId> all(grid.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  RegionImage ri(map, CellRegion(grid, std::move(all)));

  const int n = std::max(1, opt.lattice);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Point z{region.x0 + region.width() * (i + 0.5) / n, region.y0 + region.height() * (j + 0.5) / n};
      ++rep.probes;

      bool open_here = false;
      double reach = 0.25 * std::min(region.width(), region.height());
      for (double rho = reach; rho >= 2 * resolution && !open_here; rho *= 0.5) {
        if (!map.domain().contains(Rect::centered(z, rho))) continue;
        StableWinding w = stable_winding(map, z, rho, 64, 1 << 12);
        open_here = w.resolved && w.degree != 0;
      }
      if (!open_here) {
        rep.openness_suspect = true;
        rep.openness_witnesses.push_back(z);
      }

      auto cell = grid.locate(z);
      std::int32_t home = ri.local(*cell);
      Point y = map(z);
      std::vector<RegionImage::Local> fiber = ri.fiber_cells(y);
      if (home != RegionImage::kNone && !ri.is_fiber_cell(RegionImage::Local(home), y))
        fiber.push_back(RegionImage::Local(home));
      double diam = 0;
      for (const auto& comp : ri.components(fiber, true)) {
        bool has_home = std::binary_search(comp.begin(), comp.end(), RegionImage::Local(home));
        if (has_home) diam = ri.diameter(comp);
      }
      rep.max_fiber_diameter = std::max(rep.max_fiber_diameter, diam);
      if (diam > opt.fiber_factor * resolution) {
        rep.lightness_suspect = true;
        rep.lightness_witnesses.push_back(z);
      }
    }
  return rep;
}

}  // namespace stoilow
