#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <span>
#include <vector>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/grid.hpp"
#include "stoilow/planar_map.hpp"

namespace stoilow {

// A set of grid cells, stored as sorted unique ids. Regions produced by the
// flood fills below are 4-connected.
class CellRegion {
 public:
  CellRegion() = default;
  CellRegion(Grid grid, std::vector<CellId> members) : grid_(grid), members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  const Grid& grid() const { return grid_; }
  const std::vector<CellId>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  bool contains(CellId id) const { return std::binary_search(members_.begin(), members_.end(), id); }
  bool contains(Cell c) const { return grid_.in_range(c) && contains(grid_.id(c)); }

  std::vector<Point> centers() const {
    std::vector<Point> out;
    out.reserve(members_.size());
    for (CellId id : members_) out.push_back(grid_.center(id));
    return out;
  }

  // Max distance between member centers plus one cell diagonal, so that it
  // bounds the diameter of the covered point set from above.
  double diameter() const {
    if (members_.empty()) return 0.0;
    std::vector<Point> c = centers();
    return point_set_diameter(c) + std::numbers::sqrt2 * grid_.cell_size();
  }

 private:
  Grid grid_;
  std::vector<CellId> members_;
};

// Target of a preimage computation: an open disk B(c, r) or the open
// r-neighbourhood of a polyline.
class TargetSet {
 public:
  static TargetSet disk(Point center, double radius) {
    if (!(radius > 0)) fail(ErrorCode::InvalidArgument, "target disk radius must be positive");
    TargetSet t;
    t.path_ = {center};
    t.radius_ = radius;
    return t;
  }
  static TargetSet tube(std::vector<Point> path, double radius) {
    if (path.empty()) fail(ErrorCode::EmptyInput, "tube around an empty path");
    if (!(radius > 0)) fail(ErrorCode::InvalidArgument, "tube radius must be positive");
    TargetSet t;
    t.path_ = std::move(path);
    t.radius_ = radius;
    return t;
  }

  bool is_disk() const { return path_.size() == 1; }
  double radius() const { return radius_; }
  const std::vector<Point>& path() const { return path_; }

  double distance(Point w) const { return dist_to_path(w, path_); }
  bool contains(Point w) const { return distance(w) < radius_; }
  Rect bbox() const { return Rect::bounding(path_).inflated(radius_); }

 private:
  std::vector<Point> path_;
  double radius_ = 0;
};

namespace detail {

inline bool cell_hits(const PlanarMap& map, const Grid& grid, Cell c, const TargetSet& target) {
  for (Point s : grid.samples(c))
    if (target.contains(map(s))) return true;
  return false;
}

inline void require_grid_in_domain(const PlanarMap& map, const Grid& grid) {
  if (!map.domain().contains(grid.bounds()))
    fail(ErrorCode::OutOfDomain, "grid bounds are not contained in the domain of " + map.label());
}

}  // namespace detail

// Cells with at least one of their five samples mapping into the target.
inline std::vector<CellId> rasterize_preimage(const PlanarMap& map, const TargetSet& target,
                                              const Grid& grid) {
  detail::require_grid_in_domain(map, grid);
  std::vector<CellId> out;
  for (int row = 0; row < grid.ny(); ++row)
    for (int col = 0; col < grid.nx(); ++col)
      if (detail::cell_hits(map, grid, {col, row}, target)) out.push_back(grid.id({col, row}));
  return out;
}

namespace detail {

// Breadth-first flood over a sorted id list; marks visited positions in `seen`.
inline std::vector<CellId> flood_sorted(const Grid& grid, std::span<const CellId> sorted,
                                        std::vector<bool>& seen, std::size_t start) {
  auto position = [&](CellId id) -> std::ptrdiff_t {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
    return (it != sorted.end() && *it == id) ? it - sorted.begin() : -1;
  };
  std::vector<CellId> out{sorted[start]};
  std::deque<CellId> queue{sorted[start]};
  seen[start] = true;
  while (!queue.empty()) {
    Cell c = grid.cell(queue.front());
    queue.pop_front();
    for (Cell d : Grid::kNeighbors) {
      Cell n{c.col + d.col, c.row + d.row};
      if (!grid.in_range(n)) continue;
      std::ptrdiff_t p = position(grid.id(n));
      if (p < 0 || seen[std::size_t(p)]) continue;
      seen[std::size_t(p)] = true;
      out.push_back(grid.id(n));
      queue.push_back(grid.id(n));
    }
  }
  return out;
}

inline std::vector<CellId> sorted_unique(std::span<const CellId> cells) {
  std::vector<CellId> v(cells.begin(), cells.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

// Maximal 4-connected subset of `cells` containing `seed`, found breadth-first
// with the fixed neighbor order right, up, left, down.
inline CellRegion connected_component(const Grid& grid, std::span<const CellId> cells, CellId seed) {
  std::vector<CellId> sorted = detail::sorted_unique(cells);
  auto it = std::lower_bound(sorted.begin(), sorted.end(), seed);
  if (it == sorted.end() || *it != seed) fail(ErrorCode::SeedNotInSet, "flood-fill seed is not in the cell set");
  std::vector<bool> seen(sorted.size(), false);
  return CellRegion(grid, detail::flood_sorted(grid, sorted, seen, std::size_t(it - sorted.begin())));
}

// Partition of `cells` into 4-connected components, ordered by smallest member.
inline std::vector<CellRegion> connected_components(const Grid& grid, std::span<const CellId> cells) {
  std::vector<CellId> sorted = detail::sorted_unique(cells);
  std::vector<bool> seen(sorted.size(), false);
  std::vector<CellRegion> out;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (!seen[i]) out.emplace_back(grid, detail::flood_sorted(grid, sorted, seen, i));
  return out;
}

// Same result as connected_component(rasterize_preimage(map, target, grid), seed)
// but only evaluates the map on cells the flood fill actually reaches.
inline CellRegion preimage_component(const PlanarMap& map, const TargetSet& target, const Grid& grid,
                                     Cell seed) {
  detail::require_grid_in_domain(map, grid);
  if (!grid.in_range(seed) || !detail::cell_hits(map, grid, seed, target))
    fail(ErrorCode::SeedNotInSet, "seed cell does not map into the target set");
  enum : std::uint8_t { kUnknown, kIn, kOut };
  std::vector<std::uint8_t> state(grid.size(), kUnknown);
  std::vector<CellId> out{grid.id(seed)};
  std::deque<Cell> queue{seed};
  state[grid.id(seed)] = kIn;
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    for (Cell d : Grid::kNeighbors) {
      Cell n{c.col + d.col, c.row + d.row};
      if (!grid.in_range(n)) continue;
      CellId id = grid.id(n);
      if (state[id] != kUnknown) continue;
      bool hit = detail::cell_hits(map, grid, n, target);
      state[id] = hit ? kIn : kOut;
      if (!hit) continue;
      out.push_back(id);
      queue.push_back(n);
    }
  }
  return CellRegion(grid, std::move(out));
}

// Midpoints of member-cell edges shared with a non-member cell of the grid.
inline std::vector<Point> region_boundary(const CellRegion& region) {
  if (region.empty()) fail(ErrorCode::EmptyInput, "boundary of an empty region");
  const Grid& grid = region.grid();
  const double half = 0.5 * grid.cell_size();
  std::vector<Point> out;
  for (CellId id : region.members()) {
    Cell c = grid.cell(id);
    Point m = grid.center(c);
    for (Cell d : Grid::kNeighbors) {
      Cell n{c.col + d.col, c.row + d.row};
      if (!grid.in_range(n) || region.contains(grid.id(n))) continue;
      out.push_back(m + half * Point(d.col, d.row));
    }
  }
  return out;
}

// Members with at least one 4-neighbor outside the region (grid edges excluded).
inline std::vector<CellId> boundary_cells(const CellRegion& region) {
  const Grid& grid = region.grid();
  std::vector<CellId> out;
  for (CellId id : region.members()) {
    Cell c = grid.cell(id);
    for (Cell d : Grid::kNeighbors) {
      Cell n{c.col + d.col, c.row + d.row};
      if (grid.in_range(n) && !region.contains(grid.id(n))) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

}  // namespace stoilow
