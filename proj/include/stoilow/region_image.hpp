#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <numbers>
#include <span>
#include <vector>

#include "stoilow/grid.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region.hpp"

namespace stoilow {

// Sampled images of a region's cells with a bucket index over the image
// plane. Cells carry local ids 0..n-1 in increasing grid-id order, so
// comparisons of local ids agree with comparisons of cell indices.
class RegionImage {
 public:
  using Local = std::uint32_t;
  static constexpr std::int32_t kNone = -1;

  RegionImage(const PlanarMap& map, CellRegion region) : region_(std::move(region)) {
    const Grid& grid = region_.grid();
    const std::size_t n = region_.size();
    lookup_.assign(grid.size(), kNone);
    images_.resize(n);
    spread_.resize(n);
    neighbors_.resize(n);
    for (std::size_t i = 0; i < n; ++i) lookup_[region_.members()[i]] = std::int32_t(i);
    for (std::size_t i = 0; i < n; ++i) {
      Cell c = grid.cell(region_.members()[i]);
      auto s = grid.samples(c);
      double spread = 0;
      for (int j = 0; j < 5; ++j) images_[i][j] = map(s[j]);
      for (int j = 1; j < 5; ++j) spread = std::max(spread, std::abs(images_[i][j] - images_[i][0]));
      spread_[i] = spread;
      for (int k = 0; k < 4; ++k) {
        Cell nb{c.col + Grid::kNeighbors[k].col, c.row + Grid::kNeighbors[k].row};
        neighbors_[i][k] = local(nb);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k)
        if (std::int32_t j = neighbors_[i][k]; j != kNone)
          jump_ = std::max(jump_, std::abs(images_[i][0] - images_[std::size_t(j)][0]));
    build_buckets();
  }

  const CellRegion& region() const { return region_; }
  const Grid& grid() const { return region_.grid(); }
  std::size_t size() const { return region_.size(); }

  CellId grid_id(Local i) const { return region_.members()[i]; }
  Cell cell(Local i) const { return grid().cell(grid_id(i)); }
  std::int32_t local(CellId id) const { return id < lookup_.size() ? lookup_[id] : kNone; }
  std::int32_t local(Cell c) const { return grid().in_range(c) ? lookup_[grid().id(c)] : kNone; }

  Point center(Local i) const { return grid().center(grid_id(i)); }
  Point image(Local i) const { return images_[i][0]; }
  const std::array<Point, 5>& images(Local i) const { return images_[i]; }
  const std::array<std::int32_t, 4>& neighbors(Local i) const { return neighbors_[i]; }

  // Largest image distance between 4-adjacent cell centers: the image-side
  // resolution of this discretization.
  double adjacent_jump() const { return jump_; }

  // Largest image distance from the center sample to a quarter-point sample.
  double spread(Local i) const { return spread_[i]; }

  // True if y plausibly has a preimage inside the cell: |f(c) - y| is within
  // the cell's corner spread (twice the quarter-point spread; exact for affine
  // maps, with 5% slack).
  bool is_fiber_cell(Local i, Point y) const { return std::abs(images_[i][0] - y) <= 2.1 * spread_[i]; }

  std::vector<Local> fiber_cells(Point y) const {
    double reach = 2.1 * max_spread_;
    Rect box{y.real() - reach, y.imag() - reach, y.real() + reach, y.imag() + reach};
    std::vector<Local> out;
    for_each_candidate(box, [&](Local i) {
      if (is_fiber_cell(i, y)) out.push_back(i);
    });
    return out;
  }

  // Cells with at least one sample image inside the target set.
  std::vector<Local> query(const TargetSet& target) const {
    std::vector<Local> out;
    const double r = target.radius();
    for_each_candidate(target.bbox(), [&](Local i) {
      // every sample image lies within spread of the center image
      double d = target.distance(images_[i][0]);
      if (d < r) {
        out.push_back(i);
        return;
      }
      if (d - spread_[i] >= r) return;
      for (int j = 1; j < 5; ++j)
        if (target.contains(images_[i][j])) {
          out.push_back(i);
          return;
        }
    });
    return out;
  }

  // Components of a subset of local ids (sorted ascending), 4- or 8-connected.
  // Each component is sorted; components are ordered by smallest member.
  std::vector<std::vector<Local>> components(std::span<const Local> cells, bool eight = false) const {
    std::vector<Local> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<bool> seen(sorted.size(), false);
    std::vector<std::vector<Local>> out;
    for (std::size_t s = 0; s < sorted.size(); ++s) {
      if (seen[s]) continue;
      out.push_back(flood(sorted, seen, s, eight));
    }
    return out;
  }

  // Max center distance plus one cell diagonal.
  double diameter(std::span<const Local> cells) const {
    if (cells.empty()) return 0.0;
    std::vector<Point> pts;
    pts.reserve(cells.size());
    for (Local i : cells) pts.push_back(center(i));
    return point_set_diameter(pts) + std::numbers::sqrt2 * grid().cell_size();
  }

  // Local ids of the 8 surrounding cells that are region members.
  template <class F>
  void for_each_neighbor8(Local i, F&& f) const {
    Cell c = cell(i);
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        std::int32_t j = local(Cell{c.col + dc, c.row + dr});
        if (j != kNone) f(Local(j));
      }
  }

  // Calls f once per cell having a sample image in a bucket overlapping box,
  // in increasing local-id order.
  template <class F>
  void for_each_candidate(const Rect& box, F&& f) const {
    if (size() == 0 || !box_.intersects(box)) return;
    auto xi = [&](double v) { return std::clamp(int((v - box_.x0) / box_.width() * bx_), 0, bx_ - 1); };
    auto yi = [&](double v) { return std::clamp(int((v - box_.y0) / box_.height() * by_), 0, by_ - 1); };
    std::vector<Local> cand;
    for (int y = yi(box.y0); y <= yi(box.y1); ++y)
      for (int x = xi(box.x0); x <= xi(box.x1); ++x) {
        std::size_t b = std::size_t(y) * std::size_t(bx_) + std::size_t(x);
        cand.insert(cand.end(), entries_.begin() + offsets_[b], entries_.begin() + offsets_[b + 1]);
      }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (Local i : cand) f(i);
  }

 private:
  void build_buckets() {
    const std::size_t n = size();
    if (n == 0) return;
    Rect box{images_[0][0].real(), images_[0][0].imag(), images_[0][0].real(), images_[0][0].imag()};
    for (const auto& a : images_)
      for (Point w : a) {
        box.x0 = std::min(box.x0, w.real());
        box.x1 = std::max(box.x1, w.real());
        box.y0 = std::min(box.y0, w.imag());
        box.y1 = std::max(box.y1, w.imag());
      }
    for (double s : spread_) max_spread_ = std::max(max_spread_, s);
    box_ = box.inflated(1e-12 + 1e-9 * std::max(box.width(), box.height()));
    bx_ = by_ = std::clamp(int(std::sqrt(double(n))), 1, 2048);
    std::vector<std::uint32_t> count(std::size_t(bx_) * by_ + 1, 0);
    auto each_bucket = [&](Local i, auto&& g) {
      std::size_t last = SIZE_MAX;
      for (Point w : images_[i]) {
        std::size_t b = bucket(w);
        if (b != last) g(b);
        last = b;
      }
    };
    for (Local i = 0; i < n; ++i) each_bucket(i, [&](std::size_t b) { ++count[b + 1]; });
    for (std::size_t b = 1; b < count.size(); ++b) count[b] += count[b - 1];
    offsets_ = count;
    entries_.resize(count.back());
    for (Local i = 0; i < n; ++i) each_bucket(i, [&](std::size_t b) { entries_[count[b]++] = i; });
  }

  std::size_t bucket(Point w) const {
    int x = std::clamp(int((w.real() - box_.x0) / box_.width() * bx_), 0, bx_ - 1);
    int y = std::clamp(int((w.imag() - box_.y0) / box_.height() * by_), 0, by_ - 1);
    return std::size_t(y) * std::size_t(bx_) + std::size_t(x);
  }

  std::vector<Local> flood(std::span<const Local> sorted, std::vector<bool>& seen, std::size_t start,
                           bool eight) const {
    auto position = [&](Local id) -> std::ptrdiff_t {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
      return (it != sorted.end() && *it == id) ? it - sorted.begin() : -1;
    };
    std::vector<Local> out{sorted[start]};
    std::deque<Local> queue{sorted[start]};
    seen[start] = true;
    auto visit = [&](Local j) {
      std::ptrdiff_t p = position(j);
      if (p < 0 || seen[std::size_t(p)]) return;
      seen[std::size_t(p)] = true;
      out.push_back(j);
      queue.push_back(j);
    };
    while (!queue.empty()) {
      Local i = queue.front();
      queue.pop_front();
      if (eight) {
        for_each_neighbor8(i, visit);
      } else {
        for (std::int32_t j : neighbors_[i])
          if (j != kNone) visit(Local(j));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  CellRegion region_;
  std::vector<std::int32_t> lookup_;
  std::vector<std::array<Point, 5>> images_;
  std::vector<double> spread_;
  std::vector<std::array<std::int32_t, 4>> neighbors_;
  double jump_ = 0;
  double max_spread_ = 0;
  Rect box_{};
  int bx_ = 1, by_ = 1;
  std::vector<std::uint32_t> offsets_;
  std::vector<Local> entries_;
};

}  // namespace stoilow
