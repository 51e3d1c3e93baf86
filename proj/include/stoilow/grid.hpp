#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"

namespace stoilow {

struct Cell {
  int col = 0;
  int row = 0;
  friend bool operator==(Cell, Cell) = default;
};

using CellId = std::size_t;

// Uniform lattice of square cells covering `bounds`. Cell (col,row) has linear
// id row*nx + col; rows grow with the imaginary coordinate.
class Grid {
 public:
  // Neighbor order shared by every traversal: right, up, left, down.
  static constexpr std::array<Cell, 4> kNeighbors{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

  Grid() = default;
  Grid(Rect bounds, double cell_size) : bounds_(bounds), h_(cell_size) {
    if (!(cell_size > 0)) fail(ErrorCode::InvalidArgument, "cell size must be positive");
    if (!bounds.valid()) fail(ErrorCode::InvalidArgument, "grid bounds must have positive area");
    nx_ = std::max(1, int(std::ceil(bounds.width() / h_ - 1e-9)));
    ny_ = std::max(1, int(std::ceil(bounds.height() / h_ - 1e-9)));
  }

  const Rect& bounds() const { return bounds_; }
  double cell_size() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return std::size_t(nx_) * std::size_t(ny_); }

  bool in_range(Cell c) const { return c.col >= 0 && c.col < nx_ && c.row >= 0 && c.row < ny_; }
  CellId id(Cell c) const { return std::size_t(c.row) * std::size_t(nx_) + std::size_t(c.col); }
  Cell cell(CellId id) const { return {int(id % std::size_t(nx_)), int(id / std::size_t(nx_))}; }

  Point center(Cell c) const {
    return {bounds_.x0 + (c.col + 0.5) * h_, bounds_.y0 + (c.row + 0.5) * h_};
  }
  Point center(CellId id) const { return center(cell(id)); }

  // Points on a shared edge belong to the cell with the smaller index.
  std::optional<Cell> locate(Point p) const {
    if (!bounds_.contains(p)) return std::nullopt;
    int col = std::clamp(int(std::ceil((p.real() - bounds_.x0) / h_)) - 1, 0, nx_ - 1);
    int row = std::clamp(int(std::ceil((p.imag() - bounds_.y0) / h_)) - 1, 0, ny_ - 1);
    return Cell{col, row};
  }

  // Membership samples: the center, then the points halfway to each corner.
  std::array<Point, 5> samples(Cell c) const {
    Point m = center(c);
    double q = 0.25 * h_;
    return {m, m + Point{q, q}, m + Point{-q, q}, m + Point{-q, -q}, m + Point{q, -q}};
  }

  Rect cell_rect(Cell c) const {
    return {bounds_.x0 + c.col * h_, bounds_.y0 + c.row * h_, bounds_.x0 + (c.col + 1) * h_,
            bounds_.y0 + (c.row + 1) * h_};
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.bounds_.x0 == b.bounds_.x0 && a.bounds_.y0 == b.bounds_.y0 &&
           a.bounds_.x1 == b.bounds_.x1 && a.bounds_.y1 == b.bounds_.y1 && a.h_ == b.h_;
  }

 private:
  Rect bounds_{};
  double h_ = 1;
  int nx_ = 0;
  int ny_ = 0;
};

}  // namespace stoilow
