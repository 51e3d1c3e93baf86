#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "stoilow/branch.hpp"
#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/grid.hpp"
#include "stoilow/normal.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region_image.hpp"

namespace stoilow {

struct FactorOptions {
  double tol = 1e-2;
  std::optional<int> force_k;       // replaces |local degree|; for negative tests
  std::optional<double> radius;     // skip the radius search
  int radius_halvings = 4;
  NormalOptions normal;
};

// f|U = phi^-1 o zeta_k o psi with phi(w) = (w - f(z)) / r and psi tabulated
// at region cell centers.
struct NormalFormChart {
  NormalDomain nd;
  int k = 1;
  int orientation = 1;  // sign of the local degree
  std::vector<Point> psi;          // per region-local cell
  std::vector<std::uint8_t> central;  // cell in the fiber cluster of f(z)
  Local base_cell = 0;
  double residual = 0;
  // monodromy evidence
  int ring_winding = 0;
  int ring_shift = 0;    // j with ring multiplier e^{2 pi i j / k}
  int seam_mismatches = 0;
  // grid-scale injectivity
  double injectivity_threshold = 0;
  int injectivity_violations = 0;

  Point phi(Point w) const { return (w - nd.image_center) / nd.radius; }

  // Bilinear blend of the four surrounding cell centers; psi(center) = 0
  // exactly. Near the region edge, where some of the four are missing, a
  // first-order extrapolation from the containing cell replaces the blend.
  Point psi_at(Point w) const {
    if (w == nd.center) return {0, 0};
    const RegionImage& ri = *nd.image;
    const Grid& g = ri.grid();
    const double h = g.cell_size();
    double u = (w.real() - g.bounds().x0) / h - 0.5, v = (w.imag() - g.bounds().y0) / h - 0.5;
    int i0 = int(std::floor(u)), j0 = int(std::floor(v));
    double a = u - i0, b = v - j0;
    Point sum{0, 0};
    bool complete = true;
    for (int dj = 0; dj <= 1 && complete; ++dj)
      for (int di = 0; di <= 1; ++di) {
        std::int32_t c = ri.local(Cell{i0 + di, j0 + dj});
        if (c == RegionImage::kNone) {
          complete = false;
          break;
        }
        sum += (di ? a : 1 - a) * (dj ? b : 1 - b) * psi[std::size_t(c)];
      }
    if (complete) return sum;
    auto cell = g.locate(w);
    std::int32_t c = cell ? ri.local(*cell) : RegionImage::kNone;
    if (c == RegionImage::kNone) fail(ErrorCode::OutOfDomain, "psi queried outside the normal domain");
    const Point p0 = psi[std::size_t(c)];
    const Point d = w - ri.center(Local(c));
    // one-sided difference along each axis, whichever neighbour exists
    auto slope = [&](Cell fwd, Cell back) {
      std::int32_t f = ri.local(fwd), b2 = ri.local(back);
      if (f != RegionImage::kNone) return (psi[std::size_t(f)] - p0) / h;
      if (b2 != RegionImage::kNone) return (p0 - psi[std::size_t(b2)]) / h;
      return Point{0, 0};
    };
    const Cell at = *cell;
    Point sx = slope({at.col + 1, at.row}, {at.col - 1, at.row});
    Point sy = slope({at.col, at.row + 1}, {at.col, at.row - 1});
    return p0 + d.real() * sx + d.imag() * sy;
  }
};

namespace detail {

inline Point root_nearest(Point v, int k, Point ref) {
  if (v == Point{0, 0}) return {0, 0};
  double m = std::pow(std::abs(v), 1.0 / k);
  double a = std::arg(v) / k;
  Point best = std::polar(m, a);
  double bd = std::norm(best - ref);
  for (int j = 1; j < k; ++j) {
    Point c = std::polar(m, a + kTwoPi * j / k);
    if (double d = std::norm(c - ref); d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

// Cells at Chebyshev distance d from `c`, counter-clockwise from (c.col+d, c.row).
inline std::vector<Cell> square_ring(Cell c, int d) {
  std::vector<Cell> out;
  for (int r = 0; r < d; ++r) out.push_back({c.col + d, c.row + r});
  for (int q = d; q > -d; --q) out.push_back({c.col + q, c.row + d});
  for (int r = d; r > -d; --r) out.push_back({c.col - d, c.row + r});
  for (int q = -d; q < d; ++q) out.push_back({c.col + q, c.row - d});
  for (int r = -d; r < 0; ++r) out.push_back({c.col + d, c.row + r});
  return out;
}

inline int nearest_shift(Point from, Point to, int k) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    double d = std::norm(from * std::polar(1.0, kTwoPi * j / k) - to);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

// Count pairs of cells more than 3 cells apart whose psi values are closer
// than `threshold`.
inline int injectivity_violations(const NormalFormChart& ch, double threshold) {
  const RegionImage& ri = *ch.nd.image;
  const double h = ri.grid().cell_size();
  const int nb = std::max(1, int(std::ceil(2.5 / threshold)));
  auto key = [&](Point p) {
    long x = std::clamp(long(std::floor((p.real() + 1.25) / threshold)), 0L, long(nb) - 1);
    long y = std::clamp(long(std::floor((p.imag() + 1.25) / threshold)), 0L, long(nb) - 1);
    return std::pair<long, long>{x, y};
  };
  std::unordered_map<std::int64_t, std::vector<Local>> buckets;
  for (Local i = 0; i < ri.size(); ++i) {
    auto [x, y] = key(ch.psi[i]);
    buckets[std::int64_t(y) * nb + x].push_back(i);
  }
  int bad = 0;
  for (Local i = 0; i < ri.size(); ++i) {
    auto [x, y] = key(ch.psi[i]);
    for (long dy = -1; dy <= 1; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        auto it = buckets.find(std::int64_t(y + dy) * nb + (x + dx));
        if (it == buckets.end() || x + dx < 0 || y + dy < 0 || x + dx >= nb || y + dy >= nb) continue;
        for (Local j : it->second)
          if (j > i && std::abs(ch.psi[i] - ch.psi[j]) < threshold && std::abs(ri.center(i) - ri.center(j)) > 3 * h)
            ++bad;
      }
  }
  return bad;
}

// Builds the chart around a verified normal neighbourhood of z by continuing
// the k-th root of phi o f along a breadth-first spanning tree.
inline NormalFormChart build_normal_form(const PlanarMap& map, Point z, const Grid& grid,
                                         const FactorOptions& opt = {}) {
  double r = opt.radius ? *opt.radius : find_normal_radius(map, z, grid).radius;
  std::optional<NormalDomain> found;
  std::string last_reason = "no radius tried";
  for (int attempt = 0; attempt <= opt.radius_halvings && !found; ++attempt, r *= 0.5) {
    try {
      NormalDomain nd = build_normal_domain(map, z, r, grid, opt.normal);
      if (is_normal_neighbourhood(map, nd))
        found = std::move(nd);
      else
        last_reason = "region is not a normal neighbourhood";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::VerificationFailed && e.code() != ErrorCode::SeedNotInSet) throw;
      last_reason = e.what();
    }
  }
  if (!found) fail(ErrorCode::VerificationFailed, "no verified normal neighbourhood: " + last_reason);

  NormalFormChart ch;
  ch.nd = std::move(*found);
  const NormalDomain& nd = ch.nd;
  const RegionImage& ri = *nd.image;
  const Grid& g = ri.grid();
  const std::size_t n = ri.size();

  LocalDegreeResult deg = local_degree(map, z, center_probe_radius(nd));
  ch.orientation = deg.degree < 0 ? -1 : 1;
  ch.k = opt.force_k ? *opt.force_k : std::abs(deg.degree);
  if (ch.k < 1) fail(ErrorCode::InvalidArgument, "normal form degree must be at least 1");
  const int k = ch.k;

  std::vector<Point> v(n);
  for (Local i = 0; i < n; ++i) v[i] = ch.phi(ri.image(i));

  Cell home = *g.locate(z);
  const std::int32_t home_local = ri.local(home);
  ch.central.assign(n, 0);
  for (const auto& cluster : fiber_clusters(ri, nd.image_center)) {
    bool holds = home_local != RegionImage::kNone &&
                 std::binary_search(cluster.begin(), cluster.end(), Local(home_local));
    if (holds)
      for (Local i : cluster) ch.central[i] = 1;
  }
  if (home_local != RegionImage::kNone) ch.central[std::size_t(home_local)] = 1;

  // base cell: first non-central region cell to the right of z
  std::int32_t base = RegionImage::kNone;
  for (int col = home.col + 1; col < g.nx() && base == RegionImage::kNone; ++col) {
    std::int32_t c = ri.local(Cell{col, home.row});
    if (c == RegionImage::kNone) break;
    if (!ch.central[std::size_t(c)]) base = c;
  }
  if (base == RegionImage::kNone) fail(ErrorCode::VerificationFailed, "no base cell to the right of the center");
  ch.base_cell = Local(base);

  // breadth-first continuation over non-central cells
  ch.psi.assign(n, Point{0, 0});
  constexpr std::int32_t kUnassigned = RegionImage::kNone - 1;
  std::vector<std::int32_t> parent(n, kUnassigned);
  std::deque<Local> queue{ch.base_cell};
  ch.psi[ch.base_cell] = detail::root_nearest(v[ch.base_cell], k, std::polar(1.0, std::arg(v[ch.base_cell]) / k));
  parent[ch.base_cell] = RegionImage::kNone;
  while (!queue.empty()) {
    Local i = queue.front();
    queue.pop_front();
    for (std::int32_t j : ri.neighbors(i)) {
      if (j == RegionImage::kNone || ch.central[std::size_t(j)] || parent[std::size_t(j)] != kUnassigned) continue;
      parent[std::size_t(j)] = std::int32_t(i);
      ch.psi[std::size_t(j)] = detail::root_nearest(v[std::size_t(j)], k, ch.psi[i]);
      queue.push_back(Local(j));
    }
  }

  // central and unreached cells: forced modulus, argument from assigned neighbours
  std::vector<Local> pending;
  for (Local i = 0; i < n; ++i)
    if (parent[i] == kUnassigned) pending.push_back(i);
  std::vector<std::uint8_t> done(n, 0);
  for (Local i = 0; i < n; ++i) done[i] = parent[i] != kUnassigned;
  while (!pending.empty()) {
    std::vector<Local> rest;
    std::vector<std::pair<Local, Point>> fill;
    for (Local i : pending) {
      Point mean{0, 0};
      int cnt = 0;
      ri.for_each_neighbor8(i, [&](Local j) {
        if (done[j]) mean += ch.psi[j], ++cnt;
      });
      if (cnt == 0) {
        rest.push_back(i);
        continue;
      }
      double m = std::pow(std::abs(v[i]), 1.0 / k);
      fill.push_back({i, std::abs(mean) > 0 ? m * mean / std::abs(mean) : Point{m, 0}});
    }
    if (fill.empty()) {
      for (Local i : rest) ch.psi[i] = std::pow(std::abs(v[i]), 1.0 / k);
      break;
    }
    for (auto [i, p] : fill) ch.psi[i] = p, done[i] = 1;
    pending = std::move(rest);
  }

  // deck check on a square ring around the center
  int inner = int(std::floor(0.5 * inner_radius(nd) / g.cell_size()));
  int extent = 0;
  for (Local i = 0; i < n; ++i)
    if (ch.central[i]) {
      Cell c = ri.cell(i);
      extent = std::max({extent, std::abs(c.col - home.col), std::abs(c.row - home.row)});
    }
  int d = std::max(inner, extent + 2);
  std::vector<Cell> ring = detail::square_ring(home, d);
  std::vector<Point> ring_values;
  for (Cell c : ring) {
    std::int32_t j = ri.local(c);
    if (j == RegionImage::kNone || ch.central[std::size_t(j)])
      fail(ErrorCode::VerificationFailed, "monodromy ring leaves the punctured region");
    ring_values.push_back(v[std::size_t(j)]);
  }
  ch.ring_winding = int(std::lround(winding_sum(ring_values, {0, 0})));
  Point start = ch.psi[std::size_t(ri.local(ring.front()))];
  Point cur = start;
  for (std::size_t i = 1; i <= ring_values.size(); ++i)
    cur = detail::root_nearest(ring_values[i % ring_values.size()], k, cur);
  ch.ring_shift = detail::nearest_shift(start, cur, k);

  // non-tree edges must not jump by a deck transformation
  if (k > 1) {
    const double step = std::abs(1.0 - std::polar(1.0, kTwoPi / k));
    for (Local i = 0; i < n; ++i) {
      if (ch.central[i]) continue;
      for (int dir = 0; dir < 2; ++dir) {
        std::int32_t j = ri.neighbors(i)[std::size_t(dir)];
        if (j == RegionImage::kNone || ch.central[std::size_t(j)]) continue;
        if (parent[std::size_t(j)] == std::int32_t(i) || parent[i] == j) continue;
        Point a = ch.psi[i], b = ch.psi[std::size_t(j)];
        if (detail::nearest_shift(a, b, k) != 0 && std::abs(a - b) > 0.5 * std::abs(a) * step) ++ch.seam_mismatches;
      }
    }
  }
  if (ch.ring_winding != ch.orientation * k || ch.ring_shift != 0 || ch.seam_mismatches > 0) {
    std::ostringstream os;
    os << "branch continuation is not single valued for k = " << k << ": ring winding " << ch.ring_winding
       << ", ring shift " << ch.ring_shift << ", seam jumps " << ch.seam_mismatches;
    fail(ErrorCode::MonodromyMismatch, os.str());
  }

  for (Local i = 0; i < n; ++i) {
    Point p{1, 0};
    for (int j = 0; j < k; ++j) p *= ch.psi[i];
    ch.residual = std::max(ch.residual, std::abs(v[i] - p));
  }
  ch.injectivity_threshold = g.cell_size() / std::pow(nd.radius, 1.0 / k);
  ch.injectivity_violations = injectivity_violations(ch, ch.injectivity_threshold);
  if (ch.residual > opt.tol) {
    std::ostringstream os;
    os << "normal form residual " << ch.residual << " exceeds " << opt.tol;
    fail(ErrorCode::ResidualExceeded, os.str());
  }
  return ch;
}

struct NormalFormReport {
  int probes = 0;
  double max_residual = 0;
  double mean_residual = 0;
  double min_separation_ratio = 0;  // min |psi(a) - psi(b)| / |a - b| over probe pairs
  double boundary_deviation = 0;    // max ||psi| - 1| near the region boundary
  double center_modulus = 0;        // max |psi| over probes near the center
};

inline NormalFormReport verify_normal_form(const PlanarMap& map, const NormalFormChart& ch, int probes,
                                           std::uint64_t seed = 1) {
  if (probes < 1) fail(ErrorCode::InvalidArgument, "probe count must be positive");
  const RegionImage& ri = *ch.nd.image;
  const double h = ri.grid().cell_size();
  Rng rng(mix_seed(seed, 0x76657269));
  int near_center = std::max(1, probes / 20), near_boundary = std::max(1, probes / 20);
  int uniform = std::max(0, probes - near_center - near_boundary);
  std::vector<CellId> edge = boundary_cells(ch.nd.region);
  double inner = inner_radius(ch.nd);

  NormalFormReport rep;
  std::vector<Point> pts, vals;
  auto in_cell = [&](Local c) { return ri.center(c) + Point{rng.uniform(-0.5, 0.5) * h, rng.uniform(-0.5, 0.5) * h}; };
  auto record = [&](Point w) {
    Point p = ch.psi_at(w), q{1, 0};
    for (int j = 0; j < ch.k; ++j) q *= p;
    double res = std::abs(ch.phi(map(w)) - q);
    rep.max_residual = std::max(rep.max_residual, res);
    rep.mean_residual += res;
    pts.push_back(w);
    vals.push_back(p);
    return p;
  };
  for (int i = 0; i < uniform; ++i) record(in_cell(Local(rng.below(ri.size()))));
  for (int i = 0; i < near_center; ++i) {
    Point p = record(rng.in_disk(ch.nd.center, 0.1 * inner));
    rep.center_modulus = std::max(rep.center_modulus, std::abs(p));
  }
  for (int i = 0; i < near_boundary && !edge.empty(); ++i) {
    CellId id = edge[rng.below(edge.size())];
    Point p = record(ri.center(Local(ri.local(id))));
    rep.boundary_deviation = std::max(rep.boundary_deviation, std::abs(std::abs(p) - 1.0));
  }
  rep.probes = int(pts.size());
  rep.mean_residual /= std::max(1, rep.probes);
  rep.min_separation_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      double dz = std::abs(pts[a] - pts[b]);
      if (dz > 3 * h) rep.min_separation_ratio = std::min(rep.min_separation_ratio, std::abs(vals[a] - vals[b]) / dz);
    }
  if (!std::isfinite(rep.min_separation_ratio)) rep.min_separation_ratio = 0;
  return rep;
}

}  // namespace stoilow
