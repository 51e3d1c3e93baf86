#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/normal.hpp"
#include "stoilow/planar_map.hpp"
#include "stoilow/region.hpp"
#include "stoilow/region_image.hpp"

namespace stoilow {

using Local = RegionImage::Local;
using Component = std::vector<Local>;  // sorted local ids

struct LiftOptions {
  int probe_segments = 200;
  int probe_arcs = 200;
  int bisection_steps = 4;
  std::uint64_t seed = 1;
  int max_intervals_log2 = 14;
  bool keep_chains = false;
  // Tube radius floor as a multiple of the region's adjacent-cell image jump.
  double tube_floor_factor = 1.0;
};

// Components C(sigma) of one refinement level, one per dyadic interval.
struct ComponentChain {
  int level = 0;
  int m = 0;  // 2^m intervals
  double epsilon = 0;
  double delta = 0;
  double tube_radius = 0;
  std::vector<Component> components;
  int budget_violations = 0;  // components with diameter >= epsilon
  int nesting_fallbacks = 0;  // links that could not stay inside the parent level
  Local start_cell = 0;

  std::size_t intervals() const { return components.size(); }
  std::pair<double, double> interval(std::size_t k) const {
    double n = double(components.size());
    return {double(k) / n, double(k + 1) / n};
  }
};

struct LiftResult {
  Polyline lift;
  Polyline target;
  double sup_error = 0;
  int levels_used = 0;
  std::vector<ComponentChain> chains;  // filled when keep_chains is set
};

inline double tube_floor(const RegionImage& ri, const LiftOptions& opt = {}) {
  return opt.tube_floor_factor * ri.adjacent_jump();
}

namespace detail {

// Generation-stamped membership flags over local ids.
class Marks {
 public:
  explicit Marks(std::size_t n) : stamp_(n, 0) {}
  void clear() {
    if (++cur_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0u);
      cur_ = 1;
    }
  }
  void set(Local i) { stamp_[i] = cur_; }
  bool has(Local i) const { return stamp_[i] == cur_; }

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t cur_ = 0;
};

// 4-connected component of the marked set `in` containing seed, marking
// visited cells in `seen`.
inline Component grow(const RegionImage& ri, const Marks& in, Marks& seen, Local seed) {
  Component out{seed};
  seen.set(seed);
  for (std::size_t head = 0; head < out.size(); ++head)
    for (std::int32_t j : ri.neighbors(out[head]))
      if (j != RegionImage::kNone && in.has(Local(j)) && !seen.has(Local(j))) {
        seen.set(Local(j));
        out.push_back(Local(j));
      }
  std::sort(out.begin(), out.end());
  return out;
}

// True if some cell of `c` lies in the marked set or is 4-adjacent to it.
inline bool meets(const RegionImage& ri, const Component& c, const Marks& marked) {
  for (Local i : c) {
    if (marked.has(i)) return true;
    for (std::int32_t j : ri.neighbors(i))
      if (j != RegionImage::kNone && marked.has(Local(j))) return true;
  }
  return false;
}

inline double piece_diameter(const Polyline& beta, double t0, double t1) {
  std::vector<Point> pts = beta.piece(t0, t1);
  return point_set_diameter(pts);
}

inline TargetSet piece_tube(const Polyline& beta, double t0, double t1, double radius) {
  return TargetSet::tube(beta.piece(t0, t1), radius);
}

struct Scratch {
  Marks in, seen, other;
  explicit Scratch(std::size_t n) : in(n), seen(n), other(n) {}
};

// Components of `cells` meeting the component `prev`, in order of their
// smallest member. Clobbers the `in` and `seen` marks.
inline std::vector<Component> meeting_components(const RegionImage& ri, const std::vector<Local>& cells,
                                                 const Component& prev, Scratch& s) {
  s.in.clear();
  for (Local i : cells) s.in.set(i);
  std::vector<Local> seeds;
  for (Local i : prev) {
    if (s.in.has(i)) seeds.push_back(i);
    for (std::int32_t j : ri.neighbors(i))
      if (j != RegionImage::kNone && s.in.has(Local(j))) seeds.push_back(Local(j));
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  s.seen.clear();
  std::vector<Component> out;
  for (Local seed : seeds)
    if (!s.seen.has(seed)) out.push_back(grow(ri, s.in, s.seen, seed));
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) { return a.front() < b.front(); });
  return out;
}

inline double distance_to(const RegionImage& ri, const Component& c, Point p) {
  double best = std::numeric_limits<double>::infinity();
  for (Local i : c) best = std::min(best, std::norm(ri.center(i) - p));
  return std::sqrt(best);
}

// Smallest cell of `c` lying in or 4-adjacent to the marked set.
inline Local link_cell(const RegionImage& ri, const Component& c, const Marks& marked) {
  for (Local i : c) {
    if (marked.has(i)) return i;
    for (std::int32_t j : ri.neighbors(i))
      if (j != RegionImage::kNone && marked.has(Local(j))) return i;
  }
  return c.front();
}

// Compass search for a point minimizing |f(p) - target|, never leaving cells
// accepted by `allowed`.
template <class Allowed>
Point polish(const PlanarMap& map, Point start, Point target, double h, Allowed&& allowed) {
  static const Point dirs[8] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {0.7071067811865476, 0.7071067811865476},
                                {-0.7071067811865476, 0.7071067811865476}, {-0.7071067811865476, -0.7071067811865476},
                                {0.7071067811865476, -0.7071067811865476}};
  Point p = start;
  double best = std::abs(map(p) - target);
  double step = 0.5 * h;
  for (int it = 0; it < 4000 && step > 1e-10 * h && best > 0; ++it) {
    Point next = p;
    double next_val = best;
    for (Point d : dirs) {
      Point q = p + step * d;
      if (!allowed(q)) continue;
      double v = std::abs(map(q) - target);
      if (v < next_val) {
        next_val = v;
        next = q;
      }
    }
    if (next_val < best) {
      best = next_val;
      p = next;
    } else {
      step *= 0.5;
    }
  }
  return p;
}

// Region cells accepted by polishing: marked cells and their 8-neighbours.
struct AllowedCells {
  const RegionImage& ri;
  const Marks& marked;
  bool operator()(Point q) const {
    auto c = ri.grid().locate(q);
    if (!c) return false;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        std::int32_t j = ri.local(Cell{c->col + dc, c->row + dr});
        if (j != RegionImage::kNone && marked.has(Local(j))) return true;
      }
    return false;
  }
};

// Reads alpha at the interval endpoints of a chain and polishes each point
// against beta. alpha(0) is `start` unchanged when `keep_start` is set.
inline std::vector<Point> read_lift(const PlanarMap& map, const RegionImage& ri, const Polyline& beta,
                                    const std::vector<Component>& comps, Point start, bool keep_start, Scratch& s) {
  const std::size_t n = comps.size();
  const double h = ri.grid().cell_size();
  std::vector<Point> alpha(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    double t = double(k) / double(n);
    Point target = beta.at(t);
    const Component& a = comps[k == 0 ? 0 : k - 1];
    const Component& b = comps[k == n ? n - 1 : k];
    s.other.clear();
    for (Local i : a) s.other.set(i);
    for (Local i : b) s.other.set(i);
    AllowedCells allowed{ri, s.other};
    if (k == 0) {
      alpha[0] = keep_start ? start : polish(map, start, target, h, allowed);
      continue;
    }
    s.in.clear();
    for (Local i : a) s.in.set(i);
    Point guess = ri.center(link_cell(ri, b, s.in));
    Point p1 = polish(map, guess, target, h, allowed);
    Point p2 = allowed(alpha[k - 1]) ? polish(map, alpha[k - 1], target, h, allowed) : p1;
    alpha[k] = std::abs(map(p2) - target) < std::abs(map(p1) - target) ? p2 : p1;
  }
  return alpha;
}

// Follows beta from alpha(0) by continuation, interval by interval: every
// step is polished from the previous point and kept only if its chord stays
// within tol/2 of beta at the quarter points, otherwise the step is halved.
// Where a component holds several sheets (near a branch value at grid scale)
// this is what keeps the lift on one of them. Steps end on beta's corners and
// on the interval ends; the read-off point at an interval end is tried as a
// second start.
inline Polyline refine_lift(const PlanarMap& map, const RegionImage& ri, const Polyline& beta,
                            const std::vector<Point>& alpha, double tol, Scratch& s) {
  const std::size_t n = alpha.size() - 1;
  const double h = ri.grid().cell_size();
  const auto& corners = beta.params();
  std::vector<Point> pts{alpha.front()};
  std::vector<double> ts{0.0};
  auto chord_ok = [&](double t0, Point p0, double t1, Point p1) {
    for (double u : {0.25, 0.5, 0.75})
      if (std::abs(map(p0 + u * (p1 - p0)) - beta.at(t0 + u * (t1 - t0))) > 0.5 * tol) return false;
    return true;
  };
  // the continuation may leave a component by up to its tube margin, so any
  // region cell is admissible
  s.other.clear();
  for (Local i = 0; i < ri.size(); ++i) s.other.set(i);
  AllowedCells allowed{ri, s.other};
  Point p = alpha.front();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = double(k) / double(n), b = k + 1 == n ? 1.0 : double(k + 1) / double(n);
    double t = a, step = b - a;
    while (t < b) {
      auto c = std::upper_bound(corners.begin(), corners.end(), t + 1e-12);
      double stop = (c != corners.end() && *c < b) ? *c : b;
      double dt = std::min(step, stop - t);
      for (;;) {
        double t1 = (stop - t - dt <= 1e-12) ? stop : t + dt;
        const Point target = beta.at(t1);
        Point best{};
        double best_d = std::numeric_limits<double>::infinity();
        for (int src = 0; src < 2; ++src) {
          if (src == 1 && t1 != b) break;
          Point from = src == 0 ? p : alpha[k + 1];
          if (!allowed(from)) continue;
          Point q = polish(map, from, target, h, allowed);
          if (std::abs(map(q) - target) > 0.25 * tol) continue;
          if (double d = std::abs(q - p); d < best_d) best_d = d, best = q;
        }
        bool ok = std::isfinite(best_d) && chord_ok(t, p, t1, best);
        if (ok || dt < 1e-9) {
          if (pts.size() > (std::size_t(1) << 18)) fail(ErrorCode::ToleranceNotMet, "lift continuation stalled");
          if (!std::isfinite(best_d)) best = polish(map, p, target, h, allowed);
          ts.push_back(t1);
          pts.push_back(best);
          p = best;
          t = t1;
          step = std::min(2 * dt, b - a);
          break;
        }
        dt *= 0.5;
      }
    }
  }
  ts.back() = 1.0;
  return Polyline(std::move(pts), std::move(ts));
}

inline std::vector<double> uniform_params(std::size_t n) {
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = double(k) / double(n);
  t.back() = 1.0;
  return t;
}

// Vertex residual; with `chords` also at every edge midpoint, where the
// target is linear between its vertices.
inline double sup_error(const PlanarMap& map, const Polyline& lift, const Polyline& target, bool chords = false) {
  const auto& a = lift.vertices();
  const auto& b = target.vertices();
  double e = 0;
  for (std::size_t i = 0; i < lift.size(); ++i) e = std::max(e, std::abs(map(a[i]) - b[i]));
  if (chords)
    for (std::size_t i = 0; i + 1 < lift.size(); ++i)
      e = std::max(e, std::abs(map(0.5 * (a[i] + a[i + 1])) - 0.5 * (b[i] + b[i + 1])));
  return e;
}

// Probe paths of diameter delta inside B(y0, r): segments through and from
// y0 (the image of the center, where components are widest when x branches),
// then random segments and circular arcs whose chord is delta.
inline std::vector<std::vector<Point>> probe_family(Point y0, double r, double delta, double tube, int segments,
                                                    int arcs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Point>> out;
  for (int j = 0; j < 8; ++j) {
    Point u = std::polar(1.0, kTwoPi * j / 8);
    out.push_back({y0, y0 + delta * u});
    if (j < 4) out.push_back({y0 - 0.5 * delta * u, y0 + 0.5 * delta * u});
  }
  double room = r - 0.5 * delta - tube;
  for (int i = 0; i < segments + arcs; ++i) {
    Point c = room > 0 ? rng.in_disk(y0, room) : y0;
    Point u = std::polar(1.0, rng.uniform(0, kTwoPi));
    if (i < segments) {
      out.push_back({c - 0.5 * delta * u, c + 0.5 * delta * u});
      continue;
    }
    double sweep = rng.uniform(0.2 * kPi, kPi);
    double rad = delta / (2 * std::sin(0.5 * sweep));
    Point normal = u * Point{0, 1};
    Point o = c - rad * std::cos(0.5 * sweep) * normal;
    double mid = std::arg(normal);
    std::vector<Point> arc;
    const int pieces = 12;
    for (int j = 0; j <= pieces; ++j) arc.push_back(o + std::polar(rad, mid - 0.5 * sweep + sweep * j / pieces));
    out.push_back(std::move(arc));
  }
  return out;
}

// True if every 4-connected component of region cells hit by the tube has
// diameter below eps. Stops at the first component that is too wide.
inline bool components_below(const RegionImage& ri, const TargetSet& tube, double eps, Scratch& s) {
  std::vector<Local> cells = ri.query(tube);
  const double pad = std::numbers::sqrt2 * ri.grid().cell_size();
  s.in.clear();
  for (Local i : cells) s.in.set(i);
  s.seen.clear();
  for (Local seed : cells) {
    if (s.seen.has(seed)) continue;
    Component comp{seed};
    s.seen.set(seed);
    Rect box = Rect::centered(ri.center(seed), 0);
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (std::int32_t j : ri.neighbors(comp[head])) {
        if (j == RegionImage::kNone || !s.in.has(Local(j)) || s.seen.has(Local(j))) continue;
        s.seen.set(Local(j));
        comp.push_back(Local(j));
        Point p = ri.center(Local(j));
        box = {std::min(box.x0, p.real()), std::min(box.y0, p.imag()), std::max(box.x1, p.real()),
               std::max(box.y1, p.imag())};
        if (std::max(box.width(), box.height()) + pad >= eps) return false;
      }
    }
    if (std::hypot(box.width(), box.height()) + pad >= eps && ri.diameter(comp) >= eps) return false;
  }
  return true;
}

}  // namespace detail

// Empirical modulus: the largest delta (halving from the normal radius, then
// a short bisection upward) such that every probe path of diameter delta
// pulls back, thickened to a tube, into components of diameter < eps.
inline double lift_modulus(const PlanarMap& map, const NormalDomain& nd, double eps, const LiftOptions& opt = {}) {
  (void)map;
  const RegionImage& ri = *nd.image;
  const double h = ri.grid().cell_size();
  if (!(eps > 2 * std::numbers::sqrt2 * h)) {
    std::ostringstream os;
    os << "epsilon " << eps << " is not resolvable at cell size " << h;
    fail(ErrorCode::ModulusNotFound, os.str());
  }
  const double floor = tube_floor(ri, opt);
  detail::Scratch s(ri.size());
  std::uint64_t trial = 0;
  auto passes = [&](double delta) {
    double tube = std::max(delta / 4, floor);
    auto probes = detail::probe_family(nd.image_center, nd.radius, delta, tube, opt.probe_segments, opt.probe_arcs,
                                       mix_seed(opt.seed, 0x6d6f64 + trial++));
    for (auto& p : probes)
      if (!detail::components_below(ri, TargetSet::tube(std::move(p), tube), eps, s)) return false;
    return true;
  };
  double delta = nd.radius;
  while (!passes(delta)) {
    delta *= 0.5;
    if (delta < h) {
      std::ostringstream os;
      os << "no probe diameter down to the cell size keeps preimage components below " << eps;
      fail(ErrorCode::ModulusNotFound, os.str());
    }
  }
  if (delta >= nd.radius) return delta;
  double lo = delta, hi = std::min(2 * delta, nd.radius);
  for (int i = 0; i < opt.bisection_steps; ++i) {
    double mid = 0.5 * (lo + hi);
    (passes(mid) ? lo : hi) = mid;
  }
  return lo;
}

namespace detail {

inline void require_lift_inputs(const PlanarMap& map, const NormalDomain& nd, const Polyline& beta, Point x0,
                                double tol) {
  if (!(tol > 0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
  auto inside = [&](Point w) { return std::abs(w - nd.image_center) < nd.radius; };
  for (Point w : beta.vertices())
    if (!inside(w)) fail(ErrorCode::PreconditionFailed, "target path leaves the image disk of the normal domain");
  for (int i = 0; i <= 64; ++i)
    if (!inside(beta.at(i / 64.0)))
      fail(ErrorCode::PreconditionFailed, "target path leaves the image disk of the normal domain");
  if (std::abs(map(x0) - beta.at(0)) > tol)
    fail(ErrorCode::PreconditionFailed, "f(x0) is farther than tol from the start of the target path");
  auto c = nd.grid().locate(x0);
  if (!c || nd.image->local(*c) == RegionImage::kNone)
    fail(ErrorCode::PreconditionFailed, "x0 is not inside the normal domain");
}

// Components for level m, chained from the start cell, with nesting into the
// parent level when one is given.
inline ComponentChain build_chain(const RegionImage& ri, const Polyline& beta, int m, double tube, Local start,
                                  const ComponentChain* parent, Scratch& s) {
  ComponentChain ch;
  ch.m = m;
  ch.tube_radius = tube;
  ch.start_cell = start;
  const std::size_t n = std::size_t(1) << m;
  ch.components.reserve(n);
  Local link = start;
  for (std::size_t k = 0; k < n; ++k) {
    double t0 = double(k) / double(n), t1 = double(k + 1) / double(n);
    std::vector<Local> cells = ri.query(piece_tube(beta, t0, t1, tube));
    std::vector<Component> cands =
        meeting_components(ri, cells, k == 0 ? Component{start} : ch.components.back(), s);
    if (cands.empty()) {
      std::ostringstream os;
      os << "no component over [" << t0 << ", " << t1 << "] meets the previous one (level " << m << ")";
      fail(ErrorCode::ChainBroken, os.str());
    }
    if (parent) {
      const Component& up = parent->components[k >> (m - parent->m)];
      s.other.clear();
      for (Local i : up) s.other.set(i);
      std::vector<Component> nested;
      for (auto& c : cands)
        if (meets(ri, c, s.other)) nested.push_back(std::move(c));
      // nothing was moved out of cands when no candidate nests
      if (nested.empty())
        ++ch.nesting_fallbacks;
      else
        cands = std::move(nested);
    }
    Point anchor = ri.center(link);
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      double d = distance_to(ri, cands[i], anchor);
      if (d < best) {  // strict: ties keep the smaller first member
        best = d;
        pick = i;
      }
    }
    s.other.clear();
    if (k == 0) {
      s.other.set(start);
    } else {
      for (Local i : ch.components.back()) s.other.set(i);
    }
    link = link_cell(ri, cands[pick], s.other);
    ch.components.push_back(std::move(cands[pick]));
  }
  return ch;
}

inline int intervals_log2_for(const Polyline& beta, double delta, int m_min, int m_max) {
  for (int m = m_min; m < m_max; ++m) {
    std::size_t n = std::size_t(1) << m;
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) ok = piece_diameter(beta, double(k) / n, double(k + 1) / n) < delta;
    if (ok) return m;
  }
  return m_max;
}

inline int budget_violations(const RegionImage& ri, const ComponentChain& ch, double eps) {
  int v = 0;
  for (const auto& c : ch.components) v += ri.diameter(c) >= eps;
  return v;
}

}  // namespace detail

// Subdivision lift of beta from x0. Levels n = 1, 2, ... use eps_n =
// 2^-n diam(U) until eps_n reaches max(tol/2, 4h); each level picks 2^m
// intervals so every beta(sigma) is below the level's modulus, chains the
// tube-preimage components and nests them in the previous level. The lift is
// read off the deepest level, polished pointwise against beta, and refined
// until chords follow beta too.
inline LiftResult lift_path(const PlanarMap& map, const NormalDomain& nd, const Polyline& beta, Point x0, double tol,
                            const LiftOptions& opt = {}) {
  detail::require_lift_inputs(map, nd, beta, x0, tol);
  const RegionImage& ri = *nd.image;
  const double h = ri.grid().cell_size();
  const double floor = tube_floor(ri, opt);
  const double eps_min = std::max(tol / 2, 4 * h);
  const Local start = Local(ri.local(*ri.grid().locate(x0)));
  detail::Scratch s(ri.size());

  std::vector<ComponentChain> chains;
  double eps = nd.diameter();
  int m = 0;
  for (int level = 1;; ++level) {
    eps = std::max(0.5 * eps, eps_min);
    double delta;
    try {
      delta = lift_modulus(map, nd, eps, opt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ModulusNotFound) throw;
      delta = floor;
    }
    double tube = std::max(delta / 4, floor);
    m = detail::intervals_log2_for(beta, std::max(delta, floor), m, opt.max_intervals_log2);
    const ComponentChain* parent = chains.empty() ? nullptr : &chains.back();
    ComponentChain ch = detail::build_chain(ri, beta, m, tube, start, parent, s);
    ch.budget_violations = detail::budget_violations(ri, ch, eps);
    // relieve the diameter budget by subdividing further, down to pieces
    // shorter than the tube floor
    while (ch.budget_violations > 0 && m < opt.max_intervals_log2 &&
           detail::piece_diameter(beta, 0, std::ldexp(1.0, -m)) > floor) {
      ++m;
      ch = detail::build_chain(ri, beta, m, tube, start, parent, s);
      ch.budget_violations = detail::budget_violations(ri, ch, eps);
    }
    ch.level = level;
    ch.epsilon = eps;
    ch.delta = delta;
    chains.push_back(std::move(ch));
    if (eps <= eps_min) break;
  }

  const ComponentChain& last = chains.back();
  LiftResult res;
  res.lift = detail::refine_lift(map, ri, beta, detail::read_lift(map, ri, beta, last.components, x0, true, s), tol, s);
  res.target = beta.resampled(res.lift.params());
  res.levels_used = last.level;
  res.sup_error = detail::sup_error(map, res.lift, res.target, true);
  if (opt.keep_chains) res.chains = std::move(chains);
  if (res.sup_error > tol) {
    std::ostringstream os;
    os << "lift residual " << res.sup_error << " exceeds tol " << tol << " at the finest level";
    fail(ErrorCode::ToleranceNotMet, os.str());
  }
  return res;
}

struct UniquenessResult {
  bool unique = true;
  double max_separation = 0;
  double witness_param = 0;
};

// Compares two lifts of the same arc after resampling both by arc length on
// a common parameter grid.
inline UniquenessResult assert_unique_lift(const PlanarMap& map, const Rect& bounds, const Polyline& alpha1,
                                           const Polyline& alpha2, double tol) {
  for (const Polyline* a : {&alpha1, &alpha2})
    for (Point p : a->vertices())
      if (!bounds.contains(p)) fail(ErrorCode::PreconditionFailed, "lift leaves the simply connected bounds");
  if (std::abs(alpha1.front() - alpha2.front()) > tol)
    fail(ErrorCode::PreconditionFailed, "lifts start at different points");
  if (std::abs(alpha1.back() - alpha2.back()) > tol)
    fail(ErrorCode::PreconditionFailed, "lifts end at different points");
  Polyline a = alpha1.by_arc_length(), b = alpha2.by_arc_length();
  std::vector<double> grid = detail::uniform_params(256);
  grid.reserve(grid.size() + a.params().size() + b.params().size());
  for (const Polyline* l : {&a, &b})
    for (double t : l->params()) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  UniquenessResult out;
  for (double t : grid) {
    Point p = a.at(t), q = b.at(t);
    if (std::abs(map(p) - map(q)) > tol) {
      std::ostringstream os;
      os << "f(alpha1) and f(alpha2) differ by more than tol at t = " << t;
      fail(ErrorCode::PreconditionFailed, os.str());
    }
    double d = std::abs(p - q);
    if (d > out.max_separation) {
      out.max_separation = d;
      out.witness_param = t;
    }
  }
  out.unique = out.max_separation < 3 * tol;
  return out;
}

struct RayLifts {
  std::vector<LiftResult> lifts;
  int start_clusters = 0;  // fiber clusters of f(x)
  int end_clusters = 0;    // fiber clusters of the ray's endpoint
  int raw_paths = 0;       // chains found before deduplication
};

// All lifts of the ray f(x) + t r (1 - tol) dir, found by following every
// component that meets the previous one from each fiber cluster of f(x).
inline RayLifts enumerate_ray_lifts(const PlanarMap& map, const NormalDomain& nd, Point direction, double tol,
                                    int max_lifts = 64, const LiftOptions& opt = {}) {
  if (std::abs(direction) == 0) fail(ErrorCode::InvalidArgument, "ray direction must be nonzero");
  if (!(tol > 0 && tol < 1)) fail(ErrorCode::InvalidArgument, "ray tolerance must lie in (0, 1)");
  if (max_lifts < 1) fail(ErrorCode::InvalidArgument, "max_lifts must be positive");
  const RegionImage& ri = *nd.image;
  const double h = ri.grid().cell_size();
  Point dir = direction / std::abs(direction);
  const double len = nd.radius * (1 - tol);
  Polyline beta = Polyline::segment(nd.image_center, nd.image_center + len * dir);
  const double tube = tube_floor(ri, opt);
  int m = std::clamp(int(std::ceil(std::log2(len / std::max(tube, 1e-300)))), 1, opt.max_intervals_log2);
  const std::size_t n = std::size_t(1) << m;

  std::vector<std::vector<Local>> cells(n);
  for (std::size_t k = 0; k < n; ++k)
    cells[k] = ri.query(detail::piece_tube(beta, double(k) / n, double(k + 1) / n, tube));

  detail::Scratch s(ri.size());
  RayLifts out;
  auto start_clusters = fiber_clusters(ri, nd.image_center);
  out.start_clusters = int(start_clusters.size());
  out.end_clusters = int(fiber_clusters(ri, beta.back()).size());

  // components per interval keyed by smallest member, with memoized successors
  std::vector<std::map<Local, Component>> comps(n);
  std::map<std::pair<std::size_t, Local>, std::vector<Local>> next;
  auto successors = [&](std::size_t k, Local key) -> const std::vector<Local>& {
    auto it = next.find({k, key});
    if (it != next.end()) return it->second;
    std::vector<Local> keys;
    for (auto& c : detail::meeting_components(ri, cells[k + 1], comps[k].at(key), s)) {
      keys.push_back(c.front());
      comps[k + 1].emplace(c.front(), std::move(c));
    }
    return next.emplace(std::make_pair(k, key), std::move(keys)).first->second;
  };

  const std::size_t raw_cap = std::size_t(16) * std::size_t(max_lifts);
  std::vector<std::pair<Point, std::vector<Local>>> paths;  // start point, component keys
  auto home = ri.grid().locate(nd.center);
  std::int32_t home_local = home ? ri.local(*home) : RegionImage::kNone;
  std::vector<Local> seen_starts;
  for (const auto& cluster : start_clusters) {
    Point p0 = ri.center(cluster.front());
    if (home_local != RegionImage::kNone && std::binary_search(cluster.begin(), cluster.end(), Local(home_local)))
      p0 = nd.center;
    for (auto& c : detail::meeting_components(ri, cells[0], cluster, s)) {
      Local key = c.front();
      if (std::find(seen_starts.begin(), seen_starts.end(), key) != seen_starts.end()) continue;
      seen_starts.push_back(key);
      comps[0].emplace(key, std::move(c));
      std::vector<Local> path{key};
      // iterative depth-first walk over successor choices
      std::vector<std::size_t> choice{0};
      while (!choice.empty()) {
        std::size_t k = path.size() - 1;
        if (k + 1 == n) {
          paths.emplace_back(p0, path);
          if (paths.size() > raw_cap)
            fail(ErrorCode::InfiniteLiftSuspect, "ray lift enumeration keeps finding new chains");
          path.pop_back();
          choice.pop_back();
          continue;
        }
        const std::vector<Local>& succ = successors(k, path.back());
        if (choice.back() >= succ.size()) {
          path.pop_back();
          choice.pop_back();
          continue;
        }
        path.push_back(succ[choice.back()++]);
        choice.push_back(0);
      }
    }
  }
  out.raw_paths = int(paths.size());

  std::vector<double> params = detail::uniform_params(n);
  Polyline target = beta.resampled(params);
  for (auto& [p0, keys] : paths) {
    std::vector<Component> chain;
    chain.reserve(n);
    for (std::size_t k = 0; k < n; ++k) chain.push_back(comps[k].at(keys[k]));
    LiftResult lr;
    lr.target = target;
    lr.lift = Polyline(detail::read_lift(map, ri, beta, chain, p0, false, s), params);
    lr.sup_error = detail::sup_error(map, lr.lift, lr.target);
    lr.levels_used = 1;
    if (lr.sup_error > tol) {
      std::ostringstream os;
      os << "ray lift residual " << lr.sup_error << " exceeds tol " << tol;
      fail(ErrorCode::ToleranceNotMet, os.str());
    }
    bool duplicate = false;
    for (const LiftResult& kept : out.lifts) {
      double d = 0;
      for (std::size_t i = 0; i < params.size(); ++i)
        d = std::max(d, std::abs(kept.lift.vertices()[i] - lr.lift.vertices()[i]));
      if (d < 3 * h) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    out.lifts.push_back(std::move(lr));
    if (int(out.lifts.size()) > max_lifts) {
      std::ostringstream os;
      os << "more than " << max_lifts << " distinct ray lifts";
      fail(ErrorCode::InfiniteLiftSuspect, os.str());
    }
  }
  return out;
}

}  // namespace stoilow
