#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "stoilow/error.hpp"

namespace stoilow {

// Planar points and map values share one representation.
using Point = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  static Rect centered(Point c, double half_side) {
    return {c.real() - half_side, c.imag() - half_side, c.real() + half_side,
            c.imag() + half_side};
  }

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool valid() const { return width() > 0 && height() > 0; }

  bool contains(Point p) const {
    return p.real() >= x0 && p.real() <= x1 && p.imag() >= y0 && p.imag() <= y1;
  }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }
  bool intersects(const Rect& r) const {
    return r.x0 <= x1 && r.x1 >= x0 && r.y0 <= y1 && r.y1 >= y0;
  }
  Rect inflated(double d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }

  // Euclidean distance from an interior point to the rectangle's boundary.
  double inner_distance(Point p) const {
    return std::min({p.real() - x0, x1 - p.real(), p.imag() - y0, y1 - p.imag()});
  }

  static Rect bounding(std::span<const Point> pts) {
    Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (Point p : pts) {
      r.x0 = std::min(r.x0, p.real());
      r.x1 = std::max(r.x1, p.real());
      r.y0 = std::min(r.y0, p.imag());
      r.y1 = std::max(r.y1, p.imag());
    }
    return r;
  }
};

inline double dist_to_segment(Point p, Point a, Point b) {
  Point ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

inline double dist_to_path(Point p, std::span<const Point> path) {
  if (path.size() == 1) return std::abs(p - path[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    best = std::min(best, dist_to_segment(p, path[i], path[i + 1]));
  return best;
}

// Piecewise-linear path t -> P(t) on [0,1]. Vertices and parameters have equal
// length >= 2, params nondecreasing from 0 to 1.
class Polyline {
 public:
  Polyline() = default;
  Polyline(std::vector<Point> vertices, std::vector<double> params)
      : vertices_(std::move(vertices)), params_(std::move(params)) {
    if (vertices_.size() < 2 || vertices_.size() != params_.size())
      fail(ErrorCode::InvalidArgument, "polyline needs >= 2 vertices with matching params");
    if (params_.front() != 0.0 || params_.back() != 1.0)
      fail(ErrorCode::InvalidArgument, "polyline params must start at 0 and end at 1");
    for (std::size_t i = 1; i < params_.size(); ++i)
      if (params_[i] < params_[i - 1])
        fail(ErrorCode::InvalidArgument, "polyline params must be nondecreasing");
  }

  // Parametrized proportionally to arc length (uniformly if the length is 0).
  static Polyline through(std::vector<Point> pts) {
    if (pts.size() == 1) pts.push_back(pts.front());
    std::vector<double> s(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + std::abs(pts[i] - pts[i - 1]);
    double total = s.back();
    for (std::size_t i = 0; i < s.size(); ++i)
      s[i] = total > 0 ? s[i] / total : double(i) / double(s.size() - 1);
    s.back() = 1.0;
    return Polyline(std::move(pts), std::move(s));
  }

  static Polyline segment(Point a, Point b) { return Polyline({a, b}, {0.0, 1.0}); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t size() const { return vertices_.size(); }
  Point front() const { return vertices_.front(); }
  Point back() const { return vertices_.back(); }

  Point at(double t) const {
    t = std::clamp(t, 0.0, 1.0);
    auto it = std::upper_bound(params_.begin(), params_.end(), t);
    if (it == params_.end()) return vertices_.back();
    std::size_t j = std::size_t(it - params_.begin());
    if (j == 0) return vertices_.front();
    double t0 = params_[j - 1], t1 = params_[j];
    if (t1 <= t0) return vertices_[j];
    double u = (t - t0) / (t1 - t0);
    return vertices_[j - 1] + u * (vertices_[j] - vertices_[j - 1]);
  }

  // Image of [t0,t1] as a vertex list (endpoints plus interior vertices).
  std::vector<Point> piece(double t0, double t1) const {
    std::vector<Point> out{at(t0)};
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i] > t0 && params_[i] < t1) out.push_back(vertices_[i]);
    out.push_back(at(t1));
    return out;
  }

  Polyline resampled(std::span<const double> params) const {
    std::vector<Point> v;
    v.reserve(params.size());
    for (double t : params) v.push_back(at(t));
    return Polyline(std::move(v), std::vector<double>(params.begin(), params.end()));
  }

  // Same geometric path, parametrized by normalized arc length.
  Polyline by_arc_length() const { return through(vertices_); }

  double length() const {
    double s = 0;
    for (std::size_t i = 1; i < vertices_.size(); ++i) s += std::abs(vertices_[i] - vertices_[i - 1]);
    return s;
  }

 private:
  std::vector<Point> vertices_;
  std::vector<double> params_;
};

// max(sup_a dist(a,B), sup_b dist(b,A)).
inline double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptyInput, "hausdorff_distance of an empty set");
  auto directed = [](std::span<const Point> from, std::span<const Point> to) {
    double worst = 0.0;
    for (Point p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (Point q : to) {
        double d = std::norm(p - q);
        if (d < best) {
          best = d;
          if (best <= worst) break;  // cannot raise the running max
        }
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

// Andrew's monotone chain; returns the hull in counter-clockwise order.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  auto less = [](Point p, Point q) {
    return p.real() < q.real() || (p.real() == q.real() && p.imag() < q.imag());
  };
  std::sort(pts.begin(), pts.end(), less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](Point o, Point a, Point b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

inline double point_set_diameter(std::span<const Point> pts) {
  if (pts.size() < 2) return 0.0;
  std::vector<Point> hull = convex_hull({pts.begin(), pts.end()});
  double best = 0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, std::norm(hull[i] - hull[j]));
  return std::sqrt(best);
}

// Winding of a closed sampled loop around `about`: sum of principal argument
// increments over 2*pi. `max_step` receives the largest increment magnitude.
inline double winding_sum(std::span<const Point> loop, Point about, double* max_step = nullptr) {
  double total = 0, worst = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    Point a = loop[i] - about;
    Point b = loop[(i + 1) % loop.size()] - about;
    double step = std::arg(b / a);
    total += step;
    worst = std::max(worst, std::abs(step));
  }
  if (max_step) *max_step = worst;
  return total / kTwoPi;
}

// SplitMix64: small, fast, and bit-reproducible on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return std::size_t(uniform() * double(n)) % n; }

  // Uniform point of the disk B(c, r).
  Point in_disk(Point c, double r) {
    double rad = r * std::sqrt(uniform());
    return c + std::polar(rad, kTwoPi * uniform());
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng r(seed ^ (salt * 0xd1342543de82ef95ULL));
  return r.next();
}

}  // namespace stoilow
