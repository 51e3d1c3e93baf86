#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"

namespace stoilow {

// The domain of a planar map: a closed rectangle or a closed disk.
class DomainSpec {
 public:
  enum class Shape { Rectangle, Disk };

  static DomainSpec rectangle(Rect r) {
    if (!r.valid()) fail(ErrorCode::InvalidArgument, "rectangle domain needs positive width and height");
    DomainSpec d;
    d.shape_ = Shape::Rectangle;
    d.rect_ = r;
    return d;
  }
  static DomainSpec disk(Point center, double radius) {
    if (!(radius > 0)) fail(ErrorCode::InvalidArgument, "disk domain needs a positive radius");
    DomainSpec d;
    d.shape_ = Shape::Disk;
    d.center_ = center;
    d.radius_ = radius;
    d.rect_ = Rect::centered(center, radius);
    return d;
  }

  Shape shape() const { return shape_; }
  Point center() const { return shape_ == Shape::Disk ? center_ : rect_.center(); }
  double radius() const { return radius_; }
  const Rect& bounding_box() const { return rect_; }

  bool contains(Point z) const {
    if (shape_ == Shape::Rectangle) return rect_.contains(z);
    return std::abs(z - center_) <= radius_;
  }
  bool contains(const Rect& r) const {
    if (shape_ == Shape::Rectangle) return rect_.contains(r);
    for (Point c : {Point{r.x0, r.y0}, Point{r.x1, r.y0}, Point{r.x0, r.y1}, Point{r.x1, r.y1}})
      if (!contains(c)) return false;
    return true;
  }

 private:
  Shape shape_ = Shape::Rectangle;
  Rect rect_{};
  Point center_{};
  double radius_ = 0;
};

// Regularity claims a map is declared to satisfy. They are not checked on
// construction; see check_regularity for a heuristic probe.
struct Claims {
  bool light = true;
  bool open = true;
  bool discrete = true;
};

// An evaluable continuous map from a planar domain into the plane. Immutable
// after construction and cheap to copy (the function object is shared).
class PlanarMap {
 public:
  using Fn = std::function<Point(Point)>;

  PlanarMap(std::string label, DomainSpec domain, Fn fn, Claims claims = {},
            std::optional<double> lipschitz_hint = std::nullopt)
      : label_(std::move(label)),
        domain_(domain),
        fn_(std::make_shared<const Fn>(std::move(fn))),
        claims_(claims),
        lipschitz_hint_(lipschitz_hint) {
    if (lipschitz_hint_ && !(*lipschitz_hint_ > 0))
      fail(ErrorCode::InvalidArgument, "lipschitz hint must be positive");
  }

  const std::string& label() const { return label_; }
  const DomainSpec& domain() const { return domain_; }
  const Claims& claims() const { return claims_; }
  std::optional<double> lipschitz_hint() const { return lipschitz_hint_; }

  // No domain check; callers guarantee z lies in the domain.
  Point operator()(Point z) const { return (*fn_)(z); }

  Point evaluate(Point z) const {
    if (!domain_.contains(z)) {
      std::ostringstream os;
      os << "point (" << z.real() << ", " << z.imag() << ") outside the domain of " << label_;
      fail(ErrorCode::OutOfDomain, os.str());
    }
    return (*fn_)(z);
  }

 private:
  std::string label_;
  DomainSpec domain_;
  std::shared_ptr<const Fn> fn_;
  Claims claims_;
  std::optional<double> lipschitz_hint_;
};

inline Point evaluate(const PlanarMap& map, Point z) { return map.evaluate(z); }

// A homeomorphism of the plane used to pre- or post-compose zoo maps.
struct Homeomorphism {
  std::string label;
  PlanarMap::Fn forward;
  PlanarMap::Fn inverse;
  int orientation = 1;  // +1 preserving, -1 reversing

  Point operator()(Point z) const { return forward(z); }
};

inline Homeomorphism identity_homeomorphism() {
  return {"id", [](Point z) { return z; }, [](Point z) { return z; }, 1};
}

// (x, y) -> (x + c*y, y)
inline Homeomorphism shear(double c = 0.5) {
  std::ostringstream os;
  os << "shear(" << c << ")";
  return {os.str(),
          [c](Point z) { return Point{z.real() + c * z.imag(), z.imag()}; },
          [c](Point z) { return Point{z.real() - c * z.imag(), z.imag()}; }, 1};
}

// z -> z (1 + |z|) / 2; inverse solves s(1+s)/2 = |w| for s = |z|.
inline Homeomorphism radial_stretch() {
  return {"stretch",
          [](Point z) { return z * (1.0 + std::abs(z)) / 2.0; },
          [](Point w) {
            double m = std::abs(w);
            if (m == 0.0) return Point{0, 0};
            double s = (-1.0 + std::sqrt(1.0 + 8.0 * m)) / 2.0;
            return w * (s / m);
          },
          1};
}

inline Homeomorphism conjugation() {
  return {"conj", [](Point z) { return std::conj(z); }, [](Point z) { return std::conj(z); }, -1};
}

// Largest centered rectangle R with pre(R) inside `target`, found by bisection
// on the half-size while checking the image of R's boundary. Valid because pre
// is a homeomorphism and both domain shapes are convex.
inline DomainSpec pulled_back_domain(const DomainSpec& target, const Homeomorphism& pre) {
  const Rect& box = target.bounding_box();
  Point c = pre.inverse(target.center());
  auto fits = [&](double s) {
    Rect r = Rect::centered(c, s);
    const int n = 256;
    for (int i = 0; i < n; ++i) {
      double u = double(i) / n;
      Point pts[4] = {{r.x0 + u * r.width(), r.y0}, {r.x1, r.y0 + u * r.height()},
                      {r.x1 - u * r.width(), r.y1}, {r.x0, r.y1 - u * r.height()}};
      for (Point p : pts)
        if (!target.contains(pre.forward(p))) return false;
    }
    return true;
  };
  double lo = 0, hi = 4.0 * std::max(box.width(), box.height());
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  return DomainSpec::rectangle(Rect::centered(c, lo));
}

// post o f o pre, evaluated exactly as written.
inline PlanarMap compose(const Homeomorphism& post, const PlanarMap& f, const Homeomorphism& pre) {
  DomainSpec dom = pre.label == "id" ? f.domain() : pulled_back_domain(f.domain(), pre);
  std::string label = f.label();
  if (pre.label != "id") label = label + "∘" + pre.label;
  if (post.label != "id") label = post.label + "∘" + label;
  auto fn = [post = post.forward, f, pre = pre.forward](Point z) { return post(f(pre(z))); };
  // Hints do not survive composition with an arbitrary homeomorphism.
  return PlanarMap(label, dom, fn, f.claims(), std::nullopt);
}

}  // namespace stoilow
