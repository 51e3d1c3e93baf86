#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stoilow/geometry.hpp"
#include "stoilow/region.hpp"

namespace stoilow::io {

// Fixed-precision coordinates keep SVG output byte-stable.
inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.5f", v == 0 ? 0.0 : v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Closed boundary loops of a cell union, as lattice-vertex polygons with
// collinear runs merged. Deterministic: loops start at the smallest unused
// vertex and turn by the first stored edge.
inline std::vector<std::vector<Point>> region_loops(const CellRegion& region) {
  const Grid& g = region.grid();
  using V = std::pair<int, int>;
  std::map<V, std::vector<V>> out;
  for (CellId id : region.members()) {
    Cell c = g.cell(id);
    int x = c.col, y = c.row;
    if (!region.contains(Cell{x, y - 1})) out[{x, y}].push_back({x + 1, y});
    if (!region.contains(Cell{x + 1, y})) out[{x + 1, y}].push_back({x + 1, y + 1});
    if (!region.contains(Cell{x, y + 1})) out[{x + 1, y + 1}].push_back({x, y + 1});
    if (!region.contains(Cell{x - 1, y})) out[{x, y + 1}].push_back({x, y});
  }
  const Rect& b = g.bounds();
  const double h = g.cell_size();
  auto world = [&](V v) { return Point{b.x0 + v.first * h, b.y0 + v.second * h}; };
  std::vector<std::vector<Point>> loops;
  for (auto& [start, ends] : out) {
    while (!ends.empty()) {
      std::vector<V> loop{start};
      V at = start;
      for (;;) {
        auto& next = out[at];
        V to = next.front();
        next.erase(next.begin());
        if (to == start) break;
        loop.push_back(to);
        at = to;
      }
      std::vector<Point> merged;
      const std::size_t n = loop.size();
      for (std::size_t i = 0; i < n; ++i) {
        V p = loop[(i + n - 1) % n], q = loop[i], r = loop[(i + 1) % n];
        bool straight = (q.first - p.first) * (r.second - q.second) == (q.second - p.second) * (r.first - q.first);
        if (!straight) merged.push_back(world(q));
      }
      if (merged.empty()) merged.push_back(world(loop.front()));
      loops.push_back(std::move(merged));
    }
  }
  return loops;
}

class SvgPanel {
 public:
  SvgPanel(Rect world, double ox, double oy, double size, std::string* body)
      : world_(world), ox_(ox), oy_(oy), size_(size), body_(body) {
    double span = std::max(world.width(), world.height());
    scale_ = size / span;
    cx_ = world.center();
  }

  double px(double wx) const { return ox_ + 0.5 * size_ + (wx - cx_.real()) * scale_; }
  double py(double wy) const { return oy_ + 0.5 * size_ - (wy - cx_.imag()) * scale_; }
  double len(double w) const { return w * scale_; }

  void frame(const std::string& title) {
    *body_ += "<rect x=\"" + fmt(ox_) + "\" y=\"" + fmt(oy_) + "\" width=\"" + fmt(size_) + "\" height=\"" +
              fmt(size_) + "\" fill=\"#fafafa\" stroke=\"#999\"/>\n";
    *body_ += "<text x=\"" + fmt(ox_ + 4) + "\" y=\"" + fmt(oy_ - 6) + "\" font-size=\"12\">" + escape(title) +
              "</text>\n";
  }

  void region(const CellRegion& r, const std::string& fill, const std::string& stroke = "none") {
    std::string d;
    for (const auto& loop : region_loops(r)) {
      for (std::size_t i = 0; i < loop.size(); ++i)
        d += (i ? "L" : "M") + fmt(px(loop[i].real())) + " " + fmt(py(loop[i].imag())) + " ";
      d += "Z ";
    }
    if (d.empty()) return;
    d.pop_back();
    *body_ += "<path d=\"" + d + "\" fill=\"" + fill + "\" fill-rule=\"evenodd\" stroke=\"" + stroke + "\"/>\n";
  }

  void polyline(const std::vector<Point>& pts, const std::string& stroke, double width = 1.5, bool closed = false) {
    if (pts.empty()) return;
    std::string s;
    for (Point p : pts) s += fmt(px(p.real())) + "," + fmt(py(p.imag())) + " ";
    s.pop_back();
    *body_ += std::string(closed ? "<polygon" : "<polyline") + " points=\"" + s + "\" fill=\"none\" stroke=\"" +
              stroke + "\" stroke-width=\"" + fmt(width) + "\"/>\n";
  }

  void circle(Point c, double r, const std::string& stroke, const std::string& fill = "none", double width = 1.0) {
    *body_ += "<circle cx=\"" + fmt(px(c.real())) + "\" cy=\"" + fmt(py(c.imag())) + "\" r=\"" + fmt(len(r)) +
              "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) + "\"/>\n";
  }

  // Marker with a fixed pixel radius.
  void dot(Point c, double pixels, const std::string& fill) {
    *body_ += "<circle cx=\"" + fmt(px(c.real())) + "\" cy=\"" + fmt(py(c.imag())) + "\" r=\"" + fmt(pixels) +
              "\" fill=\"" + fill + "\"/>\n";
  }

  void box(const Rect& r, const std::string& stroke) {
    *body_ += "<rect x=\"" + fmt(px(r.x0)) + "\" y=\"" + fmt(py(r.y1)) + "\" width=\"" + fmt(len(r.width())) +
              "\" height=\"" + fmt(len(r.height())) + "\" fill=\"none\" stroke=\"" + stroke +
              "\" stroke-dasharray=\"4 3\"/>\n";
  }

  void label(Point p, const std::string& text, double dx = 6, double dy = -6) {
    *body_ += "<text x=\"" + fmt(px(p.real()) + dx) + "\" y=\"" + fmt(py(p.imag()) + dy) + "\" font-size=\"11\">" +
              escape(text) + "</text>\n";
  }

 private:
  Rect world_;
  double ox_, oy_, size_;
  double scale_ = 1;
  Point cx_;
  std::string* body_;
};

// Side-by-side square panels of equal pixel size.
class SvgDocument {
 public:
  static constexpr double kPanel = 360, kMargin = 28;

  explicit SvgDocument(std::string title) : title_(std::move(title)) {}

  SvgPanel panel(const Rect& world, const std::string& title) {
    double ox = kMargin + double(panels_) * (kPanel + kMargin);
    ++panels_;
    SvgPanel p(world, ox, 2 * kMargin, kPanel, &body_);
    p.frame(title);
    return p;
  }

  std::string str() const {
    double w = kMargin + double(std::max(panels_, 1)) * (kPanel + kMargin);
    double h = kPanel + 3 * kMargin;
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " +
         fmt(w) + " " + fmt(h) + "\" font-family=\"sans-serif\">\n";
    s += "<text x=\"" + fmt(kMargin) + "\" y=\"" + fmt(kMargin) + "\" font-size=\"14\">" + escape(title_) + "</text>\n";
    s += body_;
    s += "</svg>\n";
    return s;
  }

 private:
  std::string title_;
  std::string body_;
  int panels_ = 0;
};

// Square world window around a rectangle, padded by `pad` of its larger side.
inline Rect window(const Rect& r, double pad = 0.08) {
  double side = std::max(r.width(), r.height()) * (1 + 2 * pad);
  return Rect::centered(r.center(), 0.5 * side);
}

}  // namespace stoilow::io
