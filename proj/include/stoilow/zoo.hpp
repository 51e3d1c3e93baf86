#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stoilow/error.hpp"
#include "stoilow/geometry.hpp"
#include "stoilow/planar_map.hpp"

namespace stoilow {

struct BranchTruth {
  Point location;
  int degree = 1;
};

// Analytic facts about a zoo map, used as test oracles and CLI metadata.
struct GroundTruth {
  std::vector<BranchTruth> branch_points;
  std::vector<Point> critical_values;
  bool holomorphic = false;
  // Polynomial coefficients, lowest degree first, when the map is a polynomial.
  std::vector<Point> coefficients;
  // All preimages of y in the domain, when a closed form exists.
  std::function<std::vector<Point>(Point)> preimages;
};

struct ZooEntry {
  PlanarMap map;
  GroundTruth truth;
};

inline constexpr double kZooHalfSide = 4.0;

inline DomainSpec zoo_domain() { return DomainSpec::rectangle(Rect::centered({0, 0}, kZooHalfSide)); }

inline Point ipow(Point z, int k) {
  Point out{1, 0};
  for (int i = 0; i < k; ++i) out *= z;
  return out;
}

// All k-th roots of y, starting from the principal one.
inline std::vector<Point> kth_roots(Point y, int k) {
  std::vector<Point> out;
  if (y == Point{0, 0}) return {Point{0, 0}};
  double m = std::pow(std::abs(y), 1.0 / k);
  double a = std::arg(y) / k;
  for (int j = 0; j < k; ++j) out.push_back(std::polar(m, a + kTwoPi * j / k));
  return out;
}

inline ZooEntry make_power(int k) {
  GroundTruth t;
  t.holomorphic = true;
  t.coefficients.assign(std::size_t(k) + 1, Point{0, 0});
  t.coefficients.back() = 1;
  if (k >= 2) {
    t.branch_points.push_back({{0, 0}, k});
    t.critical_values.push_back({0, 0});
  }
  t.preimages = [k](Point y) { return kth_roots(y, k); };
  double lip = k * std::pow(kZooHalfSide * std::numbers::sqrt2, k - 1);
  return {PlanarMap("pow" + std::to_string(k), zoo_domain(), [k](Point z) { return ipow(z, k); }, {}, lip),
          std::move(t)};
}

inline ZooEntry make_quadratic() {
  GroundTruth t;
  t.holomorphic = true;
  t.coefficients = {-1, 0, 1};
  t.branch_points.push_back({{0, 0}, 2});
  t.critical_values.push_back({-1, 0});
  t.preimages = [](Point y) {
    Point s = std::sqrt(y + 1.0);
    if (s == Point{0, 0}) return std::vector<Point>{s};
    return std::vector<Point>{s, -s};
  };
  return {PlanarMap("quadratic", zoo_domain(), [](Point z) { return z * z - 1.0; }, {},
                    2 * kZooHalfSide * std::numbers::sqrt2),
          std::move(t)};
}

inline ZooEntry make_cubic() {
  GroundTruth t;
  t.holomorphic = true;
  t.coefficients = {0, -3, 0, 1};
  t.branch_points = {{{-1, 0}, 2}, {{1, 0}, 2}};
  t.critical_values = {{2, 0}, {-2, 0}};
  return {PlanarMap("cubic", zoo_domain(), [](Point z) { return z * z * z - 3.0 * z; }, {},
                    3 * 2 * kZooHalfSide * kZooHalfSide + 3),
          std::move(t)};
}

// W(z) = z^2/|z|: modulus kept, argument doubled. Light, open, not holomorphic.
inline ZooEntry make_winding2() {
  GroundTruth t;
  t.branch_points.push_back({{0, 0}, 2});
  t.critical_values.push_back({0, 0});
  t.preimages = [](Point y) {
    double m = std::abs(y);
    if (m == 0.0) return std::vector<Point>{Point{0, 0}};
    Point z = std::polar(m, 0.5 * std::arg(y));
    return std::vector<Point>{z, -z};
  };
  auto fn = [](Point z) {
    double m = std::abs(z);
    return m == 0.0 ? Point{0, 0} : z * z / m;
  };
  return {PlanarMap("winding2", zoo_domain(), fn, {}, 2.0), std::move(t)};
}

// Deliberately irregular maps for the hypothesis checks.
inline ZooEntry make_abs() {
  Claims c{.light = false, .open = false, .discrete = false};
  return {PlanarMap("abs", zoo_domain(), [](Point z) { return Point{std::abs(z), 0}; }, c, 1.0), {}};
}

inline ZooEntry make_re() {
  Claims c{.light = false, .open = false, .discrete = false};
  return {PlanarMap("re", zoo_domain(), [](Point z) { return Point{z.real(), 0}; }, c, 1.0), {}};
}

inline ZooEntry make_pow2_shear() {
  ZooEntry base = make_power(2);
  Homeomorphism h = shear(0.5);
  GroundTruth t;
  t.branch_points.push_back({h.inverse({0, 0}), 2});
  t.critical_values.push_back({0, 0});
  t.preimages = [inv = h.inverse](Point y) {
    std::vector<Point> out;
    for (Point w : kth_roots(y, 2)) out.push_back(inv(w));
    return out;
  };
  PlanarMap m = compose(identity_homeomorphism(), base.map, h);
  return {PlanarMap("pow2_shear", m.domain(), [m](Point z) { return m(z); }), std::move(t)};
}

// Bilinear interpolation of node samples on a uniform nx-by-ny lattice over
// [x0,x1] x [y0,y1]. Values are stored row-major, rows by increasing y.
class SampledField {
 public:
  SampledField(int nx, int ny, Rect bounds, std::vector<Point> values)
      : nx_(nx), ny_(ny), bounds_(bounds), values_(std::move(values)) {
    if (nx < 2 || ny < 2) fail(ErrorCode::InvalidArgument, "sampled map needs at least 2x2 nodes");
    if (!bounds.valid()) fail(ErrorCode::InvalidArgument, "sampled map bounds must have positive area");
    if (values_.size() != std::size_t(nx) * std::size_t(ny))
      fail(ErrorCode::InvalidArgument, "sampled map value count does not match nx*ny");
  }

  Point operator()(Point z) const {
    double u = (z.real() - bounds_.x0) / bounds_.width() * (nx_ - 1);
    double v = (z.imag() - bounds_.y0) / bounds_.height() * (ny_ - 1);
    int i = std::clamp(int(std::floor(u)), 0, nx_ - 2);
    int j = std::clamp(int(std::floor(v)), 0, ny_ - 2);
    double a = std::clamp(u - i, 0.0, 1.0), b = std::clamp(v - j, 0.0, 1.0);
    auto at = [&](int ii, int jj) { return values_[std::size_t(jj) * std::size_t(nx_) + std::size_t(ii)]; };
    return (1 - b) * ((1 - a) * at(i, j) + a * at(i + 1, j)) + b * ((1 - a) * at(i, j + 1) + a * at(i + 1, j + 1));
  }

  const Rect& bounds() const { return bounds_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

 private:
  int nx_, ny_;
  Rect bounds_;
  std::vector<Point> values_;
};

inline SampledField parse_sampled_field(std::istream& in, const std::string& source = "<stream>") {
  auto where = [&](int line) { return source + ":" + std::to_string(line) + ": "; };
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream head(text);
  std::string tag;
  int nx = 0, ny = 0;
  double x0, y0, x1, y1;
  if (!(head >> tag >> nx >> ny >> x0 >> y0 >> x1 >> y1) || tag != "grid")
    fail(ErrorCode::ParseError, where(line_no) + "expected header 'grid <nx> <ny> <x0> <y0> <x1> <y1>'");
  if (nx < 2 || ny < 2) fail(ErrorCode::ParseError, where(line_no) + "nx and ny must be at least 2");
  std::vector<Point> values;
  values.reserve(std::size_t(nx) * std::size_t(ny));
  while (values.size() < std::size_t(nx) * std::size_t(ny) && std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(text);
    double re, im;
    if (!(row >> re >> im) || !std::isfinite(re) || !std::isfinite(im))
      fail(ErrorCode::ParseError, where(line_no) + "expected a finite 're im' pair");
    values.emplace_back(re, im);
  }
  if (values.size() != std::size_t(nx) * std::size_t(ny))
    fail(ErrorCode::ParseError, where(line_no) + "file ends after " + std::to_string(values.size()) +
                                    " of " + std::to_string(nx * ny) + " samples");
  return SampledField(nx, ny, {x0, y0, x1, y1}, std::move(values));
}

inline ZooEntry load_sampled(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open sampled map " + path);
  auto field = std::make_shared<SampledField>(parse_sampled_field(in, path));
  Rect b = field->bounds();
  return {PlanarMap("sampled:" + path, DomainSpec::rectangle(b), [field](Point z) { return (*field)(z); }), {}};
}

// Writes map samples in the format load_sampled reads.
inline void write_sampled(std::ostream& out, const PlanarMap& map, int nx, int ny, Rect bounds) {
  out << "grid " << nx << ' ' << ny << ' ' << bounds.x0 << ' ' << bounds.y0 << ' ' << bounds.x1 << ' '
      << bounds.y1 << '\n';
  out.precision(17);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Point z{bounds.x0 + bounds.width() * i / (nx - 1), bounds.y0 + bounds.height() * j / (ny - 1)};
      Point w = map(z);
      out << w.real() << ' ' << w.imag() << '\n';
    }
}

inline std::vector<ZooEntry> zoo() {
  std::vector<ZooEntry> out;
  for (int k = 1; k <= 6; ++k) out.push_back(make_power(k));
  out.push_back(make_quadratic());
  out.push_back(make_cubic());
  out.push_back(make_winding2());
  out.push_back(make_abs());
  out.push_back(make_re());
  out.push_back(make_pow2_shear());
  return out;
}

inline Homeomorphism homeomorphism_by_name(const std::string& name) {
  if (name == "id" || name.empty()) return identity_homeomorphism();
  if (name == "shear") return shear(0.5);
  if (name == "stretch") return radial_stretch();
  if (name == "conj") return conjugation();
  fail(ErrorCode::InvalidArgument, "unknown homeomorphism '" + name + "' (id, shear, stretch, conj)");
}

// Resolves a map identifier: a zoo label or "sampled:<path>".
inline ZooEntry lookup_map(const std::string& id) {
  if (id.rfind("sampled:", 0) == 0) return load_sampled(id.substr(8));
  for (ZooEntry& e : zoo())
    if (e.map.label() == id) return e;
  fail(ErrorCode::InvalidArgument, "unknown map '" + id + "'");
}

// Zoo lookup followed by post o f o pre. Ground truth is dropped unless both
// homeomorphisms are the identity.
inline ZooEntry lookup_map(const std::string& id, const std::string& pre, const std::string& post) {
  ZooEntry e = lookup_map(id);
  Homeomorphism hpre = homeomorphism_by_name(pre), hpost = homeomorphism_by_name(post);
  if (hpre.label == "id" && hpost.label == "id") return e;
  return {compose(hpost, e.map, hpre), {}};
}

}  // namespace stoilow
