#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's algorithms; random inputs come from std::mt19937_64 so the
// generators do not share code with the library's own RNG.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;

// Horner, coefficients lowest degree first.
inline C horner(const std::vector<C>& a, C z) {
  C s = 0;
  for (std::size_t i = a.size(); i-- > 0;) s = s * z + a[i];
  return s;
}

inline std::vector<C> derivative(const std::vector<C>& a) {
  std::vector<C> d;
  for (std::size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * double(i));
  if (d.empty()) d.push_back(0);
  return d;
}

// Durand-Kerner (Weierstrass) iteration for all roots of a polynomial,
// followed by a few Newton polish steps.
inline std::vector<C> roots(std::vector<C> a) {
  while (a.size() > 1 && std::abs(a.back()) == 0) a.pop_back();
  const std::size_t n = a.size() - 1;
  if (n == 0) return {};
  for (C& c : a) c /= a.back();
  std::vector<C> z(n);
  const C seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, double(i));
  for (int it = 0; it < 2000; ++it) {
    double move = 0;
    for (std::size_t i = 0; i < n; ++i) {
      C den = 1;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      C step = horner(a, z[i]) / den;
      z[i] -= step;
      move = std::max(move, std::abs(step));
    }
    if (move < 1e-15) break;
  }
  auto d = derivative(a);
  for (C& r : z)
    for (int it = 0; it < 5; ++it) {
      C dp = horner(d, r);
      if (std::abs(dp) < 1e-300) break;
      r -= horner(a, r) / dp;
    }
  std::sort(z.begin(), z.end(), [](C p, C q) { return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag(); });
  return z;
}

// Roots of p(z) = y.
inline std::vector<C> polynomial_preimages(std::vector<C> a, C y) {
  a[0] -= y;
  return roots(a);
}

// 1 + order of vanishing of p' at z (checked by successive derivatives).
inline int holomorphic_local_degree(const std::vector<C>& a, C z, double eps = 1e-9) {
  std::vector<C> d = derivative(a);
  int k = 1;
  while (std::abs(horner(d, z)) < eps && d.size() > 1) {
    d = derivative(d);
    ++k;
  }
  return k;
}

// Square root continued along a sampled path from the branch nearest `start`.
inline std::vector<C> continued_sqrt(const std::vector<C>& path, C start) {
  std::vector<C> out;
  C prev = start;
  for (C w : path) {
    C r = std::sqrt(w);
    prev = std::abs(r - prev) <= std::abs(-r - prev) ? r : -r;
    out.push_back(prev);
  }
  return out;
}

inline std::vector<C> kth_roots(C y, int k) {
  std::vector<C> out;
  double m = std::pow(std::abs(y), 1.0 / k), a = std::arg(y);
  for (int j = 0; j < k; ++j) out.push_back(std::polar(m, (a + 2 * std::numbers::pi * j) / k));
  return out;
}

// Preimages of y under W(z) = z^2/|z|: |z| = |y|, 2 arg z = arg y.
inline std::vector<C> winding_preimages(C y) {
  if (y == C(0)) return {C(0)};
  double m = std::abs(y), a = std::arg(y) / 2;
  return {std::polar(m, a), std::polar(m, a + std::numbers::pi)};
}

// Brute-force preimages of y in a box: dense lattice scan for local minima of
// |f - y|, each refined by shrinking pattern search. Slow; tests only.
inline std::vector<C> brute_force_preimages(const std::function<C(C)>& f, C y, double x0, double y0, double x1,
                                            double y1, int n = 400, double accept = 1e-7) {
  std::vector<C> found;
  const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
  auto val = [&](int i, int j) { return std::abs(f(C(x0 + i * hx, y0 + j * hy)) - y); };
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      double v = val(i, j);
      bool local_min = true;
      for (int di = -1; di <= 1 && local_min; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && val(i + di, j + dj) < v) {
            local_min = false;
            break;
          }
      if (!local_min) continue;
      C z(x0 + i * hx, y0 + j * hy);
      double best = v, step = hx;
      while (step > 1e-14) {
        bool moved = false;
        for (C d : {C(step, 0), C(-step, 0), C(0, step), C(0, -step)}) {
          double t = std::abs(f(z + d) - y);
          if (t < best) {
            best = t;
            z += d;
            moved = true;
          }
        }
        if (!moved) step *= 0.5;
      }
      if (best > accept) continue;
      bool dup = false;
      for (C q : found) dup = dup || std::abs(q - z) < 4 * std::max(hx, hy);
      if (!dup) found.push_back(z);
    }
  return found;
}

// Seeded generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  C in_box(double half) { return {uniform(-half, half), uniform(-half, half)}; }
  C in_disk(C c, double r) {
    double rad = r * std::sqrt(uniform(0, 1)), th = uniform(0, 2 * std::numbers::pi);
    return c + std::polar(rad, th);
  }
  C unit() { return std::polar(1.0, uniform(0, 2 * std::numbers::pi)); }

 private:
  std::mt19937_64 rng_;
};

// Minimum over permutations is overkill; greedy nearest matching suffices for
// well separated point sets. Returns the worst matched distance, or infinity
// when the sizes differ.
inline double match_distance(std::vector<C> a, std::vector<C> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0;
  for (C p : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](C u, C v) { return std::abs(u - p) < std::abs(v - p); });
    worst = std::max(worst, std::abs(*it - p));
    b.erase(it);
  }
  return worst;
}

}  // namespace oracle
