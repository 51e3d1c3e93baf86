#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "stoilow/geometry.hpp"
#include "stoilow/planar_map.hpp"

namespace stoilow {

// One pass of the discrete winding count of f(z + rho e^{i theta}) - f(z).
struct LoopWinding {
  double turns = 0;        // raw sum of increments / 2pi
  double max_step = 0;     // largest |increment|
  double min_gap = 0;      // min |f(loop) - f(z)|
  double max_gap = 0;      // max |f(loop) - f(z)|
  int samples = 0;
};

inline LoopWinding loop_winding(const PlanarMap& map, Point z, double rho, int samples) {
  Point fz = map(z);
  std::vector<Point> loop(static_cast<std::size_t>(samples));
  LoopWinding out;
  out.samples = samples;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < samples; ++j) {
    Point w = map(z + std::polar(rho, kTwoPi * j / samples)) - fz;
    loop[std::size_t(j)] = w;
    out.min_gap = std::min(out.min_gap, std::abs(w));
    out.max_gap = std::max(out.max_gap, std::abs(w));
  }
  out.turns = winding_sum(loop, {0, 0}, &out.max_step);
  return out;
}

// Doubles the sample count from `start` until two consecutive counts agree
// and every increment is below pi/2. Failure is reported through the
// flags when the loop degenerates or doubling runs past max_samples.
struct StableWinding {
  long degree = 0;
  LoopWinding last;
  bool resolved = false;
  bool degenerate = false;
};

inline StableWinding stable_winding(const PlanarMap& map, Point z, double rho, int start = 64,
                                    int max_samples = 1 << 16, double gap_rel = 1e-9) {
  StableWinding out;
  long previous = std::numeric_limits<long>::min();
  for (int n = start; n <= max_samples; n *= 2) {
    LoopWinding w = loop_winding(map, z, rho, n);
    out.last = w;
    if (!(w.max_gap > 0) || w.min_gap <= gap_rel * w.max_gap) {
      out.degenerate = true;
      return out;
    }
    long k = std::lround(w.turns);
    if (w.max_step < kPi / 2 && k == previous) {
      out.degree = k;
      out.resolved = true;
      return out;
    }
    previous = w.max_step < kPi / 2 ? k : std::numeric_limits<long>::min();
  }
  return out;
}

}  // namespace stoilow
