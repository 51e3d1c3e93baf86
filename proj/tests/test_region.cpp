#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "stoilow/stoilow.hpp"

using namespace stoilow;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no stoilow::Error thrown";
  return ErrorCode::InvalidArgument;
}

const Grid kWide({-2, -2, 2, 2}, 0.01);

// Every member center maps into the target and every non-member center is
// farther than `slack` from it (cells on the rim may go either way).
void expect_disk_cover(const Grid& g, const std::vector<CellId>& cells, Point c, double radius) {
  std::set<CellId> in(cells.begin(), cells.end());
  const double slack = g.cell_size();
  for (CellId id = 0; id < g.size(); ++id) {
    double d = std::abs(g.center(id) - c);
    if (d < radius - slack) {
      EXPECT_TRUE(in.count(id)) << "missing cell at distance " << d;
    }
    if (d > radius + slack) {
      EXPECT_FALSE(in.count(id)) << "extra cell at distance " << d;
    }
  }
}

}  // namespace

TEST(Rasterize, Pow2DiskIsDiskOfSqrtRadius) {
  auto cells = rasterize_preimage(lookup_map("pow2").map, TargetSet::disk({0, 0}, 0.25), kWide);
  expect_disk_cover(kWide, cells, {0, 0}, 0.5);
}

TEST(Rasterize, IdentityDisk) {
  auto cells = rasterize_preimage(lookup_map("pow1").map, TargetSet::disk({1, 0}, 0.1), kWide);
  expect_disk_cover(kWide, cells, {1, 0}, 0.1);
}

TEST(Rasterize, QuadraticNearCriticalValue) {
  auto cells = rasterize_preimage(lookup_map("quadratic").map, TargetSet::disk({-1, 0}, 0.04), kWide);
  expect_disk_cover(kWide, cells, {0, 0}, 0.2);
}

TEST(Rasterize, GridOutsideDomain) {
  Grid g({-5, -5, 5, 5}, 0.1);
  EXPECT_EQ(code_of([&] { rasterize_preimage(lookup_map("pow2").map, TargetSet::disk({0, 0}, 1), g); }),
            ErrorCode::OutOfDomain);
}

TEST(Rasterize, TubeAroundSegment) {
  Grid g({-1, -1, 1, 1}, 0.02);
  auto cells = rasterize_preimage(lookup_map("pow1").map, TargetSet::tube({{-0.5, 0}, {0.5, 0}}, 0.1), g);
  for (CellId id : cells) EXPECT_LT(dist_to_segment(g.center(id), {-0.5, 0}, {0.5, 0}), 0.1 + g.cell_size());
  EXPECT_GT(cells.size(), 400u);
}

// Every true preimage point lies in a returned cell or a 4-neighbour of one.
// Targets are kept wide enough that their preimages span at least a cell;
// thinner slivers can slip between the five samples.
TEST(Rasterize, OverApproximatesAnalyticPreimage) {
  oracle::Gen gen(21);
  auto f = lookup_map("pow2").map;
  for (int trial = 0; trial < 20; ++trial) {
    Point c = gen.in_box(1.0);
    double r = gen.uniform(0.1, 0.3);
    Grid g({-1.5, -1.5, 1.5, 1.5}, gen.uniform(0.01, 0.04));
    auto cells = rasterize_preimage(f, TargetSet::disk(c, r), g);
    std::set<CellId> in(cells.begin(), cells.end());
    for (int i = 0; i < 400; ++i) {
      Point y = gen.in_disk(c, r * 0.999);
      for (Point z : oracle::kth_roots(y, 2)) {
        auto cell = g.locate(z);
        if (!cell) continue;
        bool near = in.count(g.id(*cell)) > 0;
        for (Cell d : Grid::kNeighbors) {
          Cell n{cell->col + d.col, cell->row + d.row};
          near = near || (g.in_range(n) && in.count(g.id(n)));
        }
        EXPECT_TRUE(near) << "preimage " << z << " of " << y << " not covered";
      }
    }
  }
}

TEST(ConnectedComponent, TwoBlobs) {
  Grid g({0, 0, 10, 10}, 1);
  std::vector<CellId> a{g.id({1, 1}), g.id({2, 1}), g.id({2, 2})};
  std::vector<CellId> b{g.id({6, 6}), g.id({6, 7})};
  std::vector<CellId> all = a;
  all.insert(all.end(), b.begin(), b.end());
  CellRegion r = connected_component(g, all, g.id({2, 2}));
  std::vector<CellId> want = a;
  std::sort(want.begin(), want.end());
  EXPECT_EQ(r.members(), want);
}

TEST(ConnectedComponent, DiagonalCellsAreNotConnected) {
  Grid g({0, 0, 4, 4}, 1);
  std::vector<CellId> cells{g.id({0, 0}), g.id({1, 1})};
  EXPECT_EQ(connected_component(g, cells, g.id({0, 0})).size(), 1u);
}

TEST(ConnectedComponent, Pow2SeparatesMirrorRegion) {
  auto cells = rasterize_preimage(lookup_map("pow2").map, TargetSet::disk({1, 0}, 0.04), kWide);
  CellRegion r = connected_component(kWide, cells, kWide.id(*kWide.locate({1, 0})));
  EXPECT_LT(r.size(), cells.size());
  for (Point p : r.centers()) {
    EXPECT_GT(p.real(), 0.9);
    EXPECT_LT(std::abs(p - Point(1, 0)), 0.03);
  }
}

TEST(ConnectedComponent, Singleton) {
  Grid g({0, 0, 3, 3}, 1);
  CellRegion r = connected_component(g, std::vector<CellId>{4}, 4);
  EXPECT_EQ(r.members(), std::vector<CellId>{4});
}

TEST(ConnectedComponent, SeedNotInSet) {
  Grid g({0, 0, 3, 3}, 1);
  EXPECT_EQ(code_of([&] { connected_component(g, std::vector<CellId>{1, 2}, 5); }), ErrorCode::SeedNotInSet);
}

TEST(ConnectedComponent, PreimageComponentMatchesRasterizeThenFlood) {
  auto f = lookup_map("cubic").map;
  Grid g({-2.5, -2.5, 2.5, 2.5}, 0.02);
  auto target = TargetSet::disk({-2, 0}, 0.3);
  Cell seed = *g.locate({1, 0});
  auto cells = rasterize_preimage(f, target, g);
  EXPECT_EQ(preimage_component(f, target, g, seed).members(), connected_component(g, cells, g.id(seed)).members());
}

// Union-find oracle for the partition property.
TEST(ConnectedComponents, PartitionOfRandomSets) {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    Grid g({0, 0, 30, 20}, 1);
    std::vector<CellId> cells;
    double p = gen.uniform(0.2, 0.7);
    for (CellId id = 0; id < g.size(); ++id)
      if (gen.uniform(0, 1) < p) cells.push_back(id);
    if (cells.empty()) continue;
    auto comps = connected_components(g, cells);

    std::vector<CellId> parent(g.size());
    for (CellId i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<CellId(CellId)> find = [&](CellId x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::set<CellId> in(cells.begin(), cells.end());
    for (CellId id : cells) {
      Cell c = g.cell(id);
      for (Cell n : {Cell{c.col + 1, c.row}, Cell{c.col, c.row + 1}})
        if (g.in_range(n) && in.count(g.id(n))) parent[find(id)] = find(g.id(n));
    }
    std::set<CellId> roots;
    for (CellId id : cells) roots.insert(find(id));
    ASSERT_EQ(comps.size(), roots.size());

    std::set<CellId> seen;
    for (const auto& comp : comps) {
      CellId root = find(comp.members().front());
      for (CellId id : comp.members()) {
        EXPECT_TRUE(seen.insert(id).second) << "cell in two components";
        EXPECT_EQ(find(id), root);
      }
    }
    EXPECT_EQ(seen, in);
  }
}

TEST(Boundary, DiskBoundaryNearCircle) {
  Grid g({-1.5, -1.5, 1.5, 1.5}, 0.01);
  std::vector<CellId> cells;
  for (CellId id = 0; id < g.size(); ++id)
    if (std::abs(g.center(id)) < 1) cells.push_back(id);
  CellRegion r(g, cells);
  auto pts = region_boundary(r);
  ASSERT_FALSE(pts.empty());
  for (Point p : pts) EXPECT_LT(std::abs(std::abs(p) - 1), g.cell_size());
}

TEST(Boundary, SingleCellHasFourEdgeMidpoints) {
  Grid g({0, 0, 3, 3}, 1);
  CellRegion r(g, {g.id({1, 1})});
  auto pts = region_boundary(r);
  std::vector<Point> want{{2, 1.5}, {1.5, 2}, {1, 1.5}, {1.5, 1}};
  EXPECT_EQ(pts, want);
}

TEST(Boundary, FullGridIsEmpty) {
  Grid g({0, 0, 4, 4}, 1);
  std::vector<CellId> all(g.size());
  for (CellId i = 0; i < all.size(); ++i) all[i] = i;
  EXPECT_TRUE(region_boundary(CellRegion(g, all)).empty());
  EXPECT_TRUE(boundary_cells(CellRegion(g, all)).empty());
}

TEST(Hausdorff, Examples) {
  std::vector<Point> zero{{0, 0}}, three{{3, 0}}, zero_one{{0, 0}, {1, 0}};
  EXPECT_DOUBLE_EQ(hausdorff_distance(zero, three), 3);
  EXPECT_DOUBLE_EQ(hausdorff_distance(zero_one, zero_one), 0);
  EXPECT_DOUBLE_EQ(hausdorff_distance(zero_one, zero), 1);
  EXPECT_DOUBLE_EQ(hausdorff_distance(zero, zero_one), 1);
  std::vector<Point> none;
  EXPECT_EQ(code_of([&] { hausdorff_distance(none, zero); }), ErrorCode::EmptyInput);
}

TEST(Hausdorff, SymmetricAndBruteForce) {
  oracle::Gen gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Point> a(std::size_t(gen.integer(1, 40))), b(std::size_t(gen.integer(1, 40)));
    for (auto& p : a) p = gen.in_box(2);
    for (auto& p : b) p = gen.in_box(2);
    double want = 0;
    for (auto [from, to] : {std::pair{&a, &b}, std::pair{&b, &a}})
      for (Point p : *from) {
        double best = 1e300;
        for (Point q : *to) best = std::min(best, std::abs(p - q));
        want = std::max(want, best);
      }
    EXPECT_NEAR(hausdorff_distance(a, b), want, 1e-12);
    EXPECT_EQ(hausdorff_distance(a, b), hausdorff_distance(b, a));
  }
}

// Padded diameter bounds the diameter of the union of the member squares.
TEST(Diameter, PaddingBoundsCoveredSet) {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 40; ++trial) {
    Grid g({0, 0, 5, 5}, gen.uniform(0.1, 0.5));
    std::vector<CellId> cells;
    int n = gen.integer(1, 12);
    for (int i = 0; i < n; ++i) cells.push_back(CellId(gen.integer(0, int(g.size()) - 1)));
    CellRegion r(g, cells);
    double corners = 0;
    for (CellId i : r.members())
      for (CellId j : r.members()) {
        Rect a = g.cell_rect(g.cell(i)), b = g.cell_rect(g.cell(j));
        for (Point p : {Point(a.x0, a.y0), Point(a.x1, a.y0), Point(a.x0, a.y1), Point(a.x1, a.y1)})
          for (Point q : {Point(b.x0, b.y0), Point(b.x1, b.y0), Point(b.x0, b.y1), Point(b.x1, b.y1)})
            corners = std::max(corners, std::abs(p - q));
      }
    EXPECT_GE(r.diameter() + 1e-12, corners);
  }
}

TEST(Diameter, ApproachesTrueDiameterUnderRefinement) {
  auto f = lookup_map("pow2").map;
  double prev = 1e300;
  for (double h : {0.04, 0.02, 0.01, 0.005}) {
    Grid g({-1, -1, 1, 1}, h);
    CellRegion r = preimage_component(f, TargetSet::disk({0, 0}, 0.25), g, *g.locate({0, 0}));
    double d = r.diameter();
    EXPECT_GE(d, 1.0 - 2 * h);  // true set is B(0, 0.5)
    EXPECT_LE(d, prev + 1e-12);
    prev = d;
  }
}

// Regions more than 2h apart at resolution h stay apart at h/2.
TEST(Refinement, HalvingNeverMergesSeparatedRegions) {
  struct Case {
    const char* map;
    Point c;
    double r;
  };
  for (Case cs : {Case{"pow2", {1, 0}, 0.3}, Case{"pow3", {0.5, 0.2}, 0.2}, Case{"cubic", {0, 0}, 1.0},
                  Case{"quadratic", {0.2, 0}, 0.3}, Case{"winding2", {0, 0.6}, 0.2}}) {
    auto f = lookup_map(cs.map).map;
    for (double h : {0.04, 0.02}) {
      Grid coarse({-2, -2, 2, 2}, h), fine({-2, -2, 2, 2}, h / 2);
      auto ccomps = connected_components(coarse, rasterize_preimage(f, TargetSet::disk(cs.c, cs.r), coarse));
      auto fcells = rasterize_preimage(f, TargetSet::disk(cs.c, cs.r), fine);
      auto fcomps = connected_components(fine, fcells);
      auto owner = [&](Point p) -> int {
        auto cell = fine.locate(p);
        for (std::size_t i = 0; i < fcomps.size(); ++i)
          if (cell && fcomps[i].contains(fine.id(*cell))) return int(i);
        return -1;
      };
      for (std::size_t i = 0; i < ccomps.size(); ++i)
        for (std::size_t j = i + 1; j < ccomps.size(); ++j) {
          double gap = 1e300;
          for (Point p : ccomps[i].centers())
            for (Point q : ccomps[j].centers()) gap = std::min(gap, std::abs(p - q));
          if (gap <= 2 * h) continue;
          // fine cells inside a coarse component's cells
          int oi = -1, oj = -1;
          for (Point p : ccomps[i].centers())
            if ((oi = owner(p)) >= 0) break;
          for (Point p : ccomps[j].centers())
            if ((oj = owner(p)) >= 0) break;
          if (oi < 0 || oj < 0) continue;
          EXPECT_NE(oi, oj) << cs.map << " h=" << h;
        }
    }
  }
}

TEST(Polyline, EvaluationAndValidation) {
  Polyline p({{0, 0}, {1, 0}, {1, 1}}, {0, 0.5, 1});
  EXPECT_EQ(p.at(0.25), Point(0.5, 0));
  EXPECT_EQ(p.at(0.75), Point(1, 0.5));
  EXPECT_EQ(p.at(1), Point(1, 1));
  EXPECT_EQ(code_of([] { Polyline({{0, 0}}, {0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { Polyline({{0, 0}, {1, 1}}, {0, 0.5}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { Polyline({{0, 0}, {1, 1}, {2, 2}}, {0, 0.7, 0.6}); }), ErrorCode::InvalidArgument);
}

TEST(GridLocate, SharedEdgesGoToSmallerIndex) {
  Grid g({0, 0, 4, 4}, 1);
  EXPECT_EQ(*g.locate({1, 0.5}), (Cell{0, 0}));
  EXPECT_EQ(*g.locate({0.5, 1}), (Cell{0, 0}));
  EXPECT_EQ(*g.locate({2, 2}), (Cell{1, 1}));
  EXPECT_EQ(*g.locate({0, 0}), (Cell{0, 0}));
  EXPECT_FALSE(g.locate({5, 0}).has_value());
}
