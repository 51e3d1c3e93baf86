#include <gtest/gtest.h>

#include <bit>
#include <filesystem>
#include <fstream>
#include <sstream>

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

}  // namespace

TEST(Evaluate, Examples) {
  EXPECT_EQ(evaluate(lookup_map("pow2").map, {1, 0}), Point(1, 0));
  Point v = evaluate(lookup_map("pow3").map, {0, 1});
  EXPECT_NEAR(v.real(), 0, 1e-15);
  EXPECT_NEAR(v.imag(), -1, 1e-15);
  EXPECT_EQ(evaluate(lookup_map("quadratic").map, {2, 0}), Point(3, 0));
}

TEST(Evaluate, OutOfDomain) {
  auto m = lookup_map("pow2").map;
  EXPECT_EQ(code_of([&] { evaluate(m, {kZooHalfSide + 1, 0}); }), ErrorCode::OutOfDomain);
  PlanarMap disk("d", DomainSpec::disk({0, 0}, 1), [](Point z) { return z; });
  EXPECT_NO_THROW(evaluate(disk, {0.5, 0.5}));
  EXPECT_EQ(code_of([&] { evaluate(disk, {0.8, 0.8}); }), ErrorCode::OutOfDomain);
}

TEST(Evaluate, DomainSpecRejectsEmptyInterior) {
  EXPECT_EQ(code_of([] { DomainSpec::rectangle({0, 0, 0, 1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { DomainSpec::disk({0, 0}, 0); }), ErrorCode::InvalidArgument);
}

TEST(Evaluate, DeterministicBitForBit) {
  oracle::Gen g(11);
  for (const auto& e : zoo()) {
    for (int i = 0; i < 200; ++i) {
      Point z = g.in_box(3.5);
      if (!e.map.domain().contains(z)) continue;
      Point a = evaluate(e.map, z), b = evaluate(e.map, z);
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a.real()), std::bit_cast<std::uint64_t>(b.real()));
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a.imag()), std::bit_cast<std::uint64_t>(b.imag()));
      EXPECT_TRUE(std::isfinite(a.real()) && std::isfinite(a.imag())) << e.map.label();
    }
  }
}

TEST(Zoo, ContainsRequiredEntries) {
  for (const char* id : {"pow1", "pow2", "pow3", "pow4", "pow5", "pow6", "quadratic", "cubic", "winding2"})
    EXPECT_NO_THROW(lookup_map(id)) << id;
  for (int k = 2; k <= 6; ++k) {
    auto t = lookup_map("pow" + std::to_string(k)).truth;
    ASSERT_EQ(t.branch_points.size(), 1u);
    EXPECT_EQ(t.branch_points[0].degree, k);
    EXPECT_EQ(t.branch_points[0].location, Point(0, 0));
  }
  EXPECT_TRUE(lookup_map("pow1").truth.branch_points.empty());
  EXPECT_EQ(code_of([] { lookup_map("nope"); }), ErrorCode::InvalidArgument);
}

TEST(Zoo, BranchPointsInsideDomain) {
  for (const auto& e : zoo())
    for (const auto& b : e.truth.branch_points) EXPECT_TRUE(e.map.domain().contains(b.location)) << e.map.label();
}

TEST(Zoo, WindingMapDoublesArgumentKeepsModulus) {
  auto w = lookup_map("winding2").map;
  oracle::Gen g(5);
  for (int i = 0; i < 500; ++i) {
    double r = g.uniform(0.01, 3.0), th = g.uniform(-3.1, 3.1);
    Point v = evaluate(w, std::polar(r, th));
    Point want = std::polar(r, 2 * th);
    EXPECT_NEAR(std::abs(v), r, 1e-12);
    EXPECT_LT(std::abs(v - want), 1e-12 * (1 + r));
  }
  EXPECT_EQ(evaluate(w, {0, 0}), Point(0, 0));
}

TEST(Zoo, CubicCriticalPoints) {
  auto t = lookup_map("cubic").truth;
  auto crit = oracle::roots(oracle::derivative(t.coefficients));
  ASSERT_EQ(crit.size(), 2u);
  EXPECT_NEAR(crit[0].real(), -1, 1e-12);
  EXPECT_NEAR(crit[1].real(), 1, 1e-12);
}

// Declared branch points of every holomorphic entry coincide with the roots
// of the derivative; degrees come from the vanishing order.
TEST(Zoo, HolomorphicGroundTruthMatchesDerivativeRoots) {
  for (const auto& e : zoo()) {
    if (!e.truth.holomorphic) continue;
    const auto& a = e.truth.coefficients;
    ASSERT_FALSE(a.empty()) << e.map.label();
    std::vector<oracle::C> crit = oracle::roots(oracle::derivative(a));
    // distinct critical points with their multiplicity folded into the degree
    std::vector<std::pair<oracle::C, int>> expected;
    for (auto c : crit) {
      bool seen = false;
      for (auto& [p, d] : expected) seen = seen || std::abs(p - c) < 1e-4;
      if (!seen) expected.push_back({c, oracle::holomorphic_local_degree(a, c, 1e-6)});
    }
    ASSERT_EQ(expected.size(), e.truth.branch_points.size()) << e.map.label();
    for (const auto& [p, d] : expected) {
      bool matched = false;
      for (const auto& b : e.truth.branch_points)
        if (std::abs(b.location - p) < 1e-4) {
          matched = true;
          EXPECT_EQ(b.degree, d) << e.map.label();
        }
      EXPECT_TRUE(matched) << e.map.label() << " missing critical point " << p;
    }
    for (const auto& b : e.truth.branch_points) EXPECT_EQ(evaluate(e.map, b.location), oracle::horner(a, b.location));
  }
}

TEST(Zoo, DeclaredPreimagesAgreeWithRootFinder) {
  oracle::Gen g(9);
  for (const char* id : {"pow2", "pow3", "pow5", "quadratic"}) {
    auto e = lookup_map(id);
    for (int i = 0; i < 50; ++i) {
      Point y = g.in_box(1.0);
      auto got = e.truth.preimages(y);
      auto want = oracle::polynomial_preimages(e.truth.coefficients, y);
      EXPECT_LT(oracle::match_distance(got, want), 1e-8) << id;
    }
  }
}

TEST(Zoo, WindingPreimagesAgreeWithOracle) {
  auto e = lookup_map("winding2");
  oracle::Gen g(10);
  for (int i = 0; i < 50; ++i) {
    Point y = g.in_box(2.0);
    EXPECT_LT(oracle::match_distance(e.truth.preimages(y), oracle::winding_preimages(y)), 1e-12);
  }
}

TEST(Compose, ExactAgainstDirectEvaluation) {
  oracle::Gen g(3);
  auto f = lookup_map("cubic").map;
  for (const char* pre : {"id", "shear", "stretch", "conj"})
    for (const char* post : {"id", "shear", "stretch", "conj"}) {
      Homeomorphism hp = homeomorphism_by_name(pre), hq = homeomorphism_by_name(post);
      PlanarMap c = compose(hq, f, hp);
      for (int i = 0; i < 100; ++i) {
        Point z = g.in_box(1.0);
        EXPECT_EQ(c(z), hq(f(hp(z)))) << pre << " " << post;
      }
    }
}

TEST(Compose, HomeomorphismInverses) {
  oracle::Gen g(4);
  for (const char* name : {"id", "shear", "stretch", "conj"}) {
    Homeomorphism h = homeomorphism_by_name(name);
    for (int i = 0; i < 200; ++i) {
      Point z = g.in_box(3.0);
      EXPECT_LT(std::abs(h.inverse(h(z)) - z), 1e-9) << name;
      EXPECT_LT(std::abs(h(h.inverse(z)) - z), 1e-9) << name;
    }
  }
  EXPECT_EQ(homeomorphism_by_name("conj").orientation, -1);
  EXPECT_EQ(code_of([] { homeomorphism_by_name("twist"); }), ErrorCode::InvalidArgument);
}

TEST(Compose, ShearMatchesFormula) {
  Homeomorphism s = shear(0.5);
  EXPECT_EQ(s({1, 2}), Point(2, 2));
  Homeomorphism r = radial_stretch();
  Point z{0.6, 0.8};
  EXPECT_NEAR(std::abs(r(z) - z), 0, 1e-15);  // |z| = 1 is fixed
  EXPECT_NEAR(std::abs(r({2, 0}) - Point(3, 0)), 0, 1e-15);
}

TEST(Sampled, RoundTripReproducesMapAtNodes) {
  auto f = lookup_map("quadratic").map;
  Rect box{-1, -1, 1, 1};
  std::stringstream ss;
  write_sampled(ss, f, 41, 41, box);
  SampledField field = parse_sampled_field(ss, "mem");
  EXPECT_EQ(field.nx(), 41);
  oracle::Gen g(6);
  for (int j = 0; j < 41; j += 5)
    for (int i = 0; i < 41; i += 5) {
      Point z{-1 + 2.0 * i / 40, -1 + 2.0 * j / 40};
      EXPECT_LT(std::abs(field(z) - f(z)), 1e-9);
    }
  // bilinear error for a quadratic is bounded by h^2/4 times the curvature
  double h = 2.0 / 40;
  for (int i = 0; i < 200; ++i) {
    Point z = g.in_box(1.0);
    EXPECT_LT(std::abs(field(z) - f(z)), h * h);
  }
}

TEST(Sampled, ParseErrorsCarryLineNumbers) {
  std::stringstream bad_header("grid 2 x 0 0 1 1\n");
  try {
    parse_sampled_field(bad_header, "f.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("f.txt:1"), std::string::npos) << e.what();
  }
  std::stringstream bad_row("grid 2 2 0 0 1 1\n0 0\n1 0\nzz 1\n1 1\n");
  try {
    parse_sampled_field(bad_row, "f.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("f.txt:4"), std::string::npos) << e.what();
  }
  std::stringstream short_file("grid 2 2 0 0 1 1\n0 0\n");
  EXPECT_EQ(code_of([&] { parse_sampled_field(short_file, "s"); }), ErrorCode::ParseError);
}

TEST(Sampled, LoadThroughLookup) {
  auto path = std::filesystem::temp_directory_path() / "stoilow_sampled_test.txt";
  {
    std::ofstream out(path);
    write_sampled(out, lookup_map("pow2").map, 81, 81, {-1, -1, 1, 1});
  }
  auto e = lookup_map("sampled:" + path.string());
  EXPECT_LT(std::abs(e.map({0.5, 0}) - Point(0.25, 0)), 1e-3);
  EXPECT_EQ(code_of([&] { e.map.evaluate({1.5, 0}); }), ErrorCode::OutOfDomain);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([] { lookup_map("sampled:/nonexistent/file.txt"); }), ErrorCode::IoError);
}

TEST(Regularity, AbsIsOpennessSuspect) {
  auto r = check_regularity(lookup_map("abs").map, {-0.5, -0.5, 0.5, 0.5}, 0.01);
  EXPECT_TRUE(r.openness_suspect);
  EXPECT_FALSE(r.openness_witnesses.empty());
}

TEST(Regularity, Pow2IsClean) {
  auto r = check_regularity(lookup_map("pow2").map, {-0.5, -0.5, 0.5, 0.5}, 0.01);
  EXPECT_FALSE(r.openness_suspect);
  EXPECT_FALSE(r.lightness_suspect);
}

TEST(Regularity, ReIsLightnessSuspect) {
  auto r = check_regularity(lookup_map("re").map, {-0.5, -0.5, 0.5, 0.5}, 0.01);
  EXPECT_TRUE(r.lightness_suspect);
  EXPECT_GT(r.max_fiber_diameter, 0.5);
}

TEST(Regularity, RegionOutsideDomain) {
  EXPECT_EQ(code_of([] { check_regularity(lookup_map("pow2").map, {-5, -5, 0, 0}, 0.01); }), ErrorCode::OutOfDomain);
}
