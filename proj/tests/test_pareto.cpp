#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "moco/errors.hpp"
#include "moco/pareto.hpp"
#include "moco/rng.hpp"

using namespace moco;

namespace {

std::vector<Point> random_front(Rng& rng, int count, int m) {
  std::vector<Point> pts(count, Point(m));
  for (auto& p : pts)
    for (auto& x : p) x = uniform01(rng);
  return pts;
}

// Quadratic-scan dominance filter, first occurrence kept.
std::vector<Point> quadratic_filter(const std::vector<Point>& pts) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < pts.size() && keep; ++j) {
      if (i == j) continue;
      bool le = true, lt = false;
      for (std::size_t k = 0; k < pts[i].size(); ++k) {
        le = le && pts[j][k] <= pts[i][k];
        lt = lt || pts[j][k] < pts[i][k];
      }
      if (le && lt) keep = false;
      if (pts[j] == pts[i] && j < i) keep = false;
    }
    if (keep) out.push_back(pts[i]);
  }
  return out;
}

// Union of boxes by inclusion-exclusion.
double inclusion_exclusion(const std::vector<Point>& pts, const Point& ref) {
  const int n = static_cast<int>(pts.size());
  double total = 0;
  for (int mask = 1; mask < (1 << n); ++mask) {
    Point corner(ref.size(), -INFINITY);
    int bits = 0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) {
        ++bits;
        for (std::size_t k = 0; k < ref.size(); ++k) corner[k] = std::max(corner[k], pts[i][k]);
      }
    double vol = 1;
    for (std::size_t k = 0; k < ref.size(); ++k) vol *= std::max(0.0, ref[k] - corner[k]);
    total += (bits % 2 ? 1 : -1) * vol;
  }
  return total;
}

}  // namespace

TEST(Dominance, Examples) {
  const Point a{1, 2}, b{2, 2}, c{1, 3};
  EXPECT_TRUE(dominates(a, b));
  EXPECT_FALSE(dominates(a, a));
  EXPECT_FALSE(dominates(c, b));
  EXPECT_FALSE(dominates(b, c));
  EXPECT_TRUE(dominates(b, a, Sense::maximize));
  EXPECT_THROW(dominates(Point{1}, Point{1, 2}), ContractViolation);
}

TEST(EpsDominance, Examples) {
  EXPECT_TRUE(eps_dominates(Point{1, 1}, Point{1, 1}, 0.1));
  EXPECT_FALSE(eps_dominates(Point{1.2, 1.0}, Point{1.0, 1.0}, 0.1));
  EXPECT_THROW(eps_dominates(Point{-1, 1}, Point{1, 1}, 0.1), DomainError);
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_front(rng, 2, 3);
    EXPECT_EQ(eps_dominates(p[0], p[1], 0.0), weakly_dominates(p[0], p[1]));
  }
}

TEST(EpsApproxSet, ExactFrontAndEmptyCandidate) {
  Rng rng(2);
  const auto X = nondominated_filter(random_front(rng, 50, 2));
  for (double eps : {0.0, 0.01, 1.0}) EXPECT_TRUE(is_eps_approx_set(X, X, eps).holds);
  const auto r = is_eps_approx_set({}, X, 0.5);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(*r.witness, 0u);
  EXPECT_EQ(minimal_eps(X, X), 0.0);
  EXPECT_TRUE(std::isinf(minimal_eps({}, X)));
}

TEST(EpsApproxSet, MinimalEpsIsTightAgainstBisection) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto X = nondominated_filter(random_front(rng, 30, 2));
    for (auto& p : X)
      for (auto& x : p) x += 0.1;
    std::vector<Point> P;
    for (std::size_t i = 0; i < X.size(); i += 3) P.push_back(X[i]);
    const double eps = minimal_eps(P, X);
    EXPECT_TRUE(is_eps_approx_set(P, X, eps * (1 + 1e-12) + 1e-15).holds);
    double lo = 0, hi = 10;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (is_eps_approx_set(P, X, mid).holds ? hi : lo) = mid;
    }
    EXPECT_NEAR(eps, hi, 1e-9);
    if (eps > 0) {
      const auto r = is_eps_approx_set(P, X, eps * 0.999);
      EXPECT_FALSE(r.holds);
      EXPECT_TRUE(r.witness.has_value());
    }
  }
}

TEST(NondominatedFilter, Examples) {
  const std::vector<Point> pts{{1, 2}, {2, 1}, {2, 2}};
  EXPECT_EQ(nondominated_filter(pts), (std::vector<Point>{{1, 2}, {2, 1}}));
  const std::vector<Point> same(5, Point{0.3, 0.3});
  EXPECT_EQ(nondominated_filter(same).size(), 1u);
}

TEST(NondominatedFilter, MatchesQuadraticScanAndIsIdempotent) {
  Rng rng(4);
  for (int m : {2, 3}) {
    auto pts = random_front(rng, 1000, m);
    for (int i = 0; i < 50; ++i) pts.push_back(pts[uniform_int(rng, 0, 999)]);
    const auto f = nondominated_filter(pts);
    EXPECT_EQ(f, quadratic_filter(pts));
    EXPECT_EQ(nondominated_filter(f), f);
  }
}

TEST(Archive, RejectsDominatedAndDuplicates) {
  ParetoArchive a;
  EXPECT_TRUE(a.offer({2, 2}));
  EXPECT_FALSE(a.offer({2, 2}));
  EXPECT_FALSE(a.offer({3, 2}));
  EXPECT_TRUE(a.offer({1, 3}));
  EXPECT_TRUE(a.offer({1, 1}));
  EXPECT_EQ(a.points(), (std::vector<Point>{{1, 1}}));
  ParetoArchive mx(Sense::maximize);
  mx.offer({1, 1});
  mx.offer({2, 0});
  mx.offer({0.5, 0.5});
  EXPECT_EQ(mx.size(), 2u);
  EXPECT_EQ(mx.minimization_points(), (std::vector<Point>{{-1, -1}, {-2, 0}}));
}

TEST(Hypervolume, HandCases) {
  EXPECT_DOUBLE_EQ(hypervolume(std::vector<Point>{{1, 1}}, Point{2, 2}).value, 1.0);
  EXPECT_NEAR(hypervolume(std::vector<Point>{{0.2, 0.6}, {0.6, 0.2}}, Point{1, 1}).value, 0.48, 1e-12);
  EXPECT_EQ(hypervolume(std::vector<Point>{}, Point{1, 1}).value, 0.0);
  EXPECT_EQ(hypervolume(std::vector<Point>{{1, 0.5}}, Point{1, 1}).value, 0.0);
}

TEST(Hypervolume, FourBoxesMatchInclusionExclusion) {
  const std::vector<Point> pts{{0.1, 0.9}, {0.3, 0.6}, {0.5, 0.4}, {0.8, 0.1}};
  EXPECT_NEAR(hypervolume(pts, Point{1, 1}).value, inclusion_exclusion(pts, {1, 1}), 1e-12);
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 2;
    const auto p = random_front(rng, 1 + trial % 8, m);
    const Point ref(m, 1.0);
    EXPECT_NEAR(hypervolume(p, ref).value, inclusion_exclusion(p, ref), 1e-12);
  }
}

TEST(Hypervolume, PointOutsideReferenceIsNamed) {
  try {
    hypervolume(std::vector<Point>{{0.5, 0.5}, {1.5, 0.2}}, Point{1, 1});
    FAIL();
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("(1.5, 0.2)"), std::string::npos) << e.what();
  }
}

TEST(Hypervolume, MonteCarloPathForManyObjectives) {
  Rng rng(6);
  const auto p = random_front(rng, 6, 4);
  const Point ref(4, 1.0);
  const auto r = hypervolume(p, ref, 200000);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_NEAR(r.value, inclusion_exclusion(p, ref), 4 * r.std_error);
  // Fixed default seed: identical reruns.
  EXPECT_EQ(hypervolume(p, ref, 1000).value, hypervolume(p, ref, 1000).value);
}

TEST(Hypervolume, MonotoneUnderAddition) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 2;
    auto p = random_front(rng, 20, m);
    const Point ref(m, 1.0);
    const double before = hypervolume(p, ref).value;
    p.push_back(random_front(rng, 1, m)[0]);
    EXPECT_GE(hypervolume(p, ref).value, before - 1e-15);
  }
}

TEST(Hypervolume, DominatingSetHasAtLeastAsMuch) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 2;
    const auto A = random_front(rng, 15, m);
    std::vector<Point> B;
    for (const auto& a : A) {
      Point b = a;
      for (auto& x : b) x = x + (1 - x) * uniform01(rng);
      B.push_back(b);
    }
    EXPECT_GE(hypervolume(A, Point(m, 1.0)).value, hypervolume(B, Point(m, 1.0)).value);
  }
}

TEST(NormalizedHv, Examples) {
  EXPECT_DOUBLE_EQ(normalized_hv(std::vector<Point>{{0, 0}}, Point{1, 1}), 1.0);
  EXPECT_THROW(normalized_hv(std::vector<Point>{{0, 0}}, Point{0, 1}), DomainError);
  EXPECT_THROW(normalized_hv(std::vector<Point>{{-0.1, 0}}, Point{1, 1}), DomainError);
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_front(rng, 10, 2);
    const Point ref{2, 3};
    const double h = normalized_hv(p, ref);
    EXPECT_LE(h, 1.0);
    for (auto& q : p)
      for (auto& x : q) x *= 0.5;
    EXPECT_GE(normalized_hv(p, ref), h);
    std::vector<Point> sub(p.begin(), p.begin() + 5);
    EXPECT_GE(normalized_hv(p, ref), normalized_hv(sub, ref));
  }
}

TEST(Igd, Examples) {
  const std::vector<Point> exact{{0, 1}, {1, 0}};
  EXPECT_EQ(igd(exact, exact), 0.0);
  EXPECT_DOUBLE_EQ(igd(std::vector<Point>{{0, 1}}, exact), std::sqrt(2.0) / 2);
  EXPECT_TRUE(std::isinf(igd({}, exact)));
  EXPECT_THROW(igd(exact, {}), ContractViolation);
}

TEST(Igd, MatchesBruteForcePairing) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto A = random_front(rng, 17, 3), E = random_front(rng, 23, 3);
    double total = 0;
    for (const auto& e : E) {
      double best = INFINITY;
      for (const auto& a : A) best = std::min(best, std::hypot(a[0] - e[0], a[1] - e[1], a[2] - e[2]));
      total += best;
    }
    EXPECT_NEAR(igd(A, E), total / E.size(), 1e-12);
  }
}

TEST(ReferencePoint, UnionSemantics) {
  const std::vector<std::vector<Point>> one{{{1, 3}, {2, 2}}};
  EXPECT_EQ(reference_point(one), (Point{2, 3}));
  const std::vector<std::vector<Point>> two{{{1, 3}, {2, 2}}, {{0.5, 4}}};
  const auto r = reference_point(two);
  EXPECT_EQ(r, (Point{2, 4}));
  EXPECT_THROW(reference_point(std::vector<std::vector<Point>>{{}}), ContractViolation);
}

TEST(ClippedHypervolume, IgnoresPointsOutsideTheBox) {
  const std::vector<Point> pts{{0.5, 0.5}, {1.5, 0.1}};
  EXPECT_DOUBLE_EQ(clipped_hypervolume(pts, Point{1, 1}), 0.25);
}
