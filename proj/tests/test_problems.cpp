#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "moco/enumerate.hpp"
#include "moco/errors.hpp"
#include "moco/problems.hpp"
#include "moco/rng.hpp"

using namespace moco;

namespace {

ProblemInstance tsp_from(std::vector<std::vector<double>> coords, int m) {
  ProblemInstance inst;
  inst.kind = ProblemKind::motsp;
  inst.m = m;
  inst.n = static_cast<int>(coords.size());
  inst.coords = std::move(coords);
  return inst;
}

ProblemInstance kp_from(std::vector<std::vector<double>> rows, double capacity) {
  ProblemInstance inst;
  inst.kind = ProblemKind::mokp;
  inst.m = static_cast<int>(rows.front().size()) - 1;
  inst.n = static_cast<int>(rows.size());
  inst.coords = std::move(rows);
  inst.capacity = capacity;
  return inst;
}

// Uniformly random admissible action until done.
Solution random_construction(const ProblemInstance& inst, Rng& rng) {
  auto state = initial_state(inst);
  while (!is_complete(inst, state)) {
    settle(inst, state);
    const auto mask = feasible_mask(inst, state);
    std::vector<int> admissible;
    for (int j = 0; j < inst.n; ++j)
      if (mask[j]) admissible.push_back(j);
    if (admissible.empty()) ADD_FAILURE() << "no admissible action in an incomplete state";
    apply_action(inst, state, admissible[uniform_int(rng, 0, static_cast<int>(admissible.size()) - 1)]);
  }
  return finish(inst, state);
}

std::vector<int> random_tour(int n, Rng& rng) {
  std::vector<int> t(n);
  std::iota(t.begin(), t.end(), 0);
  shuffle(t, rng);
  return t;
}

}  // namespace

TEST(SampleInstance, MocvrpTwentyUsesCapacityThirty) {
  const auto inst = sample_instance(ProblemKind::mocvrp, 20, 2, 1);
  EXPECT_EQ(inst.capacity, 1.0);
  for (double d : inst.demands) {
    const double raw = d * 30.0;
    EXPECT_NEAR(raw, std::round(raw), 1e-12);
    EXPECT_GE(std::round(raw), 1.0);
    EXPECT_LE(std::round(raw), 9.0);
  }
  inst.validate();
}

TEST(SampleInstance, CapacityTables) {
  EXPECT_EQ(mocvrp_raw_capacity(20), 30.0);
  EXPECT_EQ(mocvrp_raw_capacity(50), 40.0);
  EXPECT_EQ(mocvrp_raw_capacity(100), 50.0);
  EXPECT_EQ(mokp_capacity(50), 12.5);
  EXPECT_EQ(mokp_capacity(100), 25.0);
  EXPECT_EQ(mokp_capacity(200), 25.0);
  EXPECT_EQ(sample_instance(ProblemKind::mokp, 50, 2, 3).capacity, 12.5);
}

TEST(SampleInstance, TwoNodeTspHasOneTour) {
  const auto inst = sample_instance(ProblemKind::motsp, 2, 2, 0);
  int count = 0;
  enumerate_feasible(inst, 10, [&](const Solution&) { ++count; });
  EXPECT_EQ(count, 1);
}

TEST(SampleInstance, DeterministicPerSeed) {
  for (auto kind : {ProblemKind::motsp, ProblemKind::mocvrp, ProblemKind::mokp}) {
    const auto a = sample_instance(kind, 12, 2, 42);
    const auto b = sample_instance(kind, 12, 2, 42);
    const auto c = sample_instance(kind, 12, 2, 43);
    EXPECT_EQ(a.coords, b.coords);
    EXPECT_EQ(a.demands, b.demands);
    EXPECT_NE(a.coords, c.coords);
  }
}

TEST(SampleInstance, InvariantsHoldAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    sample_instance(ProblemKind::motsp, 10, 3, seed).validate();
    sample_instance(ProblemKind::mocvrp, 10, 2, seed).validate();
    sample_instance(ProblemKind::mokp, 10, 3, seed).validate();
    sample_instance(ProblemKind::mokp, 2, 2, seed).validate();
  }
}

TEST(SampleInstance, UnsupportedCombinationsAreConfigErrors) {
  EXPECT_THROW(sample_instance(ProblemKind::mocvrp, 10, 3, 0), ConfigError);
  EXPECT_THROW(sample_instance(ProblemKind::motsp, 1, 2, 0), ConfigError);
  EXPECT_THROW(sample_instance(ProblemKind::mokp, 10, 1, 0), ConfigError);
  EXPECT_THROW(parse_kind("vrptw"), ConfigError);
}

TEST(Evaluate, OutAndBack) {
  const auto inst = tsp_from({{0, 0, 0, 0}, {0, 1, 3, 4}}, 2);
  Solution s;
  s.order = {0, 1};
  const auto f = evaluate(inst, s);
  EXPECT_DOUBLE_EQ(f[0], 2.0);
  EXPECT_DOUBLE_EQ(f[1], 10.0);
}

TEST(Evaluate, KnapsackSumsValues) {
  const auto inst = kp_from({{0.1, 0.2, 0.1}, {0.3, 0.4, 0.1}, {0.5, 0.6, 0.1}}, 0.5);
  Solution s;
  s.kind = ProblemKind::mokp;
  s.order = {0, 1, 2};
  const auto f = evaluate(inst, s);
  EXPECT_NEAR(f[0], 0.9, 1e-12);
  EXPECT_NEAR(f[1], 1.2, 1e-12);
}

TEST(Evaluate, SingleRouteTotalEqualsLongest) {
  ProblemInstance inst;
  inst.kind = ProblemKind::mocvrp;
  inst.n = 1;
  inst.depot = {0.5, 0.5};
  inst.coords = {{0.5, 1.0}};
  inst.demands = {0.2};
  Solution s;
  s.kind = ProblemKind::mocvrp;
  s.routes = {{0}};
  const auto f = evaluate(inst, s);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
}

TEST(Evaluate, InfeasibleSolutionsNameTheConstraint) {
  const auto tsp = sample_instance(ProblemKind::motsp, 5, 2, 0);
  Solution dup;
  dup.order = {0, 1, 1, 2, 3};
  try {
    evaluate(tsp, dup);
    FAIL();
  } catch (const InfeasibleSolution& e) {
    EXPECT_NE(std::string(e.what()).find("twice"), std::string::npos);
  }
  const auto kp = sample_instance(ProblemKind::mokp, 8, 2, 0);
  Solution all;
  all.kind = ProblemKind::mokp;
  all.order = {0, 1, 2, 3, 4, 5, 6, 7};
  try {
    evaluate(kp, all);
    FAIL();
  } catch (const InfeasibleSolution& e) {
    EXPECT_NE(std::string(e.what()).find("capacity"), std::string::npos);
  }
  auto vrp = sample_instance(ProblemKind::mocvrp, 4, 2, 0);
  vrp.demands = {0.6, 0.6, 0.1, 0.1};
  Solution over;
  over.kind = ProblemKind::mocvrp;
  over.routes = {{0, 1}, {2, 3}};
  EXPECT_THROW(evaluate(vrp, over), InfeasibleSolution);
  over.routes = {{0}, {}, {1, 2, 3}};
  EXPECT_THROW(evaluate(vrp, over), InfeasibleSolution);
  over.routes = {{0}, {1, 2}};
  EXPECT_THROW(evaluate(vrp, over), InfeasibleSolution);
}

TEST(Evaluate, RotationAndReversalInvariance) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = sample_instance(ProblemKind::motsp, 12, 3, trial);
    Solution s;
    s.order = random_tour(inst.n, rng);
    const auto f = evaluate(inst, s);
    std::rotate(s.order.begin(), s.order.begin() + uniform_int(rng, 0, inst.n - 1), s.order.end());
    const auto g = evaluate(inst, s);
    std::reverse(s.order.begin(), s.order.end());
    const auto h = evaluate(inst, s);
    for (int i = 0; i < inst.m; ++i) {
      EXPECT_NEAR(f[i], g[i], 1e-6);
      EXPECT_NEAR(f[i], h[i], 1e-6);
    }
    s.order = canonical_tour(s.order);
    EXPECT_EQ(s.order.front(), 0);
    EXPECT_LT(s.order[1], s.order.back());
  }
}

TEST(FeasibleMask, LastUnvisitedNode) {
  const auto inst = sample_instance(ProblemKind::motsp, 10, 2, 0);
  auto state = initial_state(inst);
  for (int j = 0; j < 10; ++j)
    if (j != 7) apply_action(inst, state, j);
  const auto mask = feasible_mask(inst, state);
  for (int j = 0; j < 10; ++j) EXPECT_EQ(mask[j], j == 7);
}

TEST(FeasibleMask, CvrpReturnsToDepotWhenNothingFits) {
  auto inst = sample_instance(ProblemKind::mocvrp, 4, 2, 0);
  inst.demands = {0.9, 0.5, 0.5, 0.5};
  auto state = initial_state(inst);
  apply_action(inst, state, 0);
  EXPECT_NEAR(state.remaining, 0.1, 1e-12);
  const auto mask = feasible_mask(inst, state);
  EXPECT_TRUE(std::none_of(mask.begin(), mask.end(), [](auto b) { return b; }));
  EXPECT_TRUE(settle(inst, state));
  EXPECT_EQ(state.current, -1);
  EXPECT_EQ(state.remaining, 1.0);
  EXPECT_FALSE(settle(inst, state));
  EXPECT_THROW(return_to_depot(inst, state), InfeasibleSolution);
}

TEST(FeasibleMask, KnapsackTerminatesWhenNothingFits) {
  const auto inst = kp_from({{1, 1, 0.4}, {1, 1, 0.3}, {1, 1, 0.3}}, 0.5);
  auto state = initial_state(inst);
  EXPECT_FALSE(is_complete(inst, state));
  apply_action(inst, state, 0);
  EXPECT_TRUE(is_complete(inst, state));
  EXPECT_THROW(apply_action(inst, state, 1), InfeasibleSolution);
}

TEST(Construction, RandomRolloutsAreAlwaysFeasible) {
  Rng rng(5);
  for (auto kind : {ProblemKind::motsp, ProblemKind::mocvrp, ProblemKind::mokp}) {
    for (int i = 0; i < 1000; ++i) {
      const int n = uniform_int(rng, 2, 30);
      const int m = kind == ProblemKind::mocvrp ? 2 : uniform_int(rng, 2, 4);
      const auto inst = sample_instance(kind, n, m, mix_seed(kind == ProblemKind::mokp ? 7 : 3, i));
      const auto s = random_construction(inst, rng);
      EXPECT_NO_THROW(evaluate(inst, s));
      if (kind == ProblemKind::mokp) {
        // Maximal: nothing else fits.
        double used = 0.0;
        for (int j : s.order) used += inst.weight(j);
        for (int j = 0; j < n; ++j)
          if (std::find(s.order.begin(), s.order.end(), j) == s.order.end())
            EXPECT_GT(inst.weight(j), inst.capacity - used - kCapacitySlack);
      }
    }
  }
}

TEST(Solution, FlatRoundTrip) {
  Solution s;
  s.kind = ProblemKind::mocvrp;
  s.routes = {{2, 0}, {1}};
  const std::vector<int> expect{0, 3, 1, 0, 2, 0};
  EXPECT_EQ(s.flat(), expect);
  EXPECT_EQ(Solution::from_flat(ProblemKind::mocvrp, s.flat()).routes, s.routes);
}

TEST(Augment, TransformListOrder) {
  const auto p = transform_point(1, 0.3, 0.8);
  EXPECT_EQ(p[0], 0.8);
  EXPECT_EQ(p[1], 0.3);
  EXPECT_THROW(transform_point(8, 0, 0), ContractViolation);
}

TEST(Augment, Counts) {
  EXPECT_EQ(augment(sample_instance(ProblemKind::motsp, 5, 2, 0)).size(), 64u);
  EXPECT_EQ(augment(sample_instance(ProblemKind::motsp, 5, 3, 0)).size(), 512u);
  EXPECT_EQ(augment(sample_instance(ProblemKind::mocvrp, 5, 2, 0)).size(), 8u);
  EXPECT_TRUE(augment(sample_instance(ProblemKind::mokp, 5, 2, 0)).empty());
}

TEST(Augment, ObjectivesArePreserved) {
  Rng rng(6);
  const auto tsp = sample_instance(ProblemKind::motsp, 10, 2, 1);
  const auto variants = augment(tsp);
  EXPECT_EQ(variants[0].coords, tsp.coords);
  for (int trial = 0; trial < 100; ++trial) {
    Solution s;
    s.order = random_tour(tsp.n, rng);
    const auto base = evaluate(tsp, s);
    EXPECT_EQ(evaluate(variants[0], s), base);
    for (const auto& v : variants) {
      const auto f = evaluate(v, s);
      for (int i = 0; i < tsp.m; ++i) EXPECT_NEAR(f[i], base[i], 1e-6);
      for (const auto& row : v.coords)
        for (double c : row) EXPECT_TRUE(c >= 0.0 && c <= 1.0);
    }
  }
  const auto vrp = sample_instance(ProblemKind::mocvrp, 10, 2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_construction(vrp, rng);
    for (const auto& v : augment(vrp)) {
      const auto f = evaluate(v, s);
      EXPECT_NEAR(f[0], s.objectives[0], 1e-6);
      EXPECT_NEAR(f[1], s.objectives[1], 1e-6);
    }
  }
}

TEST(Enumerate, ThreeNodeTourFrontHasOnePoint) {
  const auto a = enumerate_exact(sample_instance(ProblemKind::motsp, 3, 2, 0));
  EXPECT_EQ(a.size(), 1u);
}

TEST(Enumerate, KnapsackExample) {
  const auto inst = kp_from({{1, 0, 0.4}, {0, 1, 0.4}, {0, 0, 0.4}}, 0.5);
  const auto a = enumerate_exact(inst);
  auto pts = a.points();
  std::sort(pts.begin(), pts.end());
  const std::vector<Point> expect{{0, 1}, {1, 0}};
  EXPECT_EQ(pts, expect);
}

TEST(Enumerate, BudgetExceededCarriesEstimate) {
  const auto inst = sample_instance(ProblemKind::motsp, 12, 2, 0);
  try {
    enumerate_exact(inst, 1000);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_DOUBLE_EQ(e.estimate(), 19958400.0);
  }
}

TEST(Enumerate, FrontIsMutuallyNondominated) {
  for (auto [kind, n] : {std::pair{ProblemKind::motsp, 8}, std::pair{ProblemKind::mokp, 12},
                         std::pair{ProblemKind::mocvrp, 5}}) {
    const auto inst = sample_instance(kind, n, 2, 11);
    const auto a = enumerate_exact(inst);
    const auto pts = a.points();
    ASSERT_FALSE(pts.empty());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (i != j) {
          EXPECT_FALSE(dominates(pts[i], pts[j], a.sense()));
          EXPECT_NE(pts[i], pts[j]);
        }
    for (const auto& e : a.entries()) {
      const auto f = evaluate(inst, e.solution);
      EXPECT_EQ(f, e.objectives);
    }
  }
}

// Independent oracle: all n! permutations without the symmetry reduction.
TEST(Enumerate, NineNodeFixtureMatchesFullPermutationScan) {
  const auto inst = sample_instance(ProblemKind::motsp, 9, 2, 0);
  const auto a = enumerate_exact(inst);

  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Point> all;
  do {
    double f0 = 0, f1 = 0;
    for (int j = 0; j < 9; ++j) {
      const auto& p = inst.coords[perm[j]];
      const auto& q = inst.coords[perm[(j + 1) % 9]];
      f0 += std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]));
      f1 += std::sqrt((p[2] - q[2]) * (p[2] - q[2]) + (p[3] - q[3]) * (p[3] - q[3]));
    }
    all.push_back({f0, f1});
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<Point> oracle;
  for (const auto& p : all) {
    bool dom = false;
    for (const auto& q : all)
      if (q[0] <= p[0] && q[1] <= p[1] && (q[0] < p[0] - 1e-9 || q[1] < p[1] - 1e-9)) {
        dom = true;
        break;
      }
    if (!dom) oracle.push_back(p);
  }
  std::sort(oracle.begin(), oracle.end());
  oracle.erase(std::unique(oracle.begin(), oracle.end(),
                           [](const Point& x, const Point& y) {
                             return std::abs(x[0] - y[0]) < 1e-9 && std::abs(x[1] - y[1]) < 1e-9;
                           }),
               oracle.end());
  auto pts = a.points();
  std::sort(pts.begin(), pts.end());
  ASSERT_EQ(pts.size(), oracle.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pts[i][0], oracle[i][0], 1e-9);
    EXPECT_NEAR(pts[i][1], oracle[i][1], 1e-9);
  }
  const Point ref{std::max_element(pts.begin(), pts.end(), [](auto& x, auto& y) { return x[0] < y[0]; })->at(0),
                  std::max_element(pts.begin(), pts.end(), [](auto& x, auto& y) { return x[1] < y[1]; })->at(1)};
  // Fixture for this seed; the oracle above is what makes it trustworthy.
  EXPECT_EQ(pts.size(), 20u);
  EXPECT_NEAR(hypervolume(pts, ref).value, 3.348967, 1e-6);
}

TEST(Enumerate, CvrpFrontCoversRandomConstructions) {
  const auto inst = sample_instance(ProblemKind::mocvrp, 6, 2, 21);
  const auto a = enumerate_exact(inst);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_construction(inst, rng);
    const bool covered = std::any_of(a.entries().begin(), a.entries().end(), [&](const auto& e) {
      return weakly_dominates(e.objectives, s.objectives, Sense::minimize);
    });
    EXPECT_TRUE(covered);
  }
}
