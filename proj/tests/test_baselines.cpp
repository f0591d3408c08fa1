#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "moco/baselines.hpp"
#include "moco/enumerate.hpp"
#include "moco/errors.hpp"

using namespace moco;

namespace {

double weighted_length(const ProblemInstance& inst, const std::vector<int>& tour, const Preference& w) {
  double total = 0.0;
  for (int i = 0; i < inst.m; ++i) {
    double len = 0.0;
    for (std::size_t k = 0; k < tour.size(); ++k) len += inst.distance(i, tour[k], tour[(k + 1) % tour.size()]);
    total += w[i] * len;
  }
  return total;
}

std::vector<int> nearest_neighbour(const ProblemInstance& inst, const Preference& w) {
  const auto d = [&](int a, int b) {
    double s = 0.0;
    for (int i = 0; i < inst.m; ++i) s += w[i] * inst.distance(i, a, b);
    return s;
  };
  std::vector<int> tour{0};
  std::vector<bool> used(inst.n, false);
  used[0] = true;
  while (static_cast<int>(tour.size()) < inst.n) {
    int best = -1;
    for (int j = 0; j < inst.n; ++j)
      if (!used[j] && (best < 0 || d(tour.back(), j) < d(tour.back(), best))) best = j;
    used[best] = true;
    tour.push_back(best);
  }
  return tour;
}

double weighted_value(const ProblemInstance& inst, const std::vector<int>& items, const Preference& w) {
  double v = 0.0;
  for (int it : items)
    for (int i = 0; i < inst.m; ++i) v += w[i] * inst.value(it, i);
  return v;
}

double total_weight(const ProblemInstance& inst, const std::vector<int>& items) {
  double s = 0.0;
  for (int it : items) s += inst.weight(it);
  return s;
}

// Best weighted value over all subsets whose weight is at most `cap`.
double subset_optimum(const ProblemInstance& inst, const Preference& w, double cap) {
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << inst.n); ++mask) {
    std::vector<int> items;
    for (int i = 0; i < inst.n; ++i)
      if (mask >> i & 1u) items.push_back(i);
    if (total_weight(inst, items) <= cap) best = std::max(best, weighted_value(inst, items, w));
  }
  return best;
}

}  // namespace

TEST(TspBaseline, TwoOptReachesLocalOptimum) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = sample_instance(ProblemKind::motsp, 15, 2, seed);
    const Preference w({0.3, 0.7});
    const auto sol = solve_weightsum_tsp(inst, w);
    const auto& tour = sol.order;
    ASSERT_EQ(std::set<int>(tour.begin(), tour.end()).size(), 15u);
    const double base = weighted_length(inst, tour, w);
    for (int i = 1; i < 15; ++i)
      for (int j = i + 1; j < 15; ++j) {
        auto t = tour;
        std::reverse(t.begin() + i, t.begin() + j + 1);
        EXPECT_GE(weighted_length(inst, t, w), base - 1e-9) << "improving reversal " << i << ".." << j;
      }
    EXPECT_LE(base, weighted_length(inst, nearest_neighbour(inst, w), w) + 1e-12);
    EXPECT_EQ(evaluate(inst, sol), sol.objectives);
  }
}

TEST(KnapsackBaseline, DpIsOptimalUpToRounding) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = sample_instance(ProblemKind::mokp, 14, 2, seed);
    const Preference w({0.6, 0.4});
    const auto dp = solve_weightsum_kp_dp(inst, w);
    const auto greedy = solve_weightsum_kp_greedy(inst, w);
    const double dp_value = weighted_value(inst, dp.order, w);
    EXPECT_LE(total_weight(inst, dp.order), inst.capacity + kCapacitySlack);
    EXPECT_LE(total_weight(inst, greedy.order), inst.capacity + kCapacitySlack);
    EXPECT_GE(dp_value, weighted_value(inst, greedy.order, w) - 1e-12);
    // Ceil/floor rounding costs at most one unit per item plus one of capacity.
    const double slack = (inst.n + 1) / kDpScale;
    EXPECT_LE(dp_value, subset_optimum(inst, w, inst.capacity) + 1e-12);
    EXPECT_GE(dp_value, subset_optimum(inst, w, inst.capacity - slack) - 1e-12);
  }
}

TEST(KnapsackBaseline, DpPointsAreSupportedParetoPoints) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = sample_instance(ProblemKind::mokp, 12, 2, 100 + seed);
    const auto exact = enumerate_exact(inst).points();
    for (const auto& w : uniform_grid(21)) {
      const auto obj = solve_weightsum_kp_dp(inst, w).objectives;
      double best = 0.0;
      for (const auto& p : exact) best = std::max(best, w[0] * p[0] + w[1] * p[1]);
      // Upper-hull oracle: no exact point beats the DP point for this weight.
      EXPECT_GE(w[0] * obj[0] + w[1] * obj[1], best - (inst.n + 1) * 1e-3);
    }
  }
}

TEST(KnapsackBaseline, DpBudgetIsEnforced) {
  const auto inst = sample_instance(ProblemKind::mokp, 50, 2, 1);
  EXPECT_THROW(solve_weightsum_kp_dp(inst, Preference({0.5, 0.5}), 1e4, 10.0), BudgetExceeded);
}

TEST(CvrpBaseline, FeasibleAndNoWorseThanPlainSweep) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = sample_instance(ProblemKind::mocvrp, 20, 2, seed);
    const Preference w({0.5, 0.5});
    const auto sol = solve_weightsum_cvrp(inst, w);
    std::vector<int> seen;
    for (const auto& route : sol.routes) {
      double load = 0.0;
      for (int c : route) load += inst.demands[c], seen.push_back(c);
      EXPECT_LE(load, inst.capacity + kCapacitySlack);
    }
    std::sort(seen.begin(), seen.end());
    std::vector<int> all(20);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(seen, all);
    EXPECT_EQ(evaluate(inst, sol), sol.objectives);
  }
}

TEST(BaselineFront, SingleWeightGivesOnePoint) {
  const auto inst = sample_instance(ProblemKind::motsp, 12, 2, 3);
  BaselineSpec spec;
  spec.weights = {Preference({0.5, 0.5})};
  EXPECT_EQ(build_baseline_front(inst, spec).archive.size(), 1u);
}

TEST(BaselineFront, MoreWeightsNeverLoseHypervolume) {
  for (const auto kind : {ProblemKind::motsp, ProblemKind::mokp, ProblemKind::mocvrp}) {
    const auto inst = sample_instance(kind, 12, 2, 8);
    BaselineSpec coarse, fine;
    coarse.solver = fine.solver = default_solver(kind);
    coarse.weights = uniform_grid(5);
    fine.weights = uniform_grid(9);  // superset of the coarse grid
    const auto a = build_baseline_front(inst, coarse).archive.points();
    const auto b = build_baseline_front(inst, fine).archive.points();
    const std::vector<std::vector<Point>> sets{a, b};
    const auto frame = metric_frame(sets, sense_of(kind));
    EXPECT_GE(frame_hypervolume(b, frame), frame_hypervolume(a, frame) - 1e-12);
  }
}

TEST(BaselineFront, ParallelMatchesSerial) {
  const auto inst = sample_instance(ProblemKind::motsp, 15, 2, 4);
  BaselineSpec spec;
  spec.weights = uniform_grid(11);
  const auto a = build_baseline_front(inst, spec).archive.points();
  spec.parallel = false;
  EXPECT_EQ(build_baseline_front(inst, spec).archive.points(), a);
}

TEST(Metrics, ReportAgainstExactFront) {
  const auto inst = sample_instance(ProblemKind::motsp, 7, 2, 5);
  const auto exact = enumerate_exact(inst).points();
  BaselineSpec spec;
  spec.weights = uniform_grid(11);
  const auto approx = build_baseline_front(inst, spec).archive.points();
  const std::vector<std::vector<Point>> sets{exact, approx};
  const auto frame = metric_frame(sets, Sense::minimize);
  const double exact_hv = frame_hypervolume(exact, frame);
  const auto self = metric_report("exact", exact, frame, 0.0, exact_hv, exact);
  EXPECT_NEAR(*self.gap, 0.0, 1e-12);
  EXPECT_NEAR(*self.igd, 0.0, 1e-12);
  const auto rep = metric_report("baseline", approx, frame, 0.0, exact_hv, exact);
  EXPECT_GE(*rep.gap, -1e-12);
  EXPECT_GE(*rep.igd, 0.0);
  EXPECT_GE(rep.normalized_hv, 0.0);
  EXPECT_LE(rep.normalized_hv, self.normalized_hv + 1e-12);
  EXPECT_LE(self.normalized_hv, 1.0);
  const auto j = to_json(rep);
  EXPECT_EQ(j.at("method"), "baseline");
  EXPECT_EQ(j.at("size"), approx.size());
}

TEST(Metrics, MaximizationFrameUsesOrigin) {
  const std::vector<Point> pts{{3.0, 1.0}, {1.0, 2.0}};
  const std::vector<std::vector<Point>> sets{pts};
  const auto frame = metric_frame(sets, Sense::maximize);
  // Union of [0,3]x[0,1] and [0,1]x[0,2], normalized by the box of best values.
  EXPECT_NEAR(frame_hypervolume(pts, frame), 4.0, 1e-12);
  EXPECT_NEAR(frame_normalized_hv(pts, frame), 4.0 / 6.0, 1e-12);
}

TEST(Solvers, NamesRoundTrip) {
  for (const auto s : {BaselineSolver::tsp_nn_2opt, BaselineSolver::kp_greedy, BaselineSolver::kp_dp,
                       BaselineSolver::cvrp_sweep_2opt})
    EXPECT_EQ(parse_solver(to_string(s)), s);
  EXPECT_THROW(parse_solver("lkh"), ConfigError);
}
