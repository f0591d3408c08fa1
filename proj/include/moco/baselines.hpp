#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "moco/pareto.hpp"
#include "moco/problems.hpp"
#include "moco/scalarization.hpp"

namespace moco {

enum class BaselineSolver { tsp_nn_2opt, kp_greedy, kp_dp, cvrp_sweep_2opt };

std::string to_string(BaselineSolver s);
BaselineSolver parse_solver(const std::string& name);
BaselineSolver default_solver(ProblemKind kind);

inline constexpr double kDpScale = 1e4;
inline constexpr double kDpCellLimit = 2e8;

// Nearest neighbour from node 0 on the lambda-weighted distances, then
// first-improvement 2-opt until no improving move or `max_passes` passes.
Solution solve_weightsum_tsp(const ProblemInstance& instance, const Preference& preference, int max_passes = 1000);

// Descending (sum_i lambda_i v_i) / w, inserting every item that still fits.
Solution solve_weightsum_kp_greedy(const ProblemInstance& instance, const Preference& preference);

// Exact 0/1 knapsack on integer weights ceil(w * scale) and capacity
// floor(W * scale). Throws BudgetExceeded when n * capacity cells exceed
// `cell_limit`.
Solution solve_weightsum_kp_dp(const ProblemInstance& instance, const Preference& preference,
                               double scale = kDpScale, double cell_limit = kDpCellLimit);

// Sweep construction (customers by angle around the depot, cut when the
// capacity is exhausted), then 2-opt inside each route. Stand-in for the
// population-based routing heuristics of the literature.
Solution solve_weightsum_cvrp(const ProblemInstance& instance, const Preference& preference, int max_passes = 1000);

Solution solve_baseline(BaselineSolver solver, const ProblemInstance& instance, const Preference& preference);

struct BaselineSpec {
  BaselineSolver solver = BaselineSolver::tsp_nn_2opt;
  std::vector<Preference> weights;
  bool parallel = true;
};

struct BaselineFront {
  ParetoArchive archive;
  double runtime_s = 0.0;
};

BaselineFront build_baseline_front(const ProblemInstance& instance, const BaselineSpec& spec);

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

// Shared metric space for compared methods. Minimization keeps the
// objectives with r* the componentwise worst over every set; maximization
// measures the box between the origin and the points, normalized by the
// componentwise best value.
struct MetricFrame {
  Sense sense = Sense::minimize;
  Point reference;  // minimization space
  Point scale;      // normalizer per objective
};

MetricFrame metric_frame(std::span<const std::vector<Point>> sets, Sense sense);
double frame_hypervolume(std::span<const Point> points, const MetricFrame& frame);
double frame_normalized_hv(std::span<const Point> points, const MetricFrame& frame);

struct MetricReport {
  std::string method;
  double normalized_hv = 0.0;
  double hv = 0.0;
  std::optional<double> gap;  // (HV_ref - HV) / HV_ref against the reference method
  std::optional<double> igd;
  double runtime_s = 0.0;
  std::size_t size = 0;
  nlohmann::json extra = nlohmann::json::object();
};

MetricReport metric_report(const std::string& method, std::span<const Point> points, const MetricFrame& frame,
                           double runtime_s, std::optional<double> reference_hv = std::nullopt,
                           std::span<const Point> exact_front = {});
nlohmann::json to_json(const MetricReport& report);

}  // namespace moco
