#pragma once

#include <cstdint>
#include <vector>

#include "moco/inference.hpp"
#include "moco/model.hpp"
#include "moco/optimizer.hpp"
#include "moco/pareto.hpp"

namespace moco {

struct AdaptConfig {
  int steps = 200;
  int prefs_per_step = 4;  // K
  int rollouts = 0;        // N; 0 = n
  AdamConfig adam;
  double time_budget_s = 0.0;  // 0 = unlimited
  int eval_preferences = 101;  // zero-shot grid size (m = 2) or lattice p (m > 2)
  std::uint64_t seed = 0;
  ScalarizationRecipe recipe;
  bool parallel = true;

  void validate() const;
};

struct AdaptCurveRow {
  int step = 0;
  double hv = 0.0;  // archive hypervolume against the frozen reference point
  double mean_cost = 0.0;
};

struct AdaptResult {
  Policy<float> policy;
  ParetoArchive archive;
  std::vector<AdaptCurveRow> curve;  // row 0 is the zero-shot archive
  Point reference;                   // minimization space, frozen after the zero-shot pass
  int steps_run = 0;
};

// Fine-tunes a copy of the whole model on one instance with the training
// update (B = 1). The archive starts from the zero-shot greedy front and
// receives every sampled rollout.
AdaptResult adapt(const Policy<float>& policy, const ProblemInstance& instance, const AdaptConfig& config);

}  // namespace moco
