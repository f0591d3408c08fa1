#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "moco/model.hpp"
#include "moco/optimizer.hpp"
#include "moco/scalarization.hpp"

namespace moco {

struct TrainConfig {
  ProblemKind kind = ProblemKind::motsp;
  int n = 20;
  int m = 2;
  ModelConfig model;
  int epochs = 1;
  int steps_per_epoch = 100;
  int prefs_per_step = 1;  // K
  int batch = 64;          // B
  int rollouts = 0;        // N; 0 = n
  AdamConfig adam;
  std::uint64_t seed = 0;
  ScalarizationRecipe recipe;
  bool normalize_advantage = false;
  double grad_clip = 0.0;  // global L2 norm; 0 = off
  bool parallel = true;

  int rollout_count() const { return rollouts > 0 ? rollouts : n; }
  long total_steps() const { return static_cast<long>(epochs) * steps_per_epoch; }
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct GradientOptions {
  int rollouts = 2;
  ScalarizationRecipe recipe;
  bool use_baseline = true;
  bool normalize_advantage = false;
  bool random_starts = true;  // random subset when rollouts < n, else the first N
  bool parallel = true;
};

struct RolloutRecord {
  int preference = 0;
  int instance = 0;
  Solution solution;
  double cost = 0.0;
  double advantage = 0.0;
};

struct GradientEstimate {
  std::vector<tensor::Array<float>> grads;  // per parameter slot
  std::vector<RolloutRecord> rollouts;
  double loss = 0.0;
  double mean_cost = 0.0;
  double mean_advantage = 0.0;
  double max_group_advantage_sum = 0.0;  // |sum of advantages| over the worst (k, i) group
};

// REINFORCE with the shared multi-start baseline:
//   grad = 1/(K B N) sum_{k,i,j} (L_kij - b_ki) grad log p_kij.
// Every (preference, instance) pair gets N sampled rollouts from distinct
// forced starts. Deterministic for a given seed regardless of threading.
GradientEstimate estimate_gradient(const Policy<float>& policy, std::span<const ProblemInstance> instances,
                                   std::span<const Preference> preferences, const GradientOptions& options,
                                   std::uint64_t seed);

struct StepDiagnostics {
  long step = 0;
  double mean_cost = 0.0;
  double mean_advantage = 0.0;
  double max_group_advantage_sum = 0.0;
  double grad_norm = 0.0;
  bool finite = true;
  std::string problem;  // why the step was skipped
};

// Returns the name of the first slot holding a non-finite value, or "".
std::string first_nonfinite(const std::vector<tensor::Array<float>>& arrays, const ParamLayout& layout);

// One update: K preferences, then B fresh instances, both drawn from rng.
// A non-finite gradient leaves the parameters and moments untouched.
StepDiagnostics train_step(Policy<float>& policy, AdamState& adam, const TrainConfig& config, Rng& rng);

struct CurveRow {
  long step = 0;
  int epoch = 0;
  double mean_cost = 0.0;
  double mean_advantage = 0.0;
  double wall_time = 0.0;
};

void write_curve_header(std::ostream& os);
void write_curve_row(std::ostream& os, const CurveRow& row);

struct TrainRun {
  std::string out_dir;  // empty: no files
  bool resume = false;  // continue from out_dir/latest.ckpt when present
  std::function<void(const StepDiagnostics&)> on_step;
};

struct TrainResult {
  Policy<float> policy;
  AdamState adam;
  std::vector<CurveRow> curve;
  long skipped_steps = 0;
};

// Checkpoints out_dir/epoch_<e>.ckpt and out_dir/latest.ckpt after every
// epoch, appends to out_dir/curve.csv.
TrainResult train(Policy<float> policy, const TrainConfig& config, const TrainRun& run = {});

}  // namespace moco
