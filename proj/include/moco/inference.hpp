#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "moco/model.hpp"
#include "moco/pareto.hpp"
#include "moco/scalarization.hpp"

namespace moco {

// Preference-independent encoder output for an instance and, optionally, its
// augmented copies (variant 0 is the instance itself).
struct EncodedInstance {
  std::vector<ProblemInstance> variants;
  std::vector<tensor::Array<float>> embeddings;
};

EncodedInstance encode_instance(const Policy<float>& policy, const ProblemInstance& instance, bool augment);

struct InferenceOptions {
  DecodeMode mode = DecodeMode::greedy;
  int starts = 0;   // forced first actions per variant; 0 = one per node (capped at n)
  int samples = 1;  // sample mode: rollouts per start
  std::uint64_t seed = 0;
  bool parallel = true;
  ScalarizationRecipe recipe;
};

struct PreferenceResult {
  Preference preference;
  Solution solution;
  double cost = 0.0;  // scalarized, lower is better
  int variant = 0;
};

std::vector<float> decoder_bundle(const Policy<float>& policy, const Preference& preference);

// Best rollout over starts and variants by scalarized cost. `index` selects
// the random stream in sample mode so results do not depend on scheduling.
PreferenceResult solve_preference(const Policy<float>& policy, const EncodedInstance& encoded,
                                  const Preference& preference, const InferenceOptions& options,
                                  std::uint64_t index = 0);

std::vector<PreferenceResult> solve_front(const Policy<float>& policy, const EncodedInstance& encoded,
                                          std::span<const Preference> preferences, const InferenceOptions& options);

// Non-dominated archive of the per-preference results.
ParetoArchive archive_of(std::span<const PreferenceResult> results, Sense sense);

// Uniform grid for m = 2, Das-Dennis beyond (count = grid size or lattice p).
std::vector<Preference> default_preferences(int m, int count);

}  // namespace moco
