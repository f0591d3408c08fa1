#include "moco/adapt.hpp"

#include <chrono>

#include "moco/errors.hpp"
#include "moco/trainer.hpp"

namespace moco {

void AdaptConfig::validate() const {
  if (steps < 0) throw ConfigError("adaptation steps must be nonnegative");
  if (prefs_per_step < 1) throw ConfigError("K must be positive");
  if (!(adam.lr >= 0)) throw ConfigError("learning rate must be nonnegative");
  if (time_budget_s < 0) throw ConfigError("time budget must be nonnegative");
  if (eval_preferences < 1) throw ConfigError("eval_preferences must be positive");
}

AdaptResult adapt(const Policy<float>& policy, const ProblemInstance& instance, const AdaptConfig& config) {
  config.validate();
  const int N = config.rollouts > 0 ? config.rollouts : instance.n;
  if (N < 2 || N > instance.n) throw ConfigError("adaptation needs 2 <= N <= n, got N = " + std::to_string(N));
  const Sense sense = sense_of(instance.kind);
  AdaptResult res{policy, ParetoArchive(sense), {}, {}, 0};

  InferenceOptions inf;
  inf.recipe = config.recipe;
  inf.parallel = config.parallel;
  const auto prefs = default_preferences(instance.m, config.eval_preferences);
  const auto zero_shot = solve_front(policy, encode_instance(policy, instance, false), prefs, inf);
  double zero_cost = 0.0;
  for (const auto& r : zero_shot) {
    res.archive.offer(r.solution.objectives, r.preference.weights(), r.solution);
    zero_cost += r.cost / static_cast<double>(zero_shot.size());
  }
  {
    const std::vector<std::vector<Point>> sets{res.archive.minimization_points()};
    res.reference = reference_point(sets);
  }
  res.curve.push_back({0, clipped_hypervolume(res.archive.minimization_points(), res.reference), zero_cost});

  AdamState adam = AdamState::zeros_like(res.policy.values);
  Rng rng(config.seed);
  GradientOptions opt;
  opt.rollouts = N;
  opt.recipe = config.recipe;
  opt.parallel = config.parallel;
  const std::vector<ProblemInstance> batch{instance};
  const auto start = std::chrono::steady_clock::now();
  for (int step = 1; step <= config.steps; ++step) {
    if (config.time_budget_s > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= config.time_budget_s)
      break;
    std::vector<Preference> step_prefs;
    for (int k = 0; k < config.prefs_per_step; ++k) step_prefs.push_back(sample_preference(instance.m, rng));
    auto est = estimate_gradient(res.policy, batch, step_prefs, opt, rng());
    for (auto& r : est.rollouts) {
      Point objectives = r.solution.objectives;
      res.archive.offer(std::move(objectives), step_prefs[r.preference].weights(), std::move(r.solution));
    }
    if (first_nonfinite(est.grads, res.policy.layout).empty() && config.adam.lr > 0)
      adam_update(res.policy.values, est.grads, adam, config.adam);
    res.curve.push_back({step, clipped_hypervolume(res.archive.minimization_points(), res.reference), est.mean_cost});
    res.steps_run = step;
  }
  return res;
}

}  // namespace moco
