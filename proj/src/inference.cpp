#include "moco/inference.hpp"

#include <exception>
#include <limits>

#include "moco/errors.hpp"

namespace moco {

namespace tn = tensor;

EncodedInstance encode_instance(const Policy<float>& policy, const ProblemInstance& instance, bool augment) {
  EncodedInstance out;
  if (augment) out.variants = moco::augment(instance);
  if (out.variants.empty()) out.variants.push_back(instance);
  for (const auto& v : out.variants) {
    tn::Tape<float> t(false);
    const auto bound = bind(t, policy, BindScope::encoder);
    out.embeddings.push_back(t.value(encode(t, policy, bound, v)));
  }
  return out;
}

std::vector<float> decoder_bundle(const Policy<float>& policy, const Preference& preference) {
  tn::Tape<float> t(false);
  const auto bound = bind(t, policy, BindScope::hyper);
  return t.value(hypernet(t, policy, bound, preference)).data;
}

namespace {

// Binds just the non-hyper slots the decoder reads.
std::vector<tn::Var> decoder_slots(tn::Tape<float>& t, const Policy<float>& p) {
  std::vector<tn::Var> bound(p.values.size());
  for (int s : {p.layout.first_placeholder, p.layout.last_placeholder, p.layout.capacity_w})
    if (s >= 0) bound[s] = t.constant(p.values[s]);
  return bound;
}

}  // namespace

PreferenceResult solve_preference(const Policy<float>& policy, const EncodedInstance& encoded,
                                  const Preference& preference, const InferenceOptions& options,
                                  std::uint64_t index) {
  if (encoded.variants.empty()) throw ContractViolation("empty encoded instance");
  if (preference.size() != policy.m)
    throw ContractViolation("preference of size " + std::to_string(preference.size()) + " for m=" +
                            std::to_string(policy.m));
  const ProblemInstance& base = encoded.variants[0];
  const int n = base.n;
  const int starts = options.starts <= 0 ? n : std::min(options.starts, n);
  RolloutOptions ro;
  ro.mode = options.mode;
  const auto first = start_actions(n, starts, nullptr);
  const int reps = options.mode == DecodeMode::sample ? std::max(1, options.samples) : 1;
  for (int r = 0; r < reps; ++r) ro.starts.insert(ro.starts.end(), first.begin(), first.end());
  Rng rng(mix_seed(options.seed, index));

  const tn::Array<float> bundle_value({1, policy.config.bundle_size()}, decoder_bundle(policy, preference));

  std::vector<Solution> candidates;
  std::vector<int> origin;
  for (std::size_t v = 0; v < encoded.variants.size(); ++v) {
    tn::Tape<float> t(false);
    const auto bound = decoder_slots(t, policy);
    const tn::Var bundle = t.constant(bundle_value);
    const tn::Var h = t.constant(encoded.embeddings[v]);
    const auto ctx = prepare_decoder(t, policy, bound, h, bundle);
    auto out = rollout(t, ctx, encoded.variants[v], ro, &rng);
    for (auto& s : out.solutions) {
      s.objectives = evaluate(base, s);
      candidates.push_back(std::move(s));
      origin.push_back(static_cast<int>(v));
    }
  }

  ScalarizationSpec spec = resolve(options.recipe, base);
  if (spec.method == Aggregation::ipbi) {
    std::vector<std::vector<double>> group;
    for (const auto& s : candidates) group.push_back(s.objectives);
    spec = with_group_nadir(spec, group);
  }
  PreferenceResult best;
  best.preference = preference;
  best.cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double c = scalarize(candidates[i].objectives, preference, spec);
    if (c < best.cost) {
      best.cost = c;
      best.solution = candidates[i];
      best.variant = origin[i];
    }
  }
  return best;
}

std::vector<PreferenceResult> solve_front(const Policy<float>& policy, const EncodedInstance& encoded,
                                          std::span<const Preference> preferences, const InferenceOptions& options) {
  std::vector<PreferenceResult> out(preferences.size());
  const long count = static_cast<long>(preferences.size());
  if (options.parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < count; ++k) {
      try {
        out[k] = solve_preference(policy, encoded, preferences[k], options, static_cast<std::uint64_t>(k));
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (long k = 0; k < count; ++k)
      out[k] = solve_preference(policy, encoded, preferences[k], options, static_cast<std::uint64_t>(k));
  }
  return out;
}

ParetoArchive archive_of(std::span<const PreferenceResult> results, Sense sense) {
  ParetoArchive archive(sense);
  for (const auto& r : results) archive.offer(r.solution.objectives, r.preference.weights(), r.solution);
  return archive;
}

std::vector<Preference> default_preferences(int m, int count) {
  if (m == 2) return uniform_grid(count);
  return das_dennis_weights(m, count);
}

}  // namespace moco
