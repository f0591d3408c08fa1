#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "moco/problems.hpp"
#include "moco/rng.hpp"
#include "moco/scalarization.hpp"
#include "moco/tensor.hpp"

namespace moco {

struct ModelConfig {
  int embed_dim = 64;
  int layers = 2;
  int heads = 4;
  int ff_dim = 256;
  int hyper_hidden1 = 64;
  int hyper_hidden2 = 64;
  int hyper_embed = 32;  // compression width of e(lambda)
  double logit_clip = 10.0;

  int head_dim() const { return embed_dim / heads; }
  // Flattened [W_Q (2d x d), W_K, W_V, W_MHA (d x d)].
  int bundle_size() const { return 5 * embed_dim * embed_dim; }
  void validate() const;

  static ModelConfig desk();
  static ModelConfig paper();
  static ModelConfig preset(const std::string& name);
};

// Encoder input width per node row (mocvrp customers; the depot uses 2).
int input_width(ProblemKind kind, int m);

struct ParamSpec {
  std::string name;
  tensor::Shape shape;
};

// Fixed parameter order; checkpoints store values in exactly this order.
struct ParamLayout {
  struct Layer {
    int wq, wk, wv, wo, norm1_g, norm1_b, ff1_w, ff1_b, ff2_w, ff2_b, norm2_g, norm2_b;
  };

  std::vector<ParamSpec> specs;
  int in_w = -1, in_b = -1;
  int depot_w = -1, depot_b = -1;  // mocvrp
  std::vector<Layer> layers;
  int first_placeholder = -1, last_placeholder = -1;  // motsp, mokp
  int capacity_w = -1;                                // mocvrp, mokp
  int h1_w = -1, h1_b = -1, h2_w = -1, h2_b = -1, h3_w = -1, h3_b = -1;
  int out_w = -1, out_b = -1;

  static ParamLayout build(const ModelConfig& config, ProblemKind kind, int m);
  // Slots evaluated once per preference (hypernetwork and its projection).
  bool is_hyper(int slot) const { return slot >= h1_w; }
  std::size_t total_size() const;
};

template <class T>
struct Policy {
  ModelConfig config;
  ProblemKind kind = ProblemKind::motsp;
  int m = 2;
  ParamLayout layout;
  std::vector<tensor::Array<T>> values;

  // Zero parameters with the right shapes.
  static Policy zeros(const ModelConfig& config, ProblemKind kind, int m);
  static Policy initialized(const ModelConfig& config, ProblemKind kind, int m, std::uint64_t seed);

  template <class U>
  Policy<U> cast() const {
    Policy<U> out;
    out.config = config;
    out.kind = kind;
    out.m = m;
    out.layout = layout;
    out.values.reserve(values.size());
    for (const auto& v : values) out.values.push_back(v.template cast<U>());
    return out;
  }

  std::size_t parameter_count() const { return layout.total_size(); }
};

enum class BindScope { all, encoder, hyper };

// Parameter leaves on `tape` for the slots in scope; other entries are invalid
// Vars. Encoder scope includes the decoder's placeholders and capacity
// projection (everything that is not produced per preference).
template <class T>
std::vector<tensor::Var> bind(tensor::Tape<T>& tape, const Policy<T>& policy, BindScope scope);

// Node embeddings [rows x d]; mocvrp row 0 is the depot, customers follow.
template <class T>
tensor::Var encode(tensor::Tape<T>& tape, const Policy<T>& policy, const std::vector<tensor::Var>& bound,
                   const ProblemInstance& instance);

// Decoder parameter bundle [1 x bundle_size] for one preference.
template <class T>
tensor::Var hypernet(tensor::Tape<T>& tape, const Policy<T>& policy, const std::vector<tensor::Var>& bound,
                     const Preference& preference);

template <class T>
struct DecoderContext {
  tensor::Var q_first, q_last;  // H W_Q split into the first / last halves
  tensor::Var keys, values, logit_keys;
  tensor::Var placeholder_query;  // invalid for mocvrp
  tensor::Var capacity_w;         // invalid for motsp
  int heads = 1;
  int rows = 0;
  T inv_sqrt_d = T(1);
  T clip = T(10);
};

template <class T>
DecoderContext<T> prepare_decoder(tensor::Tape<T>& tape, const Policy<T>& policy,
                                  const std::vector<tensor::Var>& bound, tensor::Var embeddings,
                                  tensor::Var bundle);

enum class DecodeMode { greedy, sample };

struct RolloutOptions {
  DecodeMode mode = DecodeMode::greedy;
  // Forced first action per rollout (node, customer or item index). When
  // empty, `rollouts` rollouts let the policy choose their first action.
  std::vector<int> starts;
  int rollouts = 1;
  // Teacher forcing: the complete action sequence per rollout, including a
  // forced start if any.
  const std::vector<std::vector<int>>* teacher = nullptr;
};

template <class T>
struct StepView {
  int step;
  const tensor::Array<T>& clipped_logits;  // before masking
  const tensor::Array<T>& log_probs;
  const std::vector<std::uint8_t>& excluded;  // rows x columns, 1 = masked
};

template <class T>
struct RolloutOutput {
  std::vector<Solution> solutions;
  std::vector<double> log_prob;             // sum over policy-chosen steps
  std::vector<tensor::Var> step_log_probs;  // one [rollouts x 1] Var per decoded step
};

template <class T>
using StepObserver = std::function<void(const StepView<T>&)>;

template <class T>
RolloutOutput<T> rollout(tensor::Tape<T>& tape, const DecoderContext<T>& ctx, const ProblemInstance& instance,
                         const RolloutOptions& options, Rng* rng, const StepObserver<T>& observer = {});

// Action sequence that reproduces `solution` under the construction rules.
std::vector<int> actions_of(const Solution& solution);

// Distinct start actions: every node when count >= n, otherwise a random
// subset drawn from rng (or the first `count` indices when rng is null).
std::vector<int> start_actions(int n, int count, Rng* rng);

extern template struct Policy<float>;
extern template struct Policy<double>;

}  // namespace moco
