#include "moco/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "moco/errors.hpp"

namespace moco {

namespace tn = tensor;
using tn::Var;

void ModelConfig::validate() const {
  if (embed_dim <= 0 || layers <= 0 || heads <= 0 || ff_dim <= 0)
    throw ConfigError("model dimensions must be positive");
  if (embed_dim % heads != 0)
    throw ConfigError("embed_dim " + std::to_string(embed_dim) + " not divisible by " + std::to_string(heads) +
                      " heads");
  if (hyper_hidden1 <= 0 || hyper_hidden2 <= 0 || hyper_embed <= 0)
    throw ConfigError("hypernetwork dimensions must be positive");
  if (!(logit_clip > 0.0)) throw ConfigError("logit clip must be positive");
}

ModelConfig ModelConfig::desk() { return {}; }

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.embed_dim = 128;
  c.layers = 6;
  c.heads = 8;
  c.ff_dim = 512;
  c.hyper_hidden1 = 128;
  c.hyper_hidden2 = 128;
  c.hyper_embed = 2;
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw ConfigError("unknown model preset '" + name + "' (expected desk or paper)");
}

int input_width(ProblemKind kind, int m) {
  switch (kind) {
    case ProblemKind::motsp:
      return 2 * m;
    case ProblemKind::mocvrp:
      return 3;
    case ProblemKind::mokp:
      return m + 1;
  }
  return 0;
}

ParamLayout ParamLayout::build(const ModelConfig& c, ProblemKind kind, int m) {
  c.validate();
  ParamLayout L;
  const int d = c.embed_dim;
  const auto add = [&](std::string name, tn::Shape shape) {
    L.specs.push_back({std::move(name), std::move(shape)});
    return static_cast<int>(L.specs.size()) - 1;
  };
  L.in_w = add("encoder.input.weight", {input_width(kind, m), d});
  L.in_b = add("encoder.input.bias", {d});
  if (kind == ProblemKind::mocvrp) {
    L.depot_w = add("encoder.depot.weight", {2, d});
    L.depot_b = add("encoder.depot.bias", {d});
  }
  for (int l = 0; l < c.layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    Layer y{};
    y.wq = add(p + "attn.wq", {d, d});
    y.wk = add(p + "attn.wk", {d, d});
    y.wv = add(p + "attn.wv", {d, d});
    y.wo = add(p + "attn.wo", {d, d});
    y.norm1_g = add(p + "norm1.gain", {d});
    y.norm1_b = add(p + "norm1.bias", {d});
    y.ff1_w = add(p + "ff1.weight", {d, c.ff_dim});
    y.ff1_b = add(p + "ff1.bias", {c.ff_dim});
    y.ff2_w = add(p + "ff2.weight", {c.ff_dim, d});
    y.ff2_b = add(p + "ff2.bias", {d});
    y.norm2_g = add(p + "norm2.gain", {d});
    y.norm2_b = add(p + "norm2.bias", {d});
    L.layers.push_back(y);
  }
  if (kind != ProblemKind::mocvrp) {
    L.first_placeholder = add("decoder.first_placeholder", {1, d});
    L.last_placeholder = add("decoder.last_placeholder", {1, d});
  }
  if (kind != ProblemKind::motsp) L.capacity_w = add("decoder.capacity.weight", {1, d});
  L.h1_w = add("hyper.fc1.weight", {m, c.hyper_hidden1});
  L.h1_b = add("hyper.fc1.bias", {c.hyper_hidden1});
  L.h2_w = add("hyper.fc2.weight", {c.hyper_hidden1, c.hyper_hidden2});
  L.h2_b = add("hyper.fc2.bias", {c.hyper_hidden2});
  L.h3_w = add("hyper.fc3.weight", {c.hyper_hidden2, c.hyper_embed});
  L.h3_b = add("hyper.fc3.bias", {c.hyper_embed});
  L.out_w = add("hyper.projection.weight", {c.hyper_embed, c.bundle_size()});
  L.out_b = add("hyper.projection.bias", {c.bundle_size()});
  return L;
}

std::size_t ParamLayout::total_size() const {
  std::size_t n = 0;
  for (const auto& s : specs) n += tn::shape_size(s.shape);
  return n;
}

template <class T>
Policy<T> Policy<T>::zeros(const ModelConfig& config, ProblemKind kind, int m) {
  Policy p;
  p.config = config;
  p.kind = kind;
  p.m = m;
  p.layout = ParamLayout::build(config, kind, m);
  for (const auto& s : p.layout.specs) p.values.emplace_back(s.shape, T(0));
  return p;
}

template <class T>
Policy<T> Policy<T>::initialized(const ModelConfig& config, ProblemKind kind, int m, std::uint64_t seed) {
  Policy p = zeros(config, kind, m);
  const auto& L = p.layout;
  const int d = config.embed_dim;
  Rng rng(seed);
  const auto uniform = [&](int slot, double bound) {
    for (auto& x : p.values[slot].data) x = static_cast<T>(bound * (2.0 * uniform01(rng) - 1.0));
  };
  // Linear layers: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias.
  const auto linear = [&](int w, int b) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.values[w].rows()));
    uniform(w, bound);
    if (b >= 0) uniform(b, bound);
  };
  linear(L.in_w, L.in_b);
  if (L.depot_w >= 0) linear(L.depot_w, L.depot_b);
  for (const auto& y : L.layers) {
    for (int w : {y.wq, y.wk, y.wv, y.wo}) linear(w, -1);
    std::fill(p.values[y.norm1_g].data.begin(), p.values[y.norm1_g].data.end(), T(1));
    std::fill(p.values[y.norm2_g].data.begin(), p.values[y.norm2_g].data.end(), T(1));
    linear(y.ff1_w, y.ff1_b);
    linear(y.ff2_w, y.ff2_b);
  }
  if (L.first_placeholder >= 0) {
    uniform(L.first_placeholder, 1.0);
    uniform(L.last_placeholder, 1.0);
  }
  if (L.capacity_w >= 0) uniform(L.capacity_w, 1.0);
  linear(L.h1_w, L.h1_b);
  linear(L.h2_w, L.h2_b);
  linear(L.h3_w, L.h3_b);
  // The projection bias starts at a regular initialization of the decoder
  // matrices; the weight adds a preference-dependent part of similar size.
  const double dec_bound = 1.0 / std::sqrt(static_cast<double>(d));
  uniform(L.out_w, dec_bound / std::sqrt(static_cast<double>(config.hyper_embed)));
  auto& b = p.values[L.out_b].data;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double bound = i < static_cast<std::size_t>(2 * d * d) ? 1.0 / std::sqrt(2.0 * d) : dec_bound;
    b[i] = static_cast<T>(bound * (2.0 * uniform01(rng) - 1.0));
  }
  return p;
}

template <class T>
std::vector<Var> bind(tn::Tape<T>& tape, const Policy<T>& policy, BindScope scope) {
  std::vector<Var> out(policy.values.size());
  for (std::size_t s = 0; s < policy.values.size(); ++s) {
    const bool hyper = policy.layout.is_hyper(static_cast<int>(s));
    const bool take = scope == BindScope::all || (scope == BindScope::hyper) == hyper;
    if (take) out[s] = tape.parameter(static_cast<int>(s), policy.values[s]);
  }
  return out;
}

namespace {

void require_bound(const std::vector<Var>& bound, int slot, const char* what) {
  if (slot < 0 || slot >= static_cast<int>(bound.size()) || !bound[slot].valid())
    throw ContractViolation(std::string("parameter not bound: ") + what);
}

template <class T>
Var linear(tn::Tape<T>& t, Var x, Var w, Var b) {
  return tn::add_row(t, tn::matmul(t, x, w), b);
}

}  // namespace

template <class T>
Var encode(tn::Tape<T>& t, const Policy<T>& policy, const std::vector<Var>& bound, const ProblemInstance& inst) {
  if (inst.kind != policy.kind)
    throw ConfigError("model trained for " + to_string(policy.kind) + " given a " + to_string(inst.kind) +
                      " instance");
  if (inst.m != policy.m)
    throw ConfigError("model expects " + std::to_string(policy.m) + " objectives, instance has " +
                      std::to_string(inst.m));
  const auto& L = policy.layout;
  const auto& c = policy.config;
  require_bound(bound, L.in_w, "encoder input");
  const int w = input_width(inst.kind, inst.m);
  tn::Array<T> x = tn::Array<T>::matrix(inst.n, w);
  for (int j = 0; j < inst.n; ++j) {
    if (inst.kind == ProblemKind::mocvrp) {
      x(j, 0) = static_cast<T>(inst.coords[j][0]);
      x(j, 1) = static_cast<T>(inst.coords[j][1]);
      x(j, 2) = static_cast<T>(inst.demands[j]);
    } else {
      if (static_cast<int>(inst.coords[j].size()) != w)
        throw ConfigError("instance row width " + std::to_string(inst.coords[j].size()) + ", model expects " +
                          std::to_string(w));
      for (int k = 0; k < w; ++k) x(j, k) = static_cast<T>(inst.coords[j][k]);
    }
  }
  Var h = linear(t, t.constant(std::move(x)), bound[L.in_w], bound[L.in_b]);
  if (inst.kind == ProblemKind::mocvrp) {
    // Stack the depot row on top via constant selection matrices.
    tn::Array<T> dx = tn::Array<T>::matrix(1, 2);
    dx(0, 0) = static_cast<T>(inst.depot[0]);
    dx(0, 1) = static_cast<T>(inst.depot[1]);
    Var hd = linear(t, t.constant(std::move(dx)), bound[L.depot_w], bound[L.depot_b]);
    tn::Array<T> top = tn::Array<T>::matrix(inst.n + 1, 1);
    top(0, 0) = T(1);
    tn::Array<T> shift = tn::Array<T>::matrix(inst.n + 1, inst.n);
    for (int j = 0; j < inst.n; ++j) shift(j + 1, j) = T(1);
    h = tn::add(t, tn::matmul(t, t.constant(std::move(top)), hd), tn::matmul(t, t.constant(std::move(shift)), h));
  }
  for (const auto& y : L.layers) {
    const Var q = tn::matmul(t, h, bound[y.wq]);
    const Var k = tn::matmul(t, h, bound[y.wk]);
    const Var v = tn::matmul(t, h, bound[y.wv]);
    const Var mha = tn::matmul(t, tn::attention(t, q, k, v, c.heads), bound[y.wo]);
    h = tn::layer_norm(t, tn::add(t, h, mha), bound[y.norm1_g], bound[y.norm1_b]);
    const Var ff = linear(t, tn::relu(t, linear(t, h, bound[y.ff1_w], bound[y.ff1_b])), bound[y.ff2_w],
                          bound[y.ff2_b]);
    h = tn::layer_norm(t, tn::add(t, h, ff), bound[y.norm2_g], bound[y.norm2_b]);
  }
  return h;
}

template <class T>
Var hypernet(tn::Tape<T>& t, const Policy<T>& policy, const std::vector<Var>& bound, const Preference& pref) {
  const auto& L = policy.layout;
  if (pref.size() != policy.m)
    throw ContractViolation("preference of size " + std::to_string(pref.size()) + " for a model with m=" +
                            std::to_string(policy.m));
  require_bound(bound, L.h1_w, "hypernetwork");
  tn::Array<T> x = tn::Array<T>::matrix(1, pref.size());
  for (int i = 0; i < pref.size(); ++i) x.data[i] = static_cast<T>(pref[i]);
  Var e = tn::relu(t, linear(t, t.constant(std::move(x)), bound[L.h1_w], bound[L.h1_b]));
  e = tn::relu(t, linear(t, e, bound[L.h2_w], bound[L.h2_b]));
  e = linear(t, e, bound[L.h3_w], bound[L.h3_b]);
  return linear(t, e, bound[L.out_w], bound[L.out_b]);
}

template <class T>
DecoderContext<T> prepare_decoder(tn::Tape<T>& t, const Policy<T>& policy, const std::vector<Var>& bound,
                                  Var embeddings, Var bundle) {
  const auto& L = policy.layout;
  const int d = policy.config.embed_dim;
  if (t.value(bundle).size() != static_cast<std::size_t>(policy.config.bundle_size()))
    throw ContractViolation("decoder bundle has " + std::to_string(t.value(bundle).size()) + " values, expected " +
                            std::to_string(policy.config.bundle_size()));
  const int dd = d * d;
  const Var wq_first = tn::slice_reshape(t, bundle, 0, d, d);
  const Var wq_last = tn::slice_reshape(t, bundle, dd, d, d);
  const Var wk = tn::slice_reshape(t, bundle, 2 * dd, d, d);
  const Var wv = tn::slice_reshape(t, bundle, 3 * dd, d, d);
  const Var wmha = tn::slice_reshape(t, bundle, 4 * dd, d, d);

  DecoderContext<T> ctx;
  ctx.q_first = tn::matmul(t, embeddings, wq_first);
  ctx.q_last = tn::matmul(t, embeddings, wq_last);
  ctx.keys = tn::matmul(t, embeddings, wk);
  ctx.values = tn::matmul(t, embeddings, wv);
  // logit_j = C tanh((O W_MHA) . h_j / sqrt(d)) = C tanh(O . (h_j W_MHA^T) / sqrt(d))
  ctx.logit_keys = tn::matmul_nt(t, embeddings, wmha);
  if (L.first_placeholder >= 0) {
    require_bound(bound, L.first_placeholder, "decoder placeholders");
    ctx.placeholder_query = tn::add(t, tn::matmul(t, bound[L.first_placeholder], wq_first),
                                    tn::matmul(t, bound[L.last_placeholder], wq_last));
  }
  if (L.capacity_w >= 0) {
    require_bound(bound, L.capacity_w, "decoder capacity projection");
    ctx.capacity_w = bound[L.capacity_w];
  }
  ctx.heads = policy.config.heads;
  ctx.rows = t.value(embeddings).rows();
  ctx.inv_sqrt_d = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
  ctx.clip = static_cast<T>(policy.config.logit_clip);
  return ctx;
}

std::vector<int> actions_of(const Solution& solution) {
  if (solution.kind != ProblemKind::mocvrp) return solution.order;
  std::vector<int> out;
  for (const auto& r : solution.routes) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<int> start_actions(int n, int count, Rng* rng) {
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (count >= n) return all;
  if (count < 1) throw ConfigError("start count must be positive");
  if (rng) {
    // Partial Fisher-Yates: the first `count` entries are a uniform subset.
    for (int i = 0; i < count; ++i) std::swap(all[i], all[uniform_int(*rng, i, n - 1)]);
  }
  all.resize(count);
  return all;
}

template <class T>
RolloutOutput<T> rollout(tn::Tape<T>& t, const DecoderContext<T>& ctx, const ProblemInstance& inst,
                         const RolloutOptions& opt, Rng* rng, const StepObserver<T>& observer) {
  const bool forced = !opt.starts.empty();
  const int rows = forced ? static_cast<int>(opt.starts.size()) : opt.rollouts;
  if (rows < 1) throw ContractViolation("rollout needs at least one row");
  if (opt.teacher && static_cast<int>(opt.teacher->size()) != rows)
    throw ContractViolation("teacher sequences do not match the rollout count");
  if (opt.mode == DecodeMode::sample && !opt.teacher && !rng)
    throw ContractViolation("sampling needs a random generator");
  const bool vrp = inst.kind == ProblemKind::mocvrp;
  const int offset = vrp ? 1 : 0;  // encoder row of problem index j
  const int cols = ctx.rows;
  if (cols != inst.n + offset) throw ContractViolation("embeddings do not match the instance size");

  std::vector<ConstructionState> states(rows, initial_state(inst));
  std::vector<std::size_t> cursor(rows, 0);
  RolloutOutput<T> out;
  out.log_prob.assign(rows, 0.0);

  const auto teacher_action = [&](int r) {
    const auto& seq = (*opt.teacher)[r];
    if (cursor[r] >= seq.size()) throw ContractViolation("teacher sequence ended before the solution was complete");
    return seq[cursor[r]++];
  };

  if (forced) {
    for (int r = 0; r < rows; ++r) {
      int a = opt.starts[r];
      if (opt.teacher) {
        const int ta = teacher_action(r);
        if (ta != a) throw ContractViolation("teacher sequence disagrees with the forced start");
      }
      apply_action(inst, states[r], a);
    }
  }

  const auto done = [&](int r) { return is_complete(inst, states[r]); };
  std::vector<int> first(rows), last(rows), choice(rows);
  std::vector<std::uint8_t> excluded(static_cast<std::size_t>(rows) * cols);
  for (int step = 0;; ++step) {
    bool any = false;
    for (int r = 0; r < rows; ++r) {
      settle(inst, states[r]);
      any = any || !done(r);
    }
    if (!any) break;

    // Masks: finished rows keep a single admissible column so their step
    // contributes log(1) = 0.
    for (int r = 0; r < rows; ++r) {
      std::uint8_t* ex = &excluded[static_cast<std::size_t>(r) * cols];
      if (done(r)) {
        std::fill(ex, ex + cols, 1);
        ex[0] = 0;
        continue;
      }
      const auto mask = feasible_mask(inst, states[r]);
      std::fill(ex, ex + cols, 1);
      for (int j = 0; j < inst.n; ++j) ex[j + offset] = !mask[j];
    }

    Var q;
    const bool use_placeholder = !vrp && states[0].first < 0;
    if (use_placeholder) {
      std::vector<int> zeros(rows, 0);
      q = tn::gather_rows(t, ctx.placeholder_query, std::span<const int>(zeros));
    } else {
      for (int r = 0; r < rows; ++r) {
        const auto& s = states[r];
        if (vrp) {
          first[r] = 0;
          last[r] = s.current < 0 ? 0 : s.current + 1;
        } else {
          first[r] = s.first;
          last[r] = s.current;
        }
      }
      q = tn::add(t, tn::gather_rows(t, ctx.q_first, std::span<const int>(first)),
                  tn::gather_rows(t, ctx.q_last, std::span<const int>(last)));
    }
    if (ctx.capacity_w.valid()) {
      tn::Array<T> cap = tn::Array<T>::matrix(rows, 1);
      for (int r = 0; r < rows; ++r) cap.data[r] = static_cast<T>(states[r].remaining / inst.capacity);
      q = tn::add(t, q, tn::matmul(t, t.constant(std::move(cap)), ctx.capacity_w));
    }
    const std::span<const std::uint8_t> exs(excluded);
    const Var glimpse = tn::attention(t, q, ctx.keys, ctx.values, ctx.heads, exs);
    const Var clipped =
        tn::scale(t, tn::tanh(t, tn::scale(t, tn::matmul_nt(t, glimpse, ctx.logit_keys), ctx.inv_sqrt_d)), ctx.clip);
    const Var masked = tn::masked_fill(t, clipped, exs, -std::numeric_limits<T>::infinity());
    const Var logp = tn::log_softmax(t, masked);
    const auto& LP = t.value(logp);

    for (int r = 0; r < rows; ++r) {
      const T* lp = &LP(r, 0);
      const std::uint8_t* ex = &excluded[static_cast<std::size_t>(r) * cols];
      if (done(r)) {
        choice[r] = 0;
        continue;
      }
      int col = -1;
      if (opt.teacher) {
        col = teacher_action(r) + offset;
        if (col < 0 || col >= cols || ex[col])
          throw ContractViolation("teacher action " + std::to_string(col - offset) + " is not admissible at step " +
                                  std::to_string(step));
      } else if (opt.mode == DecodeMode::greedy) {
        for (int j = 0; j < cols; ++j)
          if (!ex[j] && (col < 0 || lp[j] > lp[col])) col = j;
      } else {
        const double u = uniform01(*rng);
        double acc = 0.0;
        for (int j = 0; j < cols; ++j) {
          if (ex[j]) continue;
          col = j;
          acc += std::exp(static_cast<double>(lp[j]));
          if (acc > u) break;
        }
      }
      choice[r] = col;
    }
    if (observer) observer(StepView<T>{step, t.value(clipped), LP, excluded});
    const Var picked = tn::pick(t, logp, std::span<const int>(choice));
    out.step_log_probs.push_back(picked);
    const auto& P = t.value(picked);
    for (int r = 0; r < rows; ++r) {
      if (done(r)) continue;
      out.log_prob[r] += static_cast<double>(P.data[r]);
      apply_action(inst, states[r], choice[r] - offset);
    }
  }

  out.solutions.reserve(rows);
  for (int r = 0; r < rows; ++r) {
    if (opt.teacher && cursor[r] != (*opt.teacher)[r].size())
      throw ContractViolation("teacher sequence has actions past the end of the construction");
    out.solutions.push_back(finish(inst, states[r]));
  }
  return out;
}

template struct Policy<float>;
template struct Policy<double>;

#define MOCO_INSTANTIATE(T)                                                                                      \
  template std::vector<Var> bind<T>(tn::Tape<T>&, const Policy<T>&, BindScope);                                 \
  template Var encode<T>(tn::Tape<T>&, const Policy<T>&, const std::vector<Var>&, const ProblemInstance&);     \
  template Var hypernet<T>(tn::Tape<T>&, const Policy<T>&, const std::vector<Var>&, const Preference&);        \
  template DecoderContext<T> prepare_decoder<T>(tn::Tape<T>&, const Policy<T>&, const std::vector<Var>&, Var, \
                                                Var);                                                          \
  template RolloutOutput<T> rollout<T>(tn::Tape<T>&, const DecoderContext<T>&, const ProblemInstance&,         \
                                       const RolloutOptions&, Rng*, const StepObserver<T>&);

MOCO_INSTANTIATE(float)
MOCO_INSTANTIATE(double)

#undef MOCO_INSTANTIATE

}  // namespace moco
