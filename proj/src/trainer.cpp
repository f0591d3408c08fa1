#include "moco/trainer.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "moco/checkpoint.hpp"
#include "moco/errors.hpp"

namespace moco {

namespace tn = tensor;
using nlohmann::json;

void TrainConfig::validate() const {
  model.validate();
  if (n < 2 || m < 2) throw ConfigError("training needs n >= 2 and m >= 2");
  if (epochs < 0 || steps_per_epoch < 1) throw ConfigError("epochs must be >= 0 and steps_per_epoch >= 1");
  if (prefs_per_step < 1 || batch < 1) throw ConfigError("K and B must be positive");
  if (rollout_count() < 2) throw ConfigError("N must be at least 2 for the shared baseline");
  if (rollout_count() > n)
    throw ConfigError("N = " + std::to_string(rollout_count()) + " exceeds the " + std::to_string(n) +
                      " distinct start actions");
  if (!(adam.lr > 0)) throw ConfigError("learning rate must be positive");
  if (adam.weight_decay < 0) throw ConfigError("weight decay must be nonnegative");
  if (grad_clip < 0) throw ConfigError("grad_clip must be nonnegative");
}

json to_json(const TrainConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"n", c.n},
          {"m", c.m},
          {"model", to_json(c.model)},
          {"epochs", c.epochs},
          {"steps_per_epoch", c.steps_per_epoch},
          {"prefs_per_step", c.prefs_per_step},
          {"batch", c.batch},
          {"rollouts", c.rollout_count()},
          {"lr", c.adam.lr},
          {"beta1", c.adam.beta1},
          {"beta2", c.adam.beta2},
          {"adam_eps", c.adam.eps},
          {"weight_decay", c.adam.weight_decay},
          {"seed", c.seed},
          {"scalarization",
           {{"method", to_string(c.recipe.method)}, {"epsilon", c.recipe.epsilon}, {"theta", c.recipe.theta}}},
          {"normalize_advantage", c.normalize_advantage},
          {"grad_clip", c.grad_clip}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  c.n = j.at("n");
  c.m = j.at("m");
  c.model = model_config_from_json(j.at("model"));
  c.epochs = j.at("epochs");
  c.steps_per_epoch = j.at("steps_per_epoch");
  c.prefs_per_step = j.at("prefs_per_step");
  c.batch = j.at("batch");
  c.rollouts = j.at("rollouts");
  c.adam.lr = j.at("lr");
  c.adam.beta1 = j.at("beta1");
  c.adam.beta2 = j.at("beta2");
  c.adam.eps = j.at("adam_eps");
  c.adam.weight_decay = j.at("weight_decay");
  c.seed = j.at("seed");
  const auto& s = j.at("scalarization");
  c.recipe.method = parse_aggregation(s.at("method").get<std::string>());
  c.recipe.epsilon = s.at("epsilon");
  c.recipe.theta = s.at("theta");
  c.normalize_advantage = j.at("normalize_advantage");
  c.grad_clip = j.at("grad_clip");
  return c;
}

namespace {

struct ItemResult {
  std::vector<tn::Array<float>> encoder_grads;
  std::vector<std::vector<float>> bundle_grads;  // per preference
  std::vector<RolloutRecord> rollouts;
  double loss = 0.0;
};

ItemResult run_item(const Policy<float>& policy, const ProblemInstance& inst, int item,
                    std::span<const Preference> prefs, const std::vector<tn::Array<float>>& bundles,
                    const GradientOptions& opt, double scale, std::uint64_t seed) {
  Rng rng(seed);
  const int N = opt.rollouts;
  RolloutOptions ro;
  ro.mode = DecodeMode::sample;
  ro.starts = start_actions(inst.n, N, opt.random_starts ? &rng : nullptr);

  tn::Tape<float> t(true);
  const auto bound = bind(t, policy, BindScope::encoder);
  const tn::Var h = encode(t, policy, bound, inst);
  const ScalarizationSpec base_spec = resolve(opt.recipe, inst);

  ItemResult res;
  std::vector<tn::Var> leaves;
  tn::Var loss;
  for (std::size_t k = 0; k < prefs.size(); ++k) {
    const tn::Var leaf = t.leaf(bundles[k]);
    leaves.push_back(leaf);
    const auto ctx = prepare_decoder(t, policy, bound, h, leaf);
    auto out = rollout(t, ctx, inst, ro, &rng);

    std::vector<std::vector<double>> objs;
    for (auto& s : out.solutions) {
      s.objectives = evaluate(inst, s);
      objs.push_back(s.objectives);
    }
    ScalarizationSpec spec = base_spec;
    if (spec.method == Aggregation::ipbi) spec = with_group_nadir(spec, objs);
    std::vector<double> cost(N), adv(N);
    double mean = 0.0;
    for (int j = 0; j < N; ++j) {
      cost[j] = scalarize(objs[j], prefs[k], spec);
      mean += cost[j] / N;
    }
    for (int j = 0; j < N; ++j) adv[j] = opt.use_baseline ? cost[j] - mean : cost[j];
    if (opt.normalize_advantage) {
      double var = 0.0;
      for (double a : adv) var += a * a / N;
      const double sd = std::sqrt(var) + 1e-8;
      for (double& a : adv) a /= sd;
    }
    std::vector<float> coef(N);
    for (int j = 0; j < N; ++j) coef[j] = static_cast<float>(adv[j] * scale);
    for (const tn::Var v : out.step_log_probs) {
      const tn::Var term = tn::dot_const(t, v, std::span<const float>(coef));
      loss = loss.valid() ? tn::add(t, loss, term) : term;
    }
    for (int j = 0; j < N; ++j)
      res.rollouts.push_back({static_cast<int>(k), item, std::move(out.solutions[j]), cost[j], adv[j]});
  }
  std::vector<tn::Shape> shapes;
  for (const auto& s : policy.layout.specs) shapes.push_back(s.shape);
  if (loss.valid()) {
    res.loss = t.value(loss).item();
    t.backward(loss);
  }
  res.encoder_grads = t.slot_gradients(shapes);
  for (const tn::Var leaf : leaves) {
    const auto& g = t.node(leaf).grad;
    res.bundle_grads.push_back(g.empty() ? std::vector<float>(t.value(leaf).size(), 0.0f) : g);
  }
  return res;
}

}  // namespace

GradientEstimate estimate_gradient(const Policy<float>& policy, std::span<const ProblemInstance> instances,
                                   std::span<const Preference> prefs, const GradientOptions& opt,
                                   std::uint64_t seed) {
  if (instances.empty() || prefs.empty()) throw ContractViolation("estimate_gradient needs instances and preferences");
  for (const auto& inst : instances)
    if (opt.rollouts < 1 || opt.rollouts > inst.n)
      throw ConfigError("N = " + std::to_string(opt.rollouts) + " rollouts for an instance with n = " +
                        std::to_string(inst.n));
  const int K = static_cast<int>(prefs.size());
  const int B = static_cast<int>(instances.size());
  const double scale = 1.0 / (static_cast<double>(K) * B * opt.rollouts);

  // The hypernetwork runs once per preference; its output enters every
  // instance tape as a leaf, and the leaf gradients are pulled back here.
  tn::Tape<float> hyper(true);
  const auto hb = bind(hyper, policy, BindScope::hyper);
  std::vector<tn::Var> bundle_vars;
  std::vector<tn::Array<float>> bundles;
  for (const auto& w : prefs) {
    bundle_vars.push_back(hypernet(hyper, policy, hb, w));
    bundles.push_back(hyper.value(bundle_vars.back()));
  }

  std::vector<ItemResult> items(B);
  const auto work = [&](int i) {
    items[i] = run_item(policy, instances[i], i, prefs, bundles, opt, scale, mix_seed(seed, static_cast<std::uint64_t>(i)));
  };
  if (opt.parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < B; ++i) {
      try {
        work(i);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (int i = 0; i < B; ++i) work(i);
  }

  GradientEstimate est;
  est.grads = std::move(items[0].encoder_grads);
  for (int i = 1; i < B; ++i)
    for (std::size_t s = 0; s < est.grads.size(); ++s) {
      auto& dst = est.grads[s].data;
      const auto& src = items[i].encoder_grads[s].data;
      for (std::size_t x = 0; x < dst.size(); ++x) dst[x] += src[x];
    }

  tn::Var hloss;
  for (int k = 0; k < K; ++k) {
    std::vector<float> g(bundles[k].size(), 0.0f);
    for (int i = 0; i < B; ++i)
      for (std::size_t x = 0; x < g.size(); ++x) g[x] += items[i].bundle_grads[k][x];
    const tn::Var term = tn::dot_const(hyper, bundle_vars[k], std::span<const float>(g));
    hloss = hloss.valid() ? tn::add(hyper, hloss, term) : term;
  }
  hyper.backward(hloss);
  std::vector<tn::Shape> shapes;
  for (const auto& s : policy.layout.specs) shapes.push_back(s.shape);
  const auto hg = hyper.slot_gradients(shapes);
  for (std::size_t s = 0; s < est.grads.size(); ++s)
    if (policy.layout.is_hyper(static_cast<int>(s))) est.grads[s] = hg[s];

  double cost = 0.0, adv = 0.0;
  std::size_t count = 0;
  for (auto& item : items) {
    est.loss += item.loss;
    std::vector<double> group(K, 0.0);
    for (auto& r : item.rollouts) {
      cost += r.cost;
      adv += r.advantage;
      group[r.preference] += r.advantage;
      ++count;
      est.rollouts.push_back(std::move(r));
    }
    for (double g : group) est.max_group_advantage_sum = std::max(est.max_group_advantage_sum, std::abs(g));
  }
  est.mean_cost = cost / static_cast<double>(count);
  est.mean_advantage = adv / static_cast<double>(count);
  return est;
}

std::string first_nonfinite(const std::vector<tn::Array<float>>& arrays, const ParamLayout& layout) {
  for (std::size_t s = 0; s < arrays.size(); ++s)
    for (float x : arrays[s].data)
      if (!std::isfinite(x)) return s < layout.specs.size() ? layout.specs[s].name : "slot " + std::to_string(s);
  return "";
}

StepDiagnostics train_step(Policy<float>& policy, AdamState& adam, const TrainConfig& config, Rng& rng) {
  std::vector<Preference> prefs;
  for (int k = 0; k < config.prefs_per_step; ++k) prefs.push_back(sample_preference(config.m, rng));
  std::vector<ProblemInstance> instances;
  for (int i = 0; i < config.batch; ++i) instances.push_back(sample_instance(config.kind, config.n, config.m, rng()));
  const std::uint64_t rollout_seed = rng();

  GradientOptions opt;
  opt.rollouts = config.rollout_count();
  opt.recipe = config.recipe;
  opt.normalize_advantage = config.normalize_advantage;
  opt.parallel = config.parallel;
  auto est = estimate_gradient(policy, instances, prefs, opt, rollout_seed);

  StepDiagnostics d;
  d.step = adam.step;
  d.mean_cost = est.mean_cost;
  d.mean_advantage = est.mean_advantage;
  d.max_group_advantage_sum = est.max_group_advantage_sum;
  double sq = 0.0;
  for (const auto& g : est.grads)
    for (float x : g.data) sq += static_cast<double>(x) * x;
  d.grad_norm = std::sqrt(sq);
  std::string bad = std::isfinite(est.loss) ? first_nonfinite(est.grads, policy.layout) : "loss";
  if (bad.empty() && !std::isfinite(d.grad_norm)) bad = "gradient norm";
  if (!bad.empty()) {
    d.finite = false;
    d.problem = "non-finite " + bad + " (mean cost " + std::to_string(est.mean_cost) + ", loss " +
                std::to_string(est.loss) + ")";
    return d;
  }
  if (config.grad_clip > 0 && d.grad_norm > config.grad_clip) {
    const float f = static_cast<float>(config.grad_clip / d.grad_norm);
    for (auto& g : est.grads)
      for (float& x : g.data) x *= f;
  }
  auto next = policy.values;
  AdamState next_adam = adam;
  adam_update(next, est.grads, next_adam, config.adam);
  const std::string after = first_nonfinite(next, policy.layout);
  if (!after.empty()) {
    d.finite = false;
    d.problem = "update made " + after + " non-finite";
    return d;
  }
  policy.values = std::move(next);
  adam = std::move(next_adam);
  return d;
}

void write_curve_header(std::ostream& os) { os << "step,epoch,mean_cost,mean_advantage,wall_time\n"; }

void write_curve_row(std::ostream& os, const CurveRow& r) {
  os << r.step << ',' << r.epoch << ',' << std::setprecision(17) << r.mean_cost << ',' << r.mean_advantage << ','
     << std::setprecision(6) << r.wall_time << '\n';
}

namespace {

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void restore_rng(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
  if (!is) throw ConfigError("corrupt random generator state in checkpoint");
}

}  // namespace

TrainResult train(Policy<float> policy, const TrainConfig& config, const TrainRun& run) {
  config.validate();
  if (policy.kind != config.kind || policy.m != config.m)
    throw ConfigError("policy is for " + to_string(policy.kind) + " m=" + std::to_string(policy.m) +
                      ", config asks for " + to_string(config.kind) + " m=" + std::to_string(config.m));
  TrainResult res;
  res.adam = AdamState::zeros_like(policy.values);
  Rng rng(config.seed);
  long step = 0;

  namespace fs = std::filesystem;
  const bool files = !run.out_dir.empty();
  const fs::path dir(run.out_dir);
  if (files) fs::create_directories(dir);
  if (files && run.resume && fs::exists(dir / "latest.ckpt")) {
    auto ckpt = load_checkpoint((dir / "latest.ckpt").string());
    if (!ckpt.optimizer) throw ConfigError("latest.ckpt has no optimizer state to resume from");
    policy = std::move(ckpt.policy);
    res.adam = std::move(*ckpt.optimizer);
    const auto& tr = ckpt.metadata.at("training");
    step = tr.at("step");
    restore_rng(rng, tr.at("rng").get<std::string>());
    res.skipped_steps = tr.value("skipped_steps", 0L);
    // Keep only the curve rows up to the checkpoint.
    std::ifstream in(dir / "curve.csv");
    std::string line;
    std::ostringstream kept;
    if (std::getline(in, line)) kept << line << '\n';
    while (std::getline(in, line)) {
      if (std::stol(line.substr(0, line.find(','))) > step) break;
      kept << line << '\n';
    }
    in.close();
    std::ofstream(dir / "curve.csv", std::ios::trunc) << kept.str();
  } else if (files) {
    std::ofstream os(dir / "curve.csv", std::ios::trunc);
    write_curve_header(os);
  }

  std::ofstream curve;
  if (files) curve.open(dir / "curve.csv", std::ios::app);
  const auto start = std::chrono::steady_clock::now();
  const long total = config.total_steps();
  while (step < total) {
    const int epoch = static_cast<int>(step / config.steps_per_epoch);
    auto d = train_step(policy, res.adam, config, rng);
    ++step;
    d.step = step;
    if (!d.finite) ++res.skipped_steps;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const CurveRow row{step, epoch, d.mean_cost, d.mean_advantage, wall};
    res.curve.push_back(row);
    if (files) {
      write_curve_row(curve, row);
      curve.flush();
    }
    if (run.on_step) run.on_step(d);
    if (files && step % config.steps_per_epoch == 0) {
      Checkpoint ckpt;
      ckpt.policy = policy;
      ckpt.recipe = config.recipe;
      ckpt.seed = config.seed;
      ckpt.optimizer = res.adam;
      ckpt.metadata = {{"training",
                        {{"config", to_json(config)},
                         {"step", step},
                         {"epoch", epoch + 1},
                         {"rng", rng_state(rng)},
                         {"skipped_steps", res.skipped_steps}}}};
      save_checkpoint((dir / ("epoch_" + std::to_string(epoch + 1) + ".ckpt")).string(), ckpt);
      save_checkpoint((dir / "latest.ckpt").string(), ckpt);
    }
  }
  res.policy = std::move(policy);
  return res;
}

}  // namespace moco
