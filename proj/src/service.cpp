#include "moco/service.hpp"

#include <chrono>

#include "httplib.h"
#include "moco/adapt.hpp"
#include "moco/baselines.hpp"
#include "moco/errors.hpp"
#include "moco/io.hpp"

namespace moco {

using nlohmann::json;

namespace {

InferenceService::Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON body: ") + e.what());
  }
}

}  // namespace

InferenceService::InferenceService(Checkpoint checkpoint, bool parallel) : meta_(std::move(checkpoint)), parallel_(parallel) {
  auto snap = std::make_shared<Snapshot>();
  snap->policy = std::move(meta_.policy);
  snap->version = next_version_++;
  meta_.optimizer.reset();
  base_ = std::move(snap);
}

std::shared_ptr<const InferenceService::Snapshot> InferenceService::snapshot_for(const std::string& id,
                                                                                 ProblemInstance* instance) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return nullptr;
  if (instance) *instance = it->second.instance;
  return it->second.adapted ? it->second.adapted : base_;
}

std::shared_ptr<const EncodedInstance> InferenceService::encoded(const std::string& id, const ProblemInstance& instance,
                                                                 const std::shared_ptr<const Snapshot>& snap, bool aug) {
  const auto key = std::make_pair(snap->version, aug);
  {
    std::lock_guard lock(mutex_);
    auto& cache = entries_.at(id).cache;
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto enc = std::make_shared<const EncodedInstance>(encode_instance(snap->policy, instance, aug));
  ++encodes_;
  std::lock_guard lock(mutex_);
  auto& cache = entries_.at(id).cache;
  return cache.emplace(key, enc).first->second;
}

InferenceService::Response InferenceService::add_instance(const std::string& body) {
  try {
    const json j = parse_body(body);
    ProblemInstance inst = instance_from_json(j);
    const auto& policy = base_->policy;
    if (inst.kind != policy.kind || inst.m != policy.m)
      return error(400, "model serves " + to_string(policy.kind) + " with m=" + std::to_string(policy.m) +
                            ", got " + to_string(inst.kind) + " with m=" + std::to_string(inst.m));
    std::lock_guard lock(mutex_);
    const std::string id = std::to_string(next_id_++);
    inst.id = id;
    entries_[id] = Entry{std::move(inst), nullptr, {}};
    return {200, {{"id", id}}};
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
}

InferenceService::Response InferenceService::solve(const std::string& id, const Query& query) {
  const auto start = std::chrono::steady_clock::now();
  ProblemInstance inst;
  const auto snap = snapshot_for(id, &inst);
  if (!snap) return error(404, "unknown instance " + id);
  const auto get = [&](const char* key, const std::string& fallback) {
    const auto it = query.find(key);
    return it == query.end() ? fallback : it->second;
  };
  const auto lambda = query.find("lambda");
  if (lambda == query.end()) return error(400, "missing lambda");
  Preference pref;
  try {
    pref = parse_preference(lambda->second, inst.m, 1e-6);
  } catch (const DomainError& e) {
    return error(400, std::string("invalid lambda: ") + e.what());
  }
  InferenceOptions opt;
  opt.recipe = meta_.recipe;
  opt.parallel = false;
  const std::string mode = get("mode", "greedy");
  if (mode == "sample") {
    opt.mode = DecodeMode::sample;
  } else if (mode != "greedy") {
    return error(400, "mode must be greedy or sample");
  }
  const std::string aug = get("aug", "0");
  if (aug != "0" && aug != "1") return error(400, "aug must be 0 or 1");
  try {
    opt.seed = std::stoull(get("seed", "0"));
  } catch (const std::exception&) {
    return error(400, "seed must be a nonnegative integer");
  }
  const auto enc = encoded(id, inst, snap, aug == "1");
  const auto r = solve_preference(snap->policy, *enc, pref, opt);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {200,
          {{"solution", r.solution.flat()},
           {"objectives", r.solution.objectives},
           {"scalarized_cost", r.cost},
           {"latency_ms", ms}}};
}

InferenceService::Response InferenceService::front(const std::string& id, const std::string& body) {
  ProblemInstance inst;
  const auto snap = snapshot_for(id, &inst);
  if (!snap) return error(404, "unknown instance " + id);
  std::vector<Preference> prefs;
  bool aug = false;
  try {
    const json j = parse_body(body);
    const json w = j.value("weights", json{{"grid", 101}});
    if (w.contains("grid")) {
      if (inst.m != 2) return error(400, "grid weights need m = 2; use dasdennis");
      const int k = w.at("grid");
      if (k < 2 || k > 10001) return error(400, "grid size must be in [2, 10001]");
      prefs = uniform_grid(k);
    } else if (w.contains("dasdennis")) {
      const int p = w.at("dasdennis");
      if (p < 1) return error(400, "dasdennis p must be positive");
      prefs = das_dennis_weights(inst.m, p, 20000);
    } else {
      return error(400, "weights must be {grid:K} or {dasdennis:P}");
    }
    aug = j.value("aug", false);
  } catch (const BudgetExceeded& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, std::string("malformed request: ") + e.what());
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  InferenceOptions opt;
  opt.recipe = meta_.recipe;
  opt.parallel = parallel_;
  const auto enc = encoded(id, inst, snap, aug);
  const auto results = solve_front(snap->policy, *enc, prefs, opt);
  const auto archive = archive_of(results, sense_of(inst.kind));
  json entries = json::array();
  for (const auto& e : archive.entries())
    entries.push_back({{"lambda", e.preference}, {"objectives", e.objectives}, {"solution", e.solution.flat()}});
  const std::vector<std::vector<Point>> sets{archive.points()};
  const auto frame = metric_frame(sets, sense_of(inst.kind));
  double nhv = 0.0;
  try {
    nhv = frame_normalized_hv(archive.points(), frame);
  } catch (const DomainError&) {
    nhv = 0.0;
  }
  return {200, {{"entries", entries}, {"normalized_hv", nhv}, {"reference_point", frame.reference}}};
}

InferenceService::Response InferenceService::adapt(const std::string& id, const std::string& body) {
  ProblemInstance inst;
  const auto snap = snapshot_for(id, &inst);
  if (!snap) return error(404, "unknown instance " + id);
  AdaptConfig cfg;
  cfg.recipe = meta_.recipe;
  cfg.parallel = parallel_;
  try {
    const json j = parse_body(body);
    cfg.steps = j.value("steps", 50);
    cfg.prefs_per_step = j.value("prefs", cfg.prefs_per_step);
    cfg.adam.lr = j.value("lr", 1e-4);
    cfg.adam.weight_decay = j.value("weight_decay", 0.0);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.rollouts = j.value("rollouts", 0);
    cfg.time_budget_s = j.value("time_budget_s", 0.0);
    cfg.eval_preferences = inst.m == 2 ? 101 : 13;
    if (cfg.steps > 100000) return error(400, "steps must be at most 100000");
    cfg.validate();
  } catch (const json::exception& e) {
    return error(400, std::string("malformed request: ") + e.what());
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  std::unique_lock busy(adapt_mutex_, std::try_to_lock);
  if (!busy.owns_lock()) return error(409, "an adaptation is already running");
  AdaptResult res;
  try {
    res = moco::adapt(snap->policy, inst, cfg);
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  auto next = std::make_shared<Snapshot>();
  next->policy = std::move(res.policy);
  json curve = json::array();
  for (const auto& row : res.curve) curve.push_back(row.hv);
  {
    std::lock_guard lock(mutex_);
    next->version = next_version_++;
    auto& entry = entries_.at(id);
    entry.adapted = std::move(next);
  }
  return {200, {{"hv_curve", curve}, {"steps", res.steps_run}, {"reference_point", res.reference}}};
}

InferenceService::Response InferenceService::health() const {
  const auto& p = base_->policy;
  json meta = {{"kind", to_string(p.kind)},
               {"m", p.m},
               {"model", to_json(p.config)},
               {"parameters", p.parameter_count()},
               {"scalarization",
                {{"method", to_string(meta_.recipe.method)},
                 {"epsilon", meta_.recipe.epsilon},
                 {"theta", meta_.recipe.theta}}},
               {"seed", meta_.seed},
               {"metadata", meta_.metadata}};
  std::size_t count;
  {
    std::lock_guard lock(mutex_);
    count = entries_.size();
  }
  return {200, {{"status", "ok"}, {"checkpoint_meta", meta}, {"instances", count}}};
}

void InferenceService::attach(httplib::Server& server, const std::string& static_dir) {
  const auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/instances", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, add_instance(req.body));
  });
  server.Get(R"(/instances/([^/]+)/solve)", [this, send](const httplib::Request& req, httplib::Response& res) {
    Query q;
    for (const auto& [k, v] : req.params) q[k] = v;
    send(res, solve(req.matches[1], q));
  });
  server.Post(R"(/instances/([^/]+)/front)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, front(req.matches[1], req.body));
  });
  server.Post(R"(/instances/([^/]+)/adapt)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, adapt(req.matches[1], req.body));
  });
  server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", what}}.dump(), "application/json");
  });
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
    throw ConfigError("static directory " + static_dir + " does not exist");
}

}  // namespace moco
