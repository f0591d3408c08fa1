// Command-line entry points: generate, weights, train, solve, baseline, eval,
// enumerate, adapt, serve.

#include <omp.h>

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "moco/adapt.hpp"
#include "moco/baselines.hpp"
#include "moco/checkpoint.hpp"
#include "moco/enumerate.hpp"
#include "moco/errors.hpp"
#include "moco/inference.hpp"
#include "moco/io.hpp"
#include "moco/service.hpp"
#include "moco/trainer.hpp"

using namespace moco;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Written next to every artifact; artifacts carry its path.
class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) : command_(std::move(command)) {
    for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
    started_ = now_iso();
  }
  json config = json::object();
  json seeds = json::object();
  std::vector<std::string> inputs, outputs;

  void write(const std::string& path) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    const json j = {{"command", command_}, {"argv", argv_},     {"config", config},  {"seeds", seeds},
                    {"version", kVersion}, {"inputs", inputs},   {"outputs", outputs}, {"started", started_},
                    {"wall_clock_s", wall}, {"threads", omp_get_max_threads()}};
    std::ofstream os(path);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write manifest " + path);
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string started_;
  std::chrono::steady_clock::time_point clock_ = std::chrono::steady_clock::now();
};

std::string manifest_path(const std::string& artifact) { return artifact + ".manifest.json"; }

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

struct PreferenceFlags {
  int grid = 0;
  int dasdennis = 0;
  std::string lambda;

  void add(CLI::App* app) {
    auto* g = app->add_option("--pref-grid", grid, "uniform grid of K preferences (m = 2)");
    auto* d = app->add_option("--pref-dasdennis", dasdennis, "Das-Dennis lattice with parameter p");
    auto* l = app->add_option("--lambda", lambda, "single preference, e.g. 0.3,0.7");
    g->excludes(d)->excludes(l);
    d->excludes(l);
  }

  std::vector<Preference> resolve(int m) const {
    if (!lambda.empty()) return {parse_preference(lambda, m)};
    if (dasdennis > 0) return das_dennis_weights(m, dasdennis);
    if (grid > 0) {
      if (m != 2) throw ConfigError("--pref-grid needs m = 2; use --pref-dasdennis");
      return uniform_grid(grid);
    }
    return default_preferences(m, m == 2 ? 101 : 13);
  }
};

// Solution dump grouped by instance id.
std::map<std::string, std::vector<Point>> read_front_dump(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::map<std::string, std::vector<Point>> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      out[j.at("instance_id").get<std::string>()].push_back(j.at("objectives").get<Point>());
    } catch (const json::exception& e) {
      throw ConfigError(path + ": line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

int cmd_generate(const std::string& problem, int n, int m, int count, std::uint64_t seed, int clusters,
                 const std::string& out, Manifest& man) {
  const auto kind = parse_kind(problem);
  std::vector<ProblemInstance> insts;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(i));
    auto inst = clusters > 0 ? sample_clustered_motsp(n, m, clusters, s) : sample_instance(kind, n, m, s);
    if (clusters > 0 && kind != ProblemKind::motsp) throw ConfigError("--clusters applies to motsp only");
    inst.id = std::to_string(i);
    insts.push_back(std::move(inst));
  }
  auto os = open_out(out);
  write_instances_jsonl(os, insts);
  man.config = {{"problem", problem}, {"nodes", n}, {"objectives", m}, {"count", count}, {"clusters", clusters}};
  man.seeds = {{"seed", seed}};
  man.outputs = {out};
  man.write(manifest_path(out));
  std::cerr << "wrote " << count << " instances to " << out << '\n';
  return 0;
}

int cmd_weights(int m, const PreferenceFlags& prefs, const std::string& out) {
  const auto w = prefs.resolve(m);
  if (out.empty() || out == "-") {
    write_weights_csv(std::cout, w);
  } else {
    auto os = open_out(out);
    write_weights_csv(os, w);
  }
  return 0;
}

int cmd_train(TrainConfig cfg, const std::string& preset, const std::string& out, bool resume, Manifest& man) {
  cfg.model = ModelConfig::preset(preset);
  cfg.validate();
  fs::create_directories(out);
  man.config = to_json(cfg);
  man.config["preset"] = preset;
  man.seeds = {{"seed", cfg.seed}};
  man.outputs = {(fs::path(out) / "curve.csv").string(), (fs::path(out) / "latest.ckpt").string()};
  const auto mpath = (fs::path(out) / "manifest.json").string();
  man.write(mpath);
  auto policy = Policy<float>::initialized(cfg.model, cfg.kind, cfg.m, cfg.seed);
  std::cerr << "training " << to_string(cfg.kind) << " n=" << cfg.n << " m=" << cfg.m << " preset=" << preset << " ("
            << policy.parameter_count() << " parameters), " << cfg.total_steps() << " steps\n";
  TrainRun run;
  run.out_dir = out;
  run.resume = resume;
  run.on_step = [&](const StepDiagnostics& d) {
    if (!d.finite) std::cerr << "step " << d.step << " skipped: " << d.problem << '\n';
    if (d.step % 50 == 0 || d.step == cfg.total_steps())
      std::cerr << "step " << d.step << " mean cost " << d.mean_cost << " grad norm " << d.grad_norm << '\n';
  };
  const auto res = train(std::move(policy), cfg, run);
  Checkpoint final;
  final.policy = res.policy;
  final.recipe = cfg.recipe;
  final.seed = cfg.seed;
  final.metadata = {{"training", {{"config", to_json(cfg)}, {"steps", cfg.total_steps()}}}, {"manifest", mpath}};
  const auto model_path = (fs::path(out) / "model.ckpt").string();
  save_checkpoint(model_path, final);
  man.outputs.push_back(model_path);
  man.write(mpath);
  std::cerr << "wrote " << model_path << " (" << res.skipped_steps << " skipped steps)\n";
  return 0;
}

int cmd_solve(const std::string& ckpt_path, const std::string& inst_path, const PreferenceFlags& pf, bool aug,
              int sample, int starts, std::uint64_t seed, const std::string& out, Manifest& man) {
  const auto ckpt = load_checkpoint(ckpt_path);
  const auto insts = read_instances_file(inst_path);
  const auto prefs = pf.resolve(ckpt.policy.m);
  InferenceOptions opt;
  opt.recipe = ckpt.recipe;
  opt.starts = starts;
  opt.seed = seed;
  if (sample > 0) {
    opt.mode = DecodeMode::sample;
    opt.samples = sample;
  }
  const std::string dump = out.empty() ? "solutions.jsonl" : out;
  auto os = open_out(dump);
  json per_instance = json::array();
  double sum_nhv = 0.0;
  double total_time = 0.0;
  for (const auto& inst : insts) {
    if (inst.kind != ckpt.policy.kind || inst.m != ckpt.policy.m)
      throw ConfigError("instance " + inst.id + " is " + to_string(inst.kind) + " m=" + std::to_string(inst.m) +
                        ", checkpoint is " + to_string(ckpt.policy.kind) + " m=" + std::to_string(ckpt.policy.m));
    const auto t0 = std::chrono::steady_clock::now();
    const auto enc = encode_instance(ckpt.policy, inst, aug);
    const auto results = solve_front(ckpt.policy, enc, prefs, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total_time += secs;
    for (const auto& r : results) os << solution_record(inst.id, r.preference, r.solution).dump() << '\n';
    const auto archive = archive_of(results, sense_of(inst.kind));
    const std::vector<std::vector<Point>> sets{archive.points()};
    const auto frame = metric_frame(sets, sense_of(inst.kind));
    const auto rep = metric_report("neural", archive.points(), frame, secs);
    sum_nhv += rep.normalized_hv;
    auto j = to_json(rep);
    j["instance_id"] = inst.id;
    j["reference_point"] = frame.reference;
    per_instance.push_back(j);
  }
  const json report = {{"method", "neural"},
                       {"augment", aug},
                       {"preferences", prefs.size()},
                       {"mean_normalized_hv", insts.empty() ? 0.0 : sum_nhv / insts.size()},
                       {"runtime_s", total_time},
                       {"instances", per_instance},
                       {"manifest", manifest_path(dump)}};
  auto rs = open_out(dump + ".report.json");
  rs << report.dump(2) << '\n';
  man.config = {{"checkpoint", ckpt_path}, {"augment", aug}, {"sample", sample}, {"starts", starts},
                {"preferences", prefs.size()}};
  man.seeds = {{"seed", seed}, {"checkpoint_seed", ckpt.seed}};
  man.inputs = {ckpt_path, inst_path};
  man.outputs = {dump, dump + ".report.json"};
  man.write(manifest_path(dump));
  std::cerr << "solved " << insts.size() << " instances x " << prefs.size() << " preferences, mean normalized HV "
            << report["mean_normalized_hv"].get<double>() << ", " << total_time << " s\n";
  return 0;
}

int cmd_baseline(const std::string& inst_path, const std::string& solver_name, const PreferenceFlags& pf,
                 const std::string& out, Manifest& man) {
  const auto insts = read_instances_file(inst_path);
  auto os = open_out(out);
  for (const auto& inst : insts) {
    BaselineSpec spec;
    spec.solver = solver_name.empty() ? default_solver(inst.kind) : parse_solver(solver_name);
    spec.weights = pf.resolve(inst.m);
    const auto front = build_baseline_front(inst, spec);
    for (const auto& e : front.archive.entries())
      os << solution_record(inst.id, Preference(e.preference), e.solution).dump() << '\n';
  }
  man.config = {{"solver", solver_name}};
  man.inputs = {inst_path};
  man.outputs = {out};
  man.write(manifest_path(out));
  return 0;
}

int cmd_eval(const std::vector<std::string>& fronts, const std::string& exact, const std::string& problem,
             const std::string& out, Manifest& man) {
  const Sense sense = sense_of(parse_kind(problem));
  std::vector<std::map<std::string, std::vector<Point>>> sets;
  for (const auto& f : fronts) sets.push_back(read_front_dump(f));
  std::map<std::string, std::vector<Point>> exact_sets;
  if (!exact.empty()) exact_sets = read_front_dump(exact);
  json per_instance = json::array();
  std::vector<double> mean_nhv(fronts.size(), 0.0);
  std::size_t count = 0;
  for (const auto& [id, _] : sets[0]) {
    std::vector<std::vector<Point>> group;
    for (auto& s : sets) group.push_back(nondominated_filter(s[id], sense));
    const bool has_exact = exact_sets.count(id) > 0;
    if (has_exact) group.push_back(nondominated_filter(exact_sets[id], sense));
    const auto frame = metric_frame(group, sense);
    const double ref_hv = frame_hypervolume(group[0], frame);
    json row = {{"instance_id", id}, {"reference_point", frame.reference}, {"methods", json::array()}};
    for (std::size_t k = 0; k < fronts.size(); ++k) {
      const auto rep = metric_report(fronts[k], group[k], frame, 0.0, ref_hv,
                                     has_exact ? std::span<const Point>(group.back()) : std::span<const Point>());
      mean_nhv[k] += rep.normalized_hv;
      row["methods"].push_back(to_json(rep));
    }
    if (has_exact) row["exact_normalized_hv"] = frame_normalized_hv(group.back(), frame);
    per_instance.push_back(row);
    ++count;
  }
  json summary = json::array();
  for (std::size_t k = 0; k < fronts.size(); ++k)
    summary.push_back({{"method", fronts[k]}, {"mean_normalized_hv", count ? mean_nhv[k] / count : 0.0}});
  const json report = {{"summary", summary}, {"instances", per_instance}};
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    auto os = open_out(out);
    os << report.dump(2) << '\n';
    man.inputs = fronts;
    if (!exact.empty()) man.inputs.push_back(exact);
    man.outputs = {out};
    man.write(manifest_path(out));
  }
  return 0;
}

int cmd_enumerate(const std::string& inst_path, double limit, const std::string& out, Manifest& man) {
  const auto insts = read_instances_file(inst_path);
  auto os = open_out(out);
  for (const auto& inst : insts) {
    const auto front = enumerate_exact(inst, limit);
    for (const auto& e : front.entries())
      os << json{{"instance_id", inst.id}, {"lambda", json::array()}, {"solution", e.solution.flat()},
                 {"objectives", e.objectives}}
                .dump()
         << '\n';
    std::cerr << "instance " << inst.id << ": " << front.size() << " Pareto points\n";
  }
  man.config = {{"limit", limit}};
  man.inputs = {inst_path};
  man.outputs = {out};
  man.write(manifest_path(out));
  return 0;
}

int cmd_adapt(const std::string& ckpt_path, const std::string& inst_path, AdaptConfig cfg, const std::string& out,
              Manifest& man) {
  auto ckpt = load_checkpoint(ckpt_path);
  const auto insts = read_instances_file(inst_path);
  if (insts.size() != 1) throw ConfigError("adapt expects exactly one instance, got " + std::to_string(insts.size()));
  cfg.recipe = ckpt.recipe;
  const auto res = adapt(ckpt.policy, insts[0], cfg);
  fs::create_directories(out);
  const auto dir = fs::path(out);
  {
    auto os = open_out((dir / "curve.csv").string());
    os << "step,hv,mean_cost\n" << std::setprecision(17);
    for (const auto& r : res.curve) os << r.step << ',' << r.hv << ',' << r.mean_cost << '\n';
  }
  {
    auto os = open_out((dir / "archive.jsonl").string());
    for (const auto& e : res.archive.entries())
      os << json{{"instance_id", insts[0].id}, {"lambda", e.preference}, {"solution", e.solution.flat()},
                 {"objectives", e.objectives}}
                .dump()
         << '\n';
  }
  ckpt.policy = res.policy;
  ckpt.optimizer.reset();
  ckpt.metadata["adaptation"] = {{"instance", inst_path}, {"steps", res.steps_run}, {"lr", cfg.adam.lr},
                                 {"manifest", (dir / "manifest.json").string()}};
  save_checkpoint((dir / "adapted.ckpt").string(), ckpt);
  man.config = {{"steps", cfg.steps}, {"lr", cfg.adam.lr}, {"rollouts", cfg.rollouts},
                {"time_budget_s", cfg.time_budget_s}, {"steps_run", res.steps_run}};
  man.seeds = {{"seed", cfg.seed}};
  man.inputs = {ckpt_path, inst_path};
  man.outputs = {(dir / "curve.csv").string(), (dir / "archive.jsonl").string(), (dir / "adapted.ckpt").string()};
  man.write((dir / "manifest.json").string());
  std::cerr << "adapted for " << res.steps_run << " steps: HV " << res.curve.front().hv << " -> "
            << res.curve.back().hv << ", archive of " << res.archive.size() << '\n';
  return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const std::string& ckpt_path, const std::string& host, int port, const std::string& static_dir) {
  InferenceService service(load_checkpoint(ckpt_path));
  httplib::Server server;
  service.attach(server, static_dir);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "serving " << ckpt_path << " on http://" << host << ':' << port << '\n';
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-conditioned neural solver for multiobjective combinatorial optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: runtime choice)");

  // generate
  auto* gen = app.add_subcommand("generate", "sample random instances as JSON lines");
  std::string g_problem = "motsp", g_out = "instances.jsonl";
  int g_n = 20, g_m = 2, g_count = 10, g_clusters = 0;
  std::uint64_t g_seed = 0;
  gen->add_option("--problem", g_problem)->check(CLI::IsMember({"motsp", "mocvrp", "mokp"}));
  gen->add_option("--nodes", g_n);
  gen->add_option("--objectives", g_m);
  gen->add_option("--count", g_count);
  gen->add_option("--seed", g_seed);
  gen->add_option("--clusters", g_clusters, "clustered motsp with this many Gaussian blobs");
  gen->add_option("--out", g_out);

  // weights
  auto* wts = app.add_subcommand("weights", "export a preference set as CSV");
  int w_m = 2;
  std::string w_out;
  PreferenceFlags w_prefs;
  wts->add_option("--objectives", w_m);
  w_prefs.add(wts);
  wts->add_option("--out", w_out);

  // train
  auto* tr = app.add_subcommand("train", "train a model with multiobjective REINFORCE");
  TrainConfig tc;
  std::string t_problem = "motsp", t_preset = "desk", t_out = "run", t_scal;
  bool t_resume = false;
  tr->add_option("--problem", t_problem)->check(CLI::IsMember({"motsp", "mocvrp", "mokp"}));
  tr->add_option("--nodes", tc.n);
  tr->add_option("--objectives", tc.m);
  tr->add_option("--preset", t_preset)->check(CLI::IsMember({"desk", "paper"}));
  tr->add_option("--seed", tc.seed);
  tr->add_option("--out", t_out);
  tr->add_option("--epochs", tc.epochs);
  tr->add_option("--steps-per-epoch", tc.steps_per_epoch);
  tr->add_option("--batch", tc.batch, "instances per step (B)");
  tr->add_option("--prefs", tc.prefs_per_step, "preferences per step (K)");
  tr->add_option("--rollouts", tc.rollouts, "rollouts per pair (N); 0 = n");
  tr->add_option("--lr", tc.adam.lr);
  tr->add_option("--weight-decay", tc.adam.weight_decay);
  tr->add_option("--scalarization", t_scal, "ws, tch, mtch, pbi or ipbi (default: tch for m=2, ipbi beyond)");
  tr->add_flag("--normalize-advantage", tc.normalize_advantage);
  tr->add_option("--grad-clip", tc.grad_clip);
  tr->add_flag("--resume", t_resume, "continue from OUT/latest.ckpt");

  // solve
  auto* sv = app.add_subcommand("solve", "zero-shot inference for a preference set");
  std::string s_ckpt, s_inst, s_out;
  PreferenceFlags s_prefs;
  bool s_aug = false;
  int s_sample = 0, s_starts = 0;
  std::uint64_t s_seed = 0;
  sv->add_option("--ckpt", s_ckpt)->required();
  sv->add_option("--instances", s_inst)->required();
  s_prefs.add(sv);
  sv->add_flag("--aug", s_aug, "best over the instance augmentations");
  sv->add_option("--sample", s_sample, "sampled rollouts per start instead of greedy");
  sv->add_option("--starts", s_starts, "forced start actions; 0 = all");
  sv->add_option("--seed", s_seed);
  sv->add_option("--out", s_out, "solution dump (JSON lines)");

  // baseline
  auto* bl = app.add_subcommand("baseline", "weight-sum decomposition baseline");
  std::string b_inst, b_solver, b_out = "baseline.jsonl";
  PreferenceFlags b_prefs;
  bl->add_option("--instances", b_inst)->required();
  bl->add_option("--solver", b_solver, "tsp_nn_2opt, kp_greedy, kp_dp or cvrp_sweep_2opt");
  b_prefs.add(bl);
  bl->add_option("--out", b_out);

  // eval
  auto* ev = app.add_subcommand("eval", "compare solution dumps on a shared reference point");
  std::vector<std::string> e_fronts;
  std::string e_exact, e_problem = "motsp", e_out;
  ev->add_option("--fronts", e_fronts)->required();
  ev->add_option("--exact", e_exact);
  ev->add_option("--problem", e_problem)->check(CLI::IsMember({"motsp", "mocvrp", "mokp"}));
  ev->add_option("--out", e_out);

  // enumerate
  auto* en = app.add_subcommand("enumerate", "exact Pareto fronts by enumeration");
  std::string n_inst, n_out = "exact.jsonl";
  double n_limit = kDefaultEnumerationLimit;
  en->add_option("--instances", n_inst)->required();
  en->add_option("--limit", n_limit);
  en->add_option("--out", n_out);

  // adapt
  auto* ad = app.add_subcommand("adapt", "instance-level active adaptation");
  std::string a_ckpt, a_inst, a_out = "adapt";
  AdaptConfig ac;
  ad->add_option("--ckpt", a_ckpt)->required();
  ad->add_option("--instance", a_inst)->required();
  ad->add_option("--steps", ac.steps);
  ad->add_option("--lr", ac.adam.lr);
  ad->add_option("--prefs", ac.prefs_per_step, "preferences per step (K)");
  ad->add_option("--rollouts", ac.rollouts);
  ad->add_option("--budget", ac.time_budget_s, "wall-clock budget in seconds");
  ad->add_option("--seed", ac.seed);
  ad->add_option("--out", a_out);

  // serve
  auto* se = app.add_subcommand("serve", "HTTP inference service");
  std::string r_ckpt, r_host = "127.0.0.1", r_static;
  int r_port = 8080;
  se->add_option("--ckpt", r_ckpt)->required();
  se->add_option("--port", r_port);
  se->add_option("--host", r_host);
  se->add_option("--static", r_static, "serve this directory at /");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*gen) {
      Manifest man("generate", argc, argv);
      return cmd_generate(g_problem, g_n, g_m, g_count, g_seed, g_clusters, g_out, man);
    }
    if (*wts) return cmd_weights(w_m, w_prefs, w_out);
    if (*tr) {
      Manifest man("train", argc, argv);
      tc.kind = parse_kind(t_problem);
      tc.recipe = default_recipe(tc.m);
      if (!t_scal.empty()) tc.recipe.method = parse_aggregation(t_scal);
      return cmd_train(tc, t_preset, t_out, t_resume, man);
    }
    if (*sv) {
      Manifest man("solve", argc, argv);
      return cmd_solve(s_ckpt, s_inst, s_prefs, s_aug, s_sample, s_starts, s_seed, s_out, man);
    }
    if (*bl) {
      Manifest man("baseline", argc, argv);
      return cmd_baseline(b_inst, b_solver, b_prefs, b_out, man);
    }
    if (*ev) {
      Manifest man("eval", argc, argv);
      return cmd_eval(e_fronts, e_exact, e_problem, e_out, man);
    }
    if (*en) {
      Manifest man("enumerate", argc, argv);
      return cmd_enumerate(n_inst, n_limit, n_out, man);
    }
    if (*ad) {
      Manifest man("adapt", argc, argv);
      return cmd_adapt(a_ckpt, a_inst, ac, a_out, man);
    }
    if (*se) return cmd_serve(r_ckpt, r_host, r_port, r_static);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << " (estimate " << e.estimate() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
