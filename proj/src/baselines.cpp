#include "moco/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "moco/errors.hpp"

namespace moco {

std::string to_string(BaselineSolver s) {
  switch (s) {
    case BaselineSolver::tsp_nn_2opt:
      return "tsp_nn_2opt";
    case BaselineSolver::kp_greedy:
      return "kp_greedy";
    case BaselineSolver::kp_dp:
      return "kp_dp";
    case BaselineSolver::cvrp_sweep_2opt:
      return "cvrp_sweep_2opt";
  }
  return "?";
}

BaselineSolver parse_solver(const std::string& name) {
  for (auto s : {BaselineSolver::tsp_nn_2opt, BaselineSolver::kp_greedy, BaselineSolver::kp_dp,
                 BaselineSolver::cvrp_sweep_2opt})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown baseline solver '" + name + "'");
}

BaselineSolver default_solver(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::motsp:
      return BaselineSolver::tsp_nn_2opt;
    case ProblemKind::mocvrp:
      return BaselineSolver::cvrp_sweep_2opt;
    case ProblemKind::mokp:
      return BaselineSolver::kp_dp;
  }
  return BaselineSolver::tsp_nn_2opt;
}

namespace {

void require_kind(const ProblemInstance& inst, ProblemKind kind, const char* solver) {
  if (inst.kind != kind) throw ConfigError(std::string(solver) + " needs a " + to_string(kind) + " instance");
}

// Row-major (n+1) x (n+1) weighted distances; index n is the depot for mocvrp.
std::vector<double> weighted_distances(const ProblemInstance& inst, const Preference& w) {
  const int n = inst.n;
  const int size = n + 1;
  std::vector<double> d(static_cast<std::size_t>(size) * size, 0.0);
  const int objectives = inst.kind == ProblemKind::mocvrp ? 1 : inst.m;
  for (int a = 0; a < size; ++a)
    for (int b = 0; b < size; ++b) {
      if (inst.kind != ProblemKind::mocvrp && (a == n || b == n)) continue;
      const int ia = a == n ? -1 : a, ib = b == n ? -1 : b;
      double s = 0.0;
      if (inst.kind == ProblemKind::mocvrp) {
        s = inst.distance(0, ia, ib);
      } else {
        for (int i = 0; i < objectives; ++i) s += w[i] * inst.distance(i, ia, ib);
      }
      d[static_cast<std::size_t>(a) * size + b] = s;
    }
  return d;
}

// First-improvement 2-opt on a closed tour.
void two_opt(std::vector<int>& tour, const std::vector<double>& d, int stride, int max_passes) {
  const int n = static_cast<int>(tour.size());
  if (n < 4) return;
  const auto D = [&](int a, int b) { return d[static_cast<std::size_t>(a) * stride + b]; };
  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (int i = 0; i < n - 1 && !improved; ++i)
      for (int j = i + 2; j < n && !improved; ++j) {
        if (i == 0 && j == n - 1) continue;
        const int a = tour[i], b = tour[i + 1], c = tour[j], e = tour[(j + 1) % n];
        const double delta = D(a, c) + D(b, e) - D(a, b) - D(c, e);
        if (delta < -1e-12) {
          std::reverse(tour.begin() + i + 1, tour.begin() + j + 1);
          improved = true;
        }
      }
    if (!improved) return;
  }
}

}  // namespace

Solution solve_weightsum_tsp(const ProblemInstance& inst, const Preference& w, int max_passes) {
  require_kind(inst, ProblemKind::motsp, "tsp_nn_2opt");
  const int n = inst.n;
  const auto d = weighted_distances(inst, w);
  const int stride = n + 1;
  std::vector<int> tour{0};
  std::vector<std::uint8_t> seen(n, 0);
  seen[0] = 1;
  while (static_cast<int>(tour.size()) < n) {
    const int cur = tour.back();
    int best = -1;
    for (int j = 0; j < n; ++j)
      if (!seen[j] && (best < 0 || d[cur * stride + j] < d[cur * stride + best])) best = j;
    seen[best] = 1;
    tour.push_back(best);
  }
  two_opt(tour, d, stride, max_passes);
  Solution s;
  s.kind = ProblemKind::motsp;
  s.order = tour;
  s.objectives = evaluate(inst, s);
  return s;
}

Solution solve_weightsum_kp_greedy(const ProblemInstance& inst, const Preference& w) {
  require_kind(inst, ProblemKind::mokp, "kp_greedy");
  std::vector<double> score(inst.n);
  for (int j = 0; j < inst.n; ++j) {
    double v = 0.0;
    for (int i = 0; i < inst.m; ++i) v += w[i] * inst.value(j, i);
    score[j] = inst.weight(j) > 0 ? v / inst.weight(j) : std::numeric_limits<double>::infinity();
  }
  std::vector<int> idx(inst.n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return score[a] > score[b]; });
  Solution s;
  s.kind = ProblemKind::mokp;
  double used = 0.0;
  for (int j : idx)
    if (used + inst.weight(j) <= inst.capacity + kCapacitySlack) {
      used += inst.weight(j);
      s.order.push_back(j);
    }
  s.objectives = evaluate(inst, s);
  return s;
}

Solution solve_weightsum_kp_dp(const ProblemInstance& inst, const Preference& w, double scale, double cell_limit) {
  require_kind(inst, ProblemKind::mokp, "kp_dp");
  if (!(scale > 0)) throw ConfigError("dp scale must be positive");
  const int n = inst.n;
  const double cap_real = std::floor(inst.capacity * scale + 1e-9);
  const double cells = (cap_real + 1) * n;
  if (cells > cell_limit)
    throw BudgetExceeded("kp_dp table of " + std::to_string(static_cast<long long>(cells)) + " cells at scale " +
                             std::to_string(scale) + " exceeds the limit; lower the scale",
                         cells);
  const int C = static_cast<int>(cap_real);
  std::vector<int> iw(n);
  std::vector<double> val(n);
  for (int j = 0; j < n; ++j) {
    iw[j] = static_cast<int>(std::ceil(inst.weight(j) * scale - 1e-9));
    val[j] = 0.0;
    for (int i = 0; i < inst.m; ++i) val[j] += w[i] * inst.value(j, i);
  }
  std::vector<double> best(C + 1, 0.0);
  std::vector<std::uint8_t> take(static_cast<std::size_t>(n) * (C + 1), 0);
  for (int j = 0; j < n; ++j) {
    std::uint8_t* row = &take[static_cast<std::size_t>(j) * (C + 1)];
    for (int c = C; c >= iw[j]; --c) {
      const double with = best[c - iw[j]] + val[j];
      if (with > best[c]) {
        best[c] = with;
        row[c] = 1;
      }
    }
  }
  Solution s;
  s.kind = ProblemKind::mokp;
  int c = C;
  for (int j = n - 1; j >= 0; --j)
    if (take[static_cast<std::size_t>(j) * (C + 1) + c]) {
      s.order.push_back(j);
      c -= iw[j];
    }
  std::reverse(s.order.begin(), s.order.end());
  s.objectives = evaluate(inst, s);
  return s;
}

Solution solve_weightsum_cvrp(const ProblemInstance& inst, const Preference& w, int max_passes) {
  require_kind(inst, ProblemKind::mocvrp, "cvrp_sweep_2opt");
  const int n = inst.n;
  const auto d = weighted_distances(inst, w);
  const int stride = n + 1;
  std::vector<double> angle(n);
  for (int j = 0; j < n; ++j)
    angle[j] = std::atan2(inst.coords[j][1] - inst.depot[1], inst.coords[j][0] - inst.depot[0]);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return angle[a] < angle[b]; });

  Solution best;
  double best_cost = std::numeric_limits<double>::infinity();
  // Every rotation of the sweep is a candidate; keep the best weighted sum.
  for (int r = 0; r < n; ++r) {
    Solution s;
    s.kind = ProblemKind::mocvrp;
    double load = 0.0;
    std::vector<int> route;
    for (int k = 0; k < n; ++k) {
      const int j = order[(r + k) % n];
      if (load + inst.demands[j] > inst.capacity + kCapacitySlack) {
        s.routes.push_back(route);
        route.clear();
        load = 0.0;
      }
      route.push_back(j);
      load += inst.demands[j];
    }
    s.routes.push_back(route);
    for (auto& rt : s.routes) {
      std::vector<int> closed{n};
      closed.insert(closed.end(), rt.begin(), rt.end());
      two_opt(closed, d, stride, max_passes);
      const auto depot = std::find(closed.begin(), closed.end(), n);
      std::rotate(closed.begin(), depot, closed.end());
      rt.assign(closed.begin() + 1, closed.end());
    }
    s.objectives = evaluate(inst, s);
    const double cost = w[0] * s.objectives[0] + w[1] * s.objectives[1];
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(s);
    }
  }
  return best;
}

Solution solve_baseline(BaselineSolver solver, const ProblemInstance& inst, const Preference& w) {
  switch (solver) {
    case BaselineSolver::tsp_nn_2opt:
      return solve_weightsum_tsp(inst, w);
    case BaselineSolver::kp_greedy:
      return solve_weightsum_kp_greedy(inst, w);
    case BaselineSolver::kp_dp:
      return solve_weightsum_kp_dp(inst, w);
    case BaselineSolver::cvrp_sweep_2opt:
      return solve_weightsum_cvrp(inst, w);
  }
  throw ContractViolation("unknown solver");
}

BaselineFront build_baseline_front(const ProblemInstance& inst, const BaselineSpec& spec) {
  if (spec.weights.empty()) throw ConfigError("baseline weight set is empty");
  const auto start = std::chrono::steady_clock::now();
  std::vector<Solution> sols(spec.weights.size());
  const long count = static_cast<long>(sols.size());
  if (spec.parallel) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < count; ++k) {
      try {
        sols[k] = solve_baseline(spec.solver, inst, spec.weights[k]);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (long k = 0; k < count; ++k) sols[k] = solve_baseline(spec.solver, inst, spec.weights[k]);
  }
  BaselineFront out{ParetoArchive(sense_of(inst.kind)), 0.0};
  for (long k = 0; k < count; ++k) out.archive.offer(sols[k].objectives, spec.weights[k].weights(), sols[k]);
  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

MetricFrame metric_frame(std::span<const std::vector<Point>> sets, Sense sense) {
  MetricFrame f;
  f.sense = sense;
  if (sense == Sense::minimize) {
    f.reference = reference_point(sets);
    f.scale = f.reference;
    return f;
  }
  for (const auto& s : sets)
    for (const auto& p : s) {
      if (f.scale.empty()) f.scale.assign(p.size(), -std::numeric_limits<double>::infinity());
      if (p.size() != f.scale.size()) throw DomainError("objective vectors of different lengths");
      for (std::size_t i = 0; i < p.size(); ++i) f.scale[i] = std::max(f.scale[i], p[i]);
    }
  if (f.scale.empty()) throw DomainError("metric frame needs at least one point");
  f.reference.assign(f.scale.size(), 0.0);
  return f;
}

double frame_hypervolume(std::span<const Point> points, const MetricFrame& frame) {
  const auto pts = to_minimization(points, frame.sense);
  return clipped_hypervolume(pts, frame.reference);
}

double frame_normalized_hv(std::span<const Point> points, const MetricFrame& frame) {
  double prod = 1.0;
  for (double s : frame.scale) {
    if (!(s > 0.0)) throw DomainError("normalized hypervolume needs a positive scale in every objective");
    prod *= s;
  }
  return frame_hypervolume(points, frame) / prod;
}

MetricReport metric_report(const std::string& method, std::span<const Point> points, const MetricFrame& frame,
                           double runtime_s, std::optional<double> reference_hv, std::span<const Point> exact_front) {
  MetricReport r;
  r.method = method;
  r.hv = frame_hypervolume(points, frame);
  r.normalized_hv = frame_normalized_hv(points, frame);
  if (reference_hv && *reference_hv > 0) r.gap = (*reference_hv - r.hv) / *reference_hv;
  if (!exact_front.empty()) r.igd = igd(points, exact_front);
  r.runtime_s = runtime_s;
  r.size = points.size();
  return r;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j = {{"method", r.method},
                      {"normalized_hv", r.normalized_hv},
                      {"hv", r.hv},
                      {"gap", r.gap ? nlohmann::json(*r.gap) : nlohmann::json(nullptr)},
                      {"igd", r.igd ? nlohmann::json(*r.igd) : nlohmann::json(nullptr)},
                      {"runtime_s", r.runtime_s},
                      {"size", r.size}};
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

}  // namespace moco
