#include "moco/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moco/errors.hpp"
#include "moco/rng.hpp"

namespace moco {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::motsp:
      return "motsp";
    case ProblemKind::mocvrp:
      return "mocvrp";
    case ProblemKind::mokp:
      return "mokp";
  }
  return "?";
}

ProblemKind parse_kind(std::string_view name) {
  if (name == "motsp") return ProblemKind::motsp;
  if (name == "mocvrp") return ProblemKind::mocvrp;
  if (name == "mokp") return ProblemKind::mokp;
  throw ConfigError("unknown problem kind '" + std::string(name) + "'");
}

double ProblemInstance::distance(int objective, int a, int b) const {
  if (kind == ProblemKind::mocvrp) {
    const double ax = a < 0 ? depot[0] : coords[a][0];
    const double ay = a < 0 ? depot[1] : coords[a][1];
    const double bx = b < 0 ? depot[0] : coords[b][0];
    const double by = b < 0 ? depot[1] : coords[b][1];
    return std::hypot(ax - bx, ay - by);
  }
  const auto& pa = coords[a];
  const auto& pb = coords[b];
  return std::hypot(pa[2 * objective] - pb[2 * objective], pa[2 * objective + 1] - pb[2 * objective + 1]);
}

void ProblemInstance::validate() const {
  const auto fail = [&](const std::string& what) { throw ConfigError(to_string(kind) + " instance: " + what); };
  if (n < 1) fail("needs at least one node");
  if (m < 1) fail("needs at least one objective");
  if (static_cast<int>(coords.size()) != n) fail("coords has " + std::to_string(coords.size()) + " rows, n=" + std::to_string(n));
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  switch (kind) {
    case ProblemKind::motsp:
      for (const auto& row : coords) {
        if (static_cast<int>(row.size()) != 2 * m) fail("motsp rows need 2m coordinates");
        for (double v : row)
          if (!in_unit(v)) fail("coordinate outside the unit square");
      }
      break;
    case ProblemKind::mocvrp:
      if (m != 2) fail("mocvrp is defined for m = 2");
      if (static_cast<int>(demands.size()) != n) fail("demands size mismatch");
      if (!in_unit(depot[0]) || !in_unit(depot[1])) fail("depot outside the unit square");
      for (const auto& row : coords) {
        if (row.size() != 2) fail("mocvrp rows need 2 coordinates");
        for (double v : row)
          if (!in_unit(v)) fail("coordinate outside the unit square");
      }
      for (double d : demands)
        if (!(d > 0.0 && d <= 1.0)) fail("normalized demand outside (0, 1]");
      if (std::abs(capacity - 1.0) > 1e-12) fail("normalized capacity must be 1");
      break;
    case ProblemKind::mokp: {
      double total = 0.0;
      for (const auto& row : coords) {
        if (static_cast<int>(row.size()) != m + 1) fail("mokp rows need m values and a weight");
        for (double v : row)
          if (v < 0.0) fail("negative value or weight");
        if (!(row[m] < capacity)) fail("item weight not below capacity");
        total += row[m];
      }
      if (!(total > capacity)) fail("total weight does not exceed capacity");
      break;
    }
  }
}

std::vector<int> Solution::flat() const {
  if (kind != ProblemKind::mocvrp) return order;
  std::vector<int> out{0};
  for (const auto& r : routes) {
    for (int c : r) out.push_back(c + 1);
    out.push_back(0);
  }
  return out;
}

Solution Solution::from_flat(ProblemKind kind, const std::vector<int>& flat) {
  Solution s;
  s.kind = kind;
  if (kind != ProblemKind::mocvrp) {
    s.order = flat;
    return s;
  }
  std::vector<int> cur;
  for (int v : flat) {
    if (v == 0) {
      if (!cur.empty()) s.routes.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(v - 1);
    }
  }
  if (!cur.empty()) s.routes.push_back(std::move(cur));
  return s;
}

double mocvrp_raw_capacity(int n) {
  if (n <= 20) return 30.0;
  if (n <= 50) return 40.0;
  return 50.0;
}

double mokp_capacity(int n) {
  if (n <= 100) return n / 4.0;
  return 25.0;
}

ProblemInstance sample_instance(ProblemKind kind, int n, int m, std::uint64_t seed) {
  if (n < 2) throw ConfigError("instances need n >= 2, got " + std::to_string(n));
  if (m < 2) throw ConfigError("instances need m >= 2, got " + std::to_string(m));
  if (kind == ProblemKind::mocvrp && m != 2)
    throw ConfigError("mocvrp supports exactly 2 objectives, got " + std::to_string(m));

  Rng rng(seed);
  ProblemInstance inst;
  inst.kind = kind;
  inst.n = n;
  inst.m = m;
  inst.seed = seed;
  switch (kind) {
    case ProblemKind::motsp:
      inst.coords.assign(n, std::vector<double>(2 * m));
      for (auto& row : inst.coords)
        for (auto& v : row) v = uniform01(rng);
      break;
    case ProblemKind::mocvrp: {
      inst.depot = {uniform01(rng), uniform01(rng)};
      inst.coords.assign(n, std::vector<double>(2));
      for (auto& row : inst.coords)
        for (auto& v : row) v = uniform01(rng);
      const double raw = mocvrp_raw_capacity(n);
      inst.demands.resize(n);
      for (auto& d : inst.demands) d = uniform_int(rng, 1, 9) / raw;
      inst.capacity = 1.0;
      break;
    }
    case ProblemKind::mokp: {
      inst.capacity = mokp_capacity(n);
      for (;;) {
        inst.coords.assign(n, std::vector<double>(m + 1));
        double total = 0.0;
        bool each_fits = true;
        for (auto& row : inst.coords) {
          for (auto& v : row) v = uniform01(rng);
          total += row[m];
          each_fits = each_fits && row[m] < inst.capacity;
        }
        if (each_fits && total > inst.capacity) break;
      }
      break;
    }
  }
  return inst;
}

ProblemInstance sample_clustered_motsp(int n, int m, int clusters, std::uint64_t seed, double sigma) {
  if (n < 2 || m < 2 || clusters < 1) throw ConfigError("clustered motsp needs n >= 2, m >= 2, clusters >= 1");
  Rng rng(seed);
  ProblemInstance inst;
  inst.kind = ProblemKind::motsp;
  inst.n = n;
  inst.m = m;
  inst.seed = seed;
  inst.coords.assign(n, std::vector<double>(2 * m));
  for (int obj = 0; obj < m; ++obj) {
    std::vector<std::array<double, 2>> centers(clusters);
    for (auto& c : centers) c = {0.2 + 0.6 * uniform01(rng), 0.2 + 0.6 * uniform01(rng)};
    for (int j = 0; j < n; ++j) {
      const auto& c = centers[uniform_int(rng, 0, clusters - 1)];
      for (int a = 0; a < 2; ++a)
        inst.coords[j][2 * obj + a] = std::clamp(c[a] + sigma * standard_normal(rng), 0.0, 1.0);
    }
  }
  return inst;
}

namespace {

[[noreturn]] void infeasible(const std::string& what) { throw InfeasibleSolution(what); }

std::vector<double> evaluate_tsp(const ProblemInstance& inst, const std::vector<int>& tour) {
  if (static_cast<int>(tour.size()) != inst.n)
    infeasible("motsp tour has " + std::to_string(tour.size()) + " nodes, expected " + std::to_string(inst.n));
  std::vector<std::uint8_t> seen(inst.n, 0);
  for (int v : tour) {
    if (v < 0 || v >= inst.n) infeasible("motsp tour visits unknown node " + std::to_string(v));
    if (seen[v]) infeasible("motsp tour visits node " + std::to_string(v) + " twice");
    seen[v] = 1;
  }
  std::vector<double> f(inst.m, 0.0);
  for (int i = 0; i < inst.m; ++i) {
    double len = inst.distance(i, tour.back(), tour.front());
    for (int j = 0; j + 1 < inst.n; ++j) len += inst.distance(i, tour[j], tour[j + 1]);
    f[i] = len;
  }
  return f;
}

std::vector<double> evaluate_cvrp(const ProblemInstance& inst, const std::vector<std::vector<int>>& routes) {
  std::vector<std::uint8_t> seen(inst.n, 0);
  double total = 0.0, longest = 0.0;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& route = routes[r];
    if (route.empty()) infeasible("mocvrp route " + std::to_string(r) + " is empty (depot-to-depot move)");
    double load = 0.0, len = 0.0;
    int prev = -1;
    for (int c : route) {
      if (c < 0 || c >= inst.n) infeasible("mocvrp route visits unknown customer " + std::to_string(c));
      if (seen[c]) infeasible("mocvrp customer " + std::to_string(c) + " served twice");
      seen[c] = 1;
      load += inst.demands[c];
      len += inst.distance(0, prev, c);
      prev = c;
    }
    len += inst.distance(0, prev, -1);
    if (load > inst.capacity + kCapacitySlack)
      infeasible("mocvrp route " + std::to_string(r) + " exceeds capacity (load " + std::to_string(load) + ")");
    total += len;
    longest = std::max(longest, len);
  }
  for (int c = 0; c < inst.n; ++c)
    if (!seen[c]) infeasible("mocvrp customer " + std::to_string(c) + " not served");
  return {total, longest};
}

std::vector<double> evaluate_kp(const ProblemInstance& inst, const std::vector<int>& items) {
  std::vector<std::uint8_t> seen(inst.n, 0);
  double w = 0.0;
  std::vector<double> f(inst.m, 0.0);
  for (int j : items) {
    if (j < 0 || j >= inst.n) infeasible("mokp selects unknown item " + std::to_string(j));
    if (seen[j]) infeasible("mokp selects item " + std::to_string(j) + " twice");
    seen[j] = 1;
    w += inst.weight(j);
    for (int i = 0; i < inst.m; ++i) f[i] += inst.value(j, i);
  }
  if (w > inst.capacity + kCapacitySlack)
    infeasible("mokp weight " + std::to_string(w) + " exceeds capacity " + std::to_string(inst.capacity));
  return f;
}

}  // namespace

std::vector<double> evaluate(const ProblemInstance& instance, const Solution& solution) {
  if (solution.kind != instance.kind) infeasible("solution kind does not match instance kind");
  switch (instance.kind) {
    case ProblemKind::motsp:
      return evaluate_tsp(instance, solution.order);
    case ProblemKind::mocvrp:
      return evaluate_cvrp(instance, solution.routes);
    case ProblemKind::mokp:
      return evaluate_kp(instance, solution.order);
  }
  return {};
}

std::vector<int> canonical_tour(const std::vector<int>& tour) {
  if (tour.size() < 3) {
    std::vector<int> t = tour;
    if (!t.empty()) std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
    return t;
  }
  std::vector<int> t = tour;
  std::rotate(t.begin(), std::find(t.begin(), t.end(), 0), t.end());
  if (t[1] > t.back()) std::reverse(t.begin() + 1, t.end());
  return t;
}

// ---------------------------------------------------------------------------

ConstructionState initial_state(const ProblemInstance& instance) {
  ConstructionState s;
  s.visited.assign(instance.n, 0);
  s.remaining = instance.capacity;
  return s;
}

std::vector<std::uint8_t> feasible_mask(const ProblemInstance& instance, const ConstructionState& state) {
  std::vector<std::uint8_t> mask(instance.n, 0);
  for (int j = 0; j < instance.n; ++j) {
    if (state.visited[j]) continue;
    switch (instance.kind) {
      case ProblemKind::motsp:
        mask[j] = 1;
        break;
      case ProblemKind::mocvrp:
        mask[j] = instance.demands[j] <= state.remaining + kCapacitySlack;
        break;
      case ProblemKind::mokp:
        mask[j] = instance.weight(j) <= state.remaining + kCapacitySlack;
        break;
    }
  }
  return mask;
}

void apply_action(const ProblemInstance& instance, ConstructionState& state, int node) {
  if (node < 0 || node >= instance.n) infeasible("action " + std::to_string(node) + " out of range");
  if (state.visited[node]) infeasible("node " + std::to_string(node) + " already selected");
  switch (instance.kind) {
    case ProblemKind::motsp:
      break;
    case ProblemKind::mocvrp:
      if (instance.demands[node] > state.remaining + kCapacitySlack)
        infeasible("customer " + std::to_string(node) + " demand exceeds remaining capacity");
      if (state.current < 0) state.routes.emplace_back();
      state.routes.back().push_back(node);
      state.remaining -= instance.demands[node];
      break;
    case ProblemKind::mokp:
      if (instance.weight(node) > state.remaining + kCapacitySlack)
        infeasible("item " + std::to_string(node) + " heavier than remaining capacity");
      state.remaining -= instance.weight(node);
      break;
  }
  state.visited[node] = 1;
  ++state.visited_count;
  if (state.first < 0) state.first = node;
  state.current = node;
  state.order.push_back(node);
}

void return_to_depot(const ProblemInstance& instance, ConstructionState& state) {
  if (instance.kind != ProblemKind::mocvrp) throw UsageError("return_to_depot on a " + to_string(instance.kind) + " instance");
  if (state.current < 0) infeasible("depot-to-depot move");
  state.current = -1;
  state.remaining = instance.capacity;
}

bool settle(const ProblemInstance& instance, ConstructionState& state) {
  if (instance.kind != ProblemKind::mocvrp || state.visited_count == instance.n) return false;
  const auto mask = feasible_mask(instance, state);
  if (std::any_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; })) return false;
  return_to_depot(instance, state);
  return true;
}

bool is_complete(const ProblemInstance& instance, const ConstructionState& state) {
  if (instance.kind != ProblemKind::mokp) return state.visited_count == instance.n;
  const auto mask = feasible_mask(instance, state);
  return std::none_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; });
}

Solution finish(const ProblemInstance& instance, const ConstructionState& state) {
  if (!is_complete(instance, state)) throw StateError("finish() on an incomplete construction");
  Solution s;
  s.kind = instance.kind;
  if (instance.kind == ProblemKind::mocvrp)
    s.routes = state.routes;
  else
    s.order = state.order;
  s.objectives = evaluate(instance, s);
  return s;
}

// ---------------------------------------------------------------------------

std::array<double, 2> transform_point(int t, double x, double y) {
  switch (t) {
    case 0:
      return {x, y};
    case 1:
      return {y, x};
    case 2:
      return {x, 1.0 - y};
    case 3:
      return {y, 1.0 - x};
    case 4:
      return {1.0 - x, y};
    case 5:
      return {1.0 - y, x};
    case 6:
      return {1.0 - x, 1.0 - y};
    case 7:
      return {1.0 - y, 1.0 - x};
  }
  throw ContractViolation("transform index " + std::to_string(t) + " outside 0..7");
}

int augmentation_count(const ProblemInstance& instance) {
  switch (instance.kind) {
    case ProblemKind::motsp: {
      int c = 1;
      for (int i = 0; i < instance.m; ++i) c *= kTransformCount;
      return c;
    }
    case ProblemKind::mocvrp:
      return kTransformCount;
    case ProblemKind::mokp:
      return 0;
  }
  return 0;
}

std::vector<ProblemInstance> augment(const ProblemInstance& instance) {
  std::vector<ProblemInstance> out;
  const int count = augmentation_count(instance);
  out.reserve(count);
  for (int v = 0; v < count; ++v) {
    ProblemInstance t = instance;
    if (instance.kind == ProblemKind::motsp) {
      int rest = v;
      for (int i = instance.m - 1; i >= 0; --i) {
        const int tr = rest % kTransformCount;
        rest /= kTransformCount;
        for (auto& row : t.coords) {
          const auto p = transform_point(tr, row[2 * i], row[2 * i + 1]);
          row[2 * i] = p[0];
          row[2 * i + 1] = p[1];
        }
      }
    } else {
      for (auto& row : t.coords) {
        const auto p = transform_point(v, row[0], row[1]);
        row = {p[0], p[1]};
      }
      const auto d = transform_point(v, instance.depot[0], instance.depot[1]);
      t.depot = {d[0], d[1]};
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------

double enumeration_size(const ProblemInstance& instance) {
  const int n = instance.n;
  switch (instance.kind) {
    case ProblemKind::motsp: {
      if (n <= 3) return 1.0;
      double f = 1.0;
      for (int i = 2; i <= n - 1; ++i) f *= i;
      return f / 2.0;
    }
    case ProblemKind::mokp:
      return std::ldexp(1.0, n);
    case ProblemKind::mocvrp: {
      double f = 1.0;
      for (int i = 2; i <= n; ++i) f *= i;
      return f * std::ldexp(1.0, n - 1);
    }
  }
  return 0.0;
}

void enumerate_feasible(const ProblemInstance& instance, double limit,
                        const std::function<void(const Solution&)>& visit) {
  const double size = enumeration_size(instance);
  if (size > limit)
    throw BudgetExceeded("enumeration of " + to_string(instance.kind) + " n=" + std::to_string(instance.n) +
                             " needs about " + std::to_string(size) + " candidates (limit " +
                             std::to_string(limit) + ")",
                         size);
  const int n = instance.n;
  Solution s;
  s.kind = instance.kind;
  switch (instance.kind) {
    case ProblemKind::motsp: {
      std::vector<int> rest(n - 1);
      std::iota(rest.begin(), rest.end(), 1);
      do {
        if (rest.size() >= 2 && rest.front() > rest.back()) continue;
        s.order.assign(1, 0);
        s.order.insert(s.order.end(), rest.begin(), rest.end());
        s.objectives = evaluate_tsp(instance, s.order);
        visit(s);
      } while (std::next_permutation(rest.begin(), rest.end()));
      break;
    }
    case ProblemKind::mokp: {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double w = 0.0;
        s.order.clear();
        for (int j = 0; j < n; ++j)
          if (mask >> j & 1) {
            w += instance.weight(j);
            s.order.push_back(j);
          }
        if (w > instance.capacity + kCapacitySlack) continue;
        s.objectives = evaluate_kp(instance, s.order);
        visit(s);
      }
      break;
    }
    case ProblemKind::mocvrp: {
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        for (std::uint64_t cuts = 0; cuts < (std::uint64_t{1} << (n - 1)); ++cuts) {
          s.routes.clear();
          s.routes.emplace_back();
          double load = 0.0;
          bool ok = true;
          for (int p = 0; p < n && ok; ++p) {
            if (p > 0 && (cuts >> (p - 1) & 1)) {
              s.routes.emplace_back();
              load = 0.0;
            }
            load += instance.demands[perm[p]];
            ok = load <= instance.capacity + kCapacitySlack;
            s.routes.back().push_back(perm[p]);
          }
          if (!ok) continue;
          s.objectives = evaluate_cvrp(instance, s.routes);
          visit(s);
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      break;
    }
  }
}

}  // namespace moco
