#include "moco/scalarization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "moco/errors.hpp"

namespace moco {

std::string preference_violation(std::span<const double> w, int expected_size, double tol) {
  if (expected_size > 0 && static_cast<int>(w.size()) != expected_size)
    return "preference has " + std::to_string(w.size()) + " components, expected " + std::to_string(expected_size);
  if (w.empty()) return "preference is empty";
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) return "preference component " + std::to_string(i) + " is not finite";
    if (w[i] < 0.0) return "preference component " + std::to_string(i) + " is negative";
    total += w[i];
  }
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os << std::setprecision(17) << "preference sums to " << total << ", not 1";
    return os.str();
  }
  return {};
}

Preference::Preference(std::vector<double> weights, double sum_tolerance) : weights_(std::move(weights)) {
  if (auto why = preference_violation(weights_, 0, sum_tolerance); !why.empty()) throw DomainError(why);
}

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::ws:
      return "ws";
    case Aggregation::tch:
      return "tch";
    case Aggregation::mtch:
      return "mtch";
    case Aggregation::pbi:
      return "pbi";
    case Aggregation::ipbi:
      return "ipbi";
  }
  return "?";
}

Aggregation parse_aggregation(std::string_view name) {
  for (auto a : {Aggregation::ws, Aggregation::tch, Aggregation::mtch, Aggregation::pbi, Aggregation::ipbi})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown aggregation '" + std::string(name) + "'");
}

void ScalarizationSpec::validate(int m) const {
  if (!ideal.empty() && static_cast<int>(ideal.size()) != m) throw ContractViolation("ideal point has wrong length");
  if (!nadir.empty() && static_cast<int>(nadir.size()) != m) throw ContractViolation("nadir point has wrong length");
  if (epsilon < 0.0) throw ContractViolation("utopia offset must be nonnegative");
  if (theta < 0.0) throw ContractViolation("pbi penalty must be nonnegative");
  if (method == Aggregation::ipbi && nadir.empty()) throw ContractViolation("ipbi needs a nadir point");
  if (!ideal.empty() && !nadir.empty()) {
    for (int i = 0; i < m; ++i) {
      const bool ok = sense == Sense::minimize ? nadir[i] >= ideal[i] : nadir[i] <= ideal[i];
      if (!ok) throw ContractViolation("nadir is better than ideal in objective " + std::to_string(i));
    }
  }
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// d1 along the preference direction and d2 perpendicular to it, for a
// displacement vector `diff`.
std::pair<double, double> boundary_distances(std::span<const double> diff, const Preference& pref) {
  const int m = pref.size();
  const double ln = norm(pref.weights());
  double dot = 0.0;
  for (int i = 0; i < m; ++i) dot += diff[i] * pref[i];
  const double d1 = std::abs(dot) / ln;
  double d2sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = diff[i] - d1 * pref[i] / ln;
    d2sq += r * r;
  }
  return {d1, std::sqrt(d2sq)};
}

}  // namespace

double scalarize(std::span<const double> objectives, const Preference& pref, const ScalarizationSpec& spec) {
  const int m = static_cast<int>(objectives.size());
  if (pref.size() != m)
    throw ContractViolation("scalarize: " + std::to_string(m) + " objectives vs preference of size " +
                            std::to_string(pref.size()));
  spec.validate(m);
  const double sign = spec.sense == Sense::maximize ? -1.0 : 1.0;
  std::vector<double> f(m), z(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(objectives[i])) throw ContractViolation("scalarize: objective not finite");
    f[i] = sign * objectives[i];
    if (!spec.ideal.empty()) z[i] = sign * spec.ideal[i];
  }

  double g = 0.0;
  switch (spec.method) {
    case Aggregation::ws:
      for (int i = 0; i < m; ++i) g += pref[i] * f[i];
      break;
    case Aggregation::tch:
      g = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) g = std::max(g, pref[i] * std::abs(f[i] - (z[i] - spec.epsilon)));
      break;
    case Aggregation::mtch:
      g = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (pref[i] <= 0.0) throw DomainError("mtch needs every preference component > 0");
        g = std::max(g, std::abs(f[i] - z[i]) / pref[i]);
      }
      break;
    case Aggregation::pbi: {
      std::vector<double> diff(m);
      for (int i = 0; i < m; ++i) diff[i] = f[i] - z[i];
      const auto [d1, d2] = boundary_distances(diff, pref);
      g = d1 + spec.theta * d2;
      break;
    }
    case Aggregation::ipbi: {
      std::vector<double> diff(m);
      for (int i = 0; i < m; ++i) diff[i] = sign * spec.nadir[i] - f[i];
      const auto [d1, d2] = boundary_distances(diff, pref);
      g = -d1 + spec.theta * d2;
      break;
    }
  }
  if (!std::isfinite(g)) throw ContractViolation("scalarize produced a non-finite value");
  return g;
}

Preference sample_preference(int m, Rng& rng) {
  if (m < 2) throw ConfigError("preferences need m >= 2");
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log(uniform_open01(rng));
    total += x;
  }
  for (auto& x : w) x /= total;
  // Push the rounding residue into the largest component so the sum is 1
  // to the last bit where possible.
  const double residue = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
  *std::max_element(w.begin(), w.end()) += residue;
  return Preference(std::move(w));
}

std::uint64_t das_dennis_count(int m, int p) {
  if (m < 1 || p < 0) throw ConfigError("das_dennis_count needs m >= 1, p >= 0");
  const int n = m + p - 1;
  const int k = std::min(p, m - 1);
  unsigned __int128 c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (c > std::numeric_limits<std::uint64_t>::max())
      throw BudgetExceeded("lattice count overflows 64 bits", std::numeric_limits<double>::infinity());
  }
  return static_cast<std::uint64_t>(c);
}

std::vector<Preference> das_dennis_weights(int m, int p, std::uint64_t cap) {
  if (m < 2) throw ConfigError("das_dennis_weights needs m >= 2");
  if (p < 1) throw ConfigError("das_dennis_weights needs p >= 1");
  const std::uint64_t count = das_dennis_count(m, p);
  if (count > cap)
    throw BudgetExceeded("Das-Dennis lattice (m=" + std::to_string(m) + ", p=" + std::to_string(p) + ") has " +
                             std::to_string(count) + " points, cap " + std::to_string(cap),
                         static_cast<double>(count));
  std::vector<Preference> out;
  out.reserve(count);
  std::vector<int> k(m, 0);
  const auto emit = [&] {
    std::vector<double> w(m);
    for (int i = 0; i < m; ++i) w[i] = static_cast<double>(k[i]) / p;
    out.emplace_back(std::move(w));
  };
  std::function<void(int, int)> rec = [&](int idx, int left) {
    if (idx == m - 1) {
      k[idx] = left;
      emit();
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[idx] = v;
      rec(idx + 1, left - v);
    }
  };
  rec(0, p);
  return out;
}

std::vector<Preference> uniform_grid(int k) {
  if (k < 2) throw ConfigError("uniform_grid needs at least 2 points");
  std::vector<Preference> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i)
    out.emplace_back(std::vector<double>{static_cast<double>(i) / (k - 1), static_cast<double>(k - 1 - i) / (k - 1)});
  return out;
}

void write_weights_csv(std::ostream& os, std::span<const Preference> weights) {
  os << std::setprecision(17);
  for (const auto& w : weights) {
    for (int i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
    os << '\n';
  }
}

std::vector<double> fractional_knapsack_bound(const ProblemInstance& inst) {
  if (inst.kind != ProblemKind::mokp) throw ConfigError("fractional knapsack bound needs a mokp instance");
  std::vector<double> ub(inst.m, 0.0);
  std::vector<int> idx(inst.n);
  for (int i = 0; i < inst.m; ++i) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return inst.value(a, i) * inst.weight(b) > inst.value(b, i) * inst.weight(a);
    });
    double room = inst.capacity;
    for (int j : idx) {
      const double w = inst.weight(j);
      if (w <= room) {
        ub[i] += inst.value(j, i);
        room -= w;
      } else {
        ub[i] += inst.value(j, i) * room / w;
        break;
      }
    }
  }
  return ub;
}

IdealNadir ideal_nadir(const ProblemInstance& instance, IdealMode mode) {
  switch (mode) {
    case IdealMode::fixed_zero:
      return {std::vector<double>(instance.m, 0.0), {}};
    case IdealMode::greedy_bound:
      return {fractional_knapsack_bound(instance), std::vector<double>(instance.m, 0.0)};
    case IdealMode::from_archive:
      throw StateError("from_archive needs archive points; none given");
  }
  return {};
}

IdealNadir ideal_nadir(std::span<const std::vector<double>> points, Sense sense) {
  if (points.empty()) throw StateError("from_archive on an empty archive");
  const std::size_t m = points.front().size();
  IdealNadir r{points.front(), points.front()};
  for (const auto& p : points) {
    if (p.size() != m) throw ContractViolation("archive points of different lengths");
    for (std::size_t i = 0; i < m; ++i) {
      if (sense == Sense::minimize) {
        r.ideal[i] = std::min(r.ideal[i], p[i]);
        r.nadir[i] = std::max(r.nadir[i], p[i]);
      } else {
        r.ideal[i] = std::max(r.ideal[i], p[i]);
        r.nadir[i] = std::min(r.nadir[i], p[i]);
      }
    }
  }
  return r;
}

ScalarizationRecipe default_recipe(int m) {
  ScalarizationRecipe r;
  r.method = m <= 2 ? Aggregation::tch : Aggregation::ipbi;
  return r;
}

ScalarizationSpec resolve(const ScalarizationRecipe& recipe, const ProblemInstance& instance) {
  ScalarizationSpec spec;
  spec.method = recipe.method;
  spec.epsilon = recipe.epsilon;
  spec.theta = recipe.theta;
  spec.sense = sense_of(instance.kind);
  spec.ideal = instance.kind == ProblemKind::mokp ? fractional_knapsack_bound(instance)
                                                  : std::vector<double>(instance.m, 0.0);
  return spec;
}

ScalarizationSpec with_group_nadir(ScalarizationSpec spec, std::span<const std::vector<double>> group) {
  spec.nadir = ideal_nadir(group, spec.sense).nadir;
  return spec;
}

}  // namespace moco
