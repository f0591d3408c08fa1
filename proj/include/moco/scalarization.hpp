#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moco/problems.hpp"
#include "moco/rng.hpp"

namespace moco {

// A point on the simplex: nonnegative weights summing to one.
class Preference {
 public:
  Preference() = default;
  // Throws DomainError naming the violated invariant.
  explicit Preference(std::vector<double> weights, double sum_tolerance = 1e-9);

  int size() const { return static_cast<int>(weights_.size()); }
  double operator[](int i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const Preference&) const = default;

 private:
  std::vector<double> weights_;
};

// Empty string when valid, otherwise a description of the first violation.
std::string preference_violation(std::span<const double> weights, int expected_size, double sum_tolerance);

enum class Aggregation { ws, tch, mtch, pbi, ipbi };

std::string to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view name);

struct ScalarizationSpec {
  Aggregation method = Aggregation::tch;
  // Ideal and nadir are given in the problem's own objective space; for
  // maximization everything is negated before aggregating.
  std::vector<double> ideal;
  double epsilon = 0.1;  // utopia offset: u* = z* - epsilon (tch only)
  double theta = 5.0;    // pbi / ipbi penalty
  std::vector<double> nadir;
  Sense sense = Sense::minimize;

  void validate(int m) const;
};

double scalarize(std::span<const double> objectives, const Preference& pref, const ScalarizationSpec& spec);

// Flat Dirichlet draw via normalized exponentials.
Preference sample_preference(int m, Rng& rng);

// C(m + p - 1, p); throws BudgetExceeded when it does not fit in 64 bits.
std::uint64_t das_dennis_count(int m, int p);

// Every lattice point k/p with sum(k) = p, lexicographic in k.
std::vector<Preference> das_dennis_weights(int m, int p, std::uint64_t cap = 2'000'000);

// Two-objective grid {(i/(k-1), 1 - i/(k-1))}, endpoints included.
std::vector<Preference> uniform_grid(int k);

// One preference per row, full precision.
void write_weights_csv(std::ostream& os, std::span<const Preference> weights);

enum class IdealMode { fixed_zero, greedy_bound, from_archive };

struct IdealNadir {
  std::vector<double> ideal;
  std::vector<double> nadir;  // empty when unknown
};

// Per-objective fractional-knapsack upper bound (mokp).
std::vector<double> fractional_knapsack_bound(const ProblemInstance& instance);

IdealNadir ideal_nadir(const ProblemInstance& instance, IdealMode mode);
// from_archive: componentwise best / worst of the given objective vectors.
IdealNadir ideal_nadir(std::span<const std::vector<double>> points, Sense sense);

// Instance-independent cost definition carried by checkpoints; the ideal
// point is resolved per instance (zero for tour lengths, the greedy bound for
// knapsack values).
struct ScalarizationRecipe {
  Aggregation method = Aggregation::tch;
  double epsilon = 0.1;
  double theta = 5.0;
};

// tch for two objectives, ipbi (theta 5) beyond.
ScalarizationRecipe default_recipe(int m);

ScalarizationSpec resolve(const ScalarizationRecipe& recipe, const ProblemInstance& instance);

// ipbi needs a nadir; use the componentwise worst of a rollout group.
ScalarizationSpec with_group_nadir(ScalarizationSpec spec, std::span<const std::vector<double>> group);

}  // namespace moco
