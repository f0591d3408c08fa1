#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace moco {

enum class ProblemKind { motsp, mocvrp, mokp };

std::string to_string(ProblemKind kind);
ProblemKind parse_kind(std::string_view name);

enum class Sense { minimize, maximize };

inline Sense sense_of(ProblemKind kind) {
  return kind == ProblemKind::mokp ? Sense::maximize : Sense::minimize;
}

// Feasibility comparisons (capacity, weight) allow this much slack so that
// normalized demands like 3/30 survive repeated subtraction.
inline constexpr double kCapacitySlack = 1e-9;

struct ProblemInstance {
  ProblemKind kind = ProblemKind::motsp;
  int m = 2;
  int n = 0;
  // motsp: n rows of 2m reals, objective i uses columns (2i, 2i+1).
  // mocvrp: n rows of 2 reals (customer locations).
  // mokp: n rows of m values followed by the item weight.
  std::vector<std::vector<double>> coords;
  std::array<double, 2> depot{0.0, 0.0};  // mocvrp
  std::vector<double> demands;            // mocvrp, normalized by the raw capacity
  double capacity = 1.0;                  // mocvrp: 1 after normalization; mokp: W
  std::uint64_t seed = 0;
  std::string id;

  double weight(int item) const { return coords[item][m]; }
  double value(int item, int objective) const { return coords[item][objective]; }

  // Euclidean cost between two nodes. For mocvrp node -1 is the depot and the
  // objective index is ignored.
  double distance(int objective, int a, int b) const;

  // Throws ConfigError on any broken instance invariant.
  void validate() const;
};

struct Solution {
  ProblemKind kind = ProblemKind::motsp;
  // motsp: the tour; mokp: selected items in selection order.
  std::vector<int> order;
  // mocvrp: depot-delimited routes, customers 0..n-1.
  std::vector<std::vector<int>> routes;
  std::vector<double> objectives;

  // Flat form used in solution dumps: motsp tour, mokp items, and for mocvrp
  // 0 = depot with customers shifted to 1..n.
  std::vector<int> flat() const;
  static Solution from_flat(ProblemKind kind, const std::vector<int>& flat);
};

// Raw (pre-normalization) vehicle capacity used for a given customer count.
double mocvrp_raw_capacity(int n);
double mokp_capacity(int n);

ProblemInstance sample_instance(ProblemKind kind, int n, int m, std::uint64_t seed);

// Out-of-distribution motsp: per objective, nodes drawn around `clusters`
// Gaussian centers and clipped to the unit square.
ProblemInstance sample_clustered_motsp(int n, int m, int clusters, std::uint64_t seed,
                                       double sigma = 0.07);

std::vector<double> evaluate(const ProblemInstance& instance, const Solution& solution);

// Rotate to start at node 0 and orient so that tour[1] < tour[n-1].
std::vector<int> canonical_tour(const std::vector<int>& tour);

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

struct ConstructionState {
  std::vector<std::uint8_t> visited;
  int first = -1;    // first selected node / item
  int current = -1;  // last selected; -1 means at the depot (mocvrp) or nothing yet
  double remaining = 0.0;
  int visited_count = 0;
  std::vector<int> order;
  std::vector<std::vector<int>> routes;  // mocvrp; the open route is routes.back()
};

ConstructionState initial_state(const ProblemInstance& instance);

// true = admissible. motsp: unvisited nodes; mocvrp: unvisited customers whose
// demand fits; mokp: unselected items whose weight fits. May be all false.
std::vector<std::uint8_t> feasible_mask(const ProblemInstance& instance, const ConstructionState& state);

void apply_action(const ProblemInstance& instance, ConstructionState& state, int node);

// mocvrp only. Depot-to-depot moves are rejected.
void return_to_depot(const ProblemInstance& instance, ConstructionState& state);

// mocvrp: when customers remain but none fits, return to the depot
// implicitly. Returns true when a return happened.
bool settle(const ProblemInstance& instance, ConstructionState& state);

// motsp/mocvrp: every node visited; mokp: nothing admissible remains.
bool is_complete(const ProblemInstance& instance, const ConstructionState& state);

Solution finish(const ProblemInstance& instance, const ConstructionState& state);

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

inline constexpr int kTransformCount = 8;

// Transform t in order (x,y), (y,x), (x,1-y), (y,1-x), (1-x,y), (1-y,x),
// (1-x,1-y), (1-y,1-x).
std::array<double, 2> transform_point(int t, double x, double y);

// motsp: 8^m variants (objective 0 is the most significant digit of the
// variant index); mocvrp: 8; mokp: none. Variant 0 is the identity.
std::vector<ProblemInstance> augment(const ProblemInstance& instance);
int augmentation_count(const ProblemInstance& instance);

// ---------------------------------------------------------------------------
// Exhaustive enumeration (tiny instances)
// ---------------------------------------------------------------------------

// motsp (n-1)!/2 tours; mokp 2^n subsets; mocvrp n! * 2^(n-1) ordered splits.
double enumeration_size(const ProblemInstance& instance);

// Calls `visit` with every feasible solution (objectives filled in).
// Throws BudgetExceeded (carrying the estimate) when the size exceeds limit.
void enumerate_feasible(const ProblemInstance& instance, double limit,
                        const std::function<void(const Solution&)>& visit);

}  // namespace moco
