#pragma once

#include "moco/pareto.hpp"
#include "moco/problems.hpp"

namespace moco {

inline constexpr double kDefaultEnumerationLimit = 1e7;

// Exact Pareto front by brute force. Throws BudgetExceeded carrying the
// candidate count when it exceeds `limit`.
ParetoArchive enumerate_exact(const ProblemInstance& instance, double limit = kDefaultEnumerationLimit);

}  // namespace moco
