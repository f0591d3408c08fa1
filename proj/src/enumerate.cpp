#include "moco/enumerate.hpp"

namespace moco {

ParetoArchive enumerate_exact(const ProblemInstance& instance, double limit) {
  ParetoArchive archive(sense_of(instance.kind));
  enumerate_feasible(instance, limit, [&](const Solution& s) {
    // Cheap pre-check avoids copying the solution for dominated candidates.
    for (const auto& e : archive.entries())
      if (weakly_dominates(e.objectives, s.objectives, archive.sense())) return;
    Solution kept = s;
    if (kept.kind == ProblemKind::motsp) kept.order = canonical_tour(kept.order);
    archive.offer(s.objectives, {}, std::move(kept));
  });
  return archive;
}

}  // namespace moco
