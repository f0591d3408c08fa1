#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "moco/problems.hpp"

namespace moco {

using Point = std::vector<double>;

// a is no worse everywhere and strictly better somewhere.
bool dominates(std::span<const double> a, std::span<const double> b, Sense sense = Sense::minimize);
bool weakly_dominates(std::span<const double> a, std::span<const double> b, Sense sense = Sense::minimize);

// f_i(a) <= (1 + eps) f_i(b) for all i (minimization, nonnegative objectives).
bool eps_dominates(std::span<const double> a, std::span<const double> b, double eps);

struct EpsApproxResult {
  bool holds = false;
  std::optional<std::size_t> witness;  // index into the reference set that is not covered
};

EpsApproxResult is_eps_approx_set(std::span<const Point> candidate, std::span<const Point> reference, double eps);

// Smallest eps >= 0 for which `candidate` eps-covers `reference`.
double minimal_eps(std::span<const Point> candidate, std::span<const Point> reference);

// Indices of the non-dominated, deduplicated subset in order of first occurrence.
std::vector<std::size_t> nondominated_indices(std::span<const Point> points, Sense sense = Sense::minimize);
std::vector<Point> nondominated_filter(std::span<const Point> points, Sense sense = Sense::minimize);

std::vector<Point> to_minimization(std::span<const Point> points, Sense sense);

inline constexpr std::uint64_t kDefaultMcSeed = 20240601;
inline constexpr std::size_t kDefaultMcSamples = 1'000'000;

struct HypervolumeResult {
  double value = 0.0;
  double std_error = 0.0;  // zero for the exact paths
  bool exact = true;
};

// Minimization. Every point must weakly dominate the reference point; points
// touching it contribute nothing. Exact for m <= 3, Monte-Carlo beyond.
HypervolumeResult hypervolume(std::span<const Point> points, std::span<const double> ref,
                              std::size_t mc_samples = kDefaultMcSamples, std::uint64_t mc_seed = kDefaultMcSeed);

double hypervolume_2d(std::span<const Point> points, std::span<const double> ref);
double hypervolume_3d(std::span<const Point> points, std::span<const double> ref);
HypervolumeResult hypervolume_mc(std::span<const Point> points, std::span<const double> ref, std::size_t samples,
                                 std::uint64_t seed);

// Like hypervolume() but points outside the reference box are ignored
// instead of rejected (used for curves measured against a frozen reference).
double clipped_hypervolume(std::span<const Point> points, std::span<const double> ref);

// HV / prod(ref) for nonnegative objectives and a positive reference point.
double normalized_hv(std::span<const Point> points, std::span<const double> ref);

// Mean over exact-front points of the distance to the nearest approximation
// point; +inf when the approximation is empty.
double igd(std::span<const Point> approx, std::span<const Point> exact_front);

// Componentwise worst (largest) over the union of the sets.
Point reference_point(std::span<const std::vector<Point>> sets);

class ParetoArchive {
 public:
  struct Entry {
    Point objectives;
    std::vector<double> preference;
    Solution solution;
  };

  explicit ParetoArchive(Sense sense = Sense::minimize) : sense_(sense) {}

  // Inserts unless an existing entry weakly dominates the point; evicts
  // entries the new point dominates. Returns whether it was inserted.
  bool offer(Point objectives, std::vector<double> preference = {}, Solution solution = {});

  Sense sense() const { return sense_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Point> points() const;
  // Points negated where the sense is maximize.
  std::vector<Point> minimization_points() const;

 private:
  Sense sense_;
  std::vector<Entry> entries_;
};

}  // namespace moco
