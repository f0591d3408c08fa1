#include "moco/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "moco/errors.hpp"
#include "moco/rng.hpp"

namespace moco {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ContractViolation("objective vectors of lengths " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
}

std::string point_str(std::span<const double> p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

void require_inside(std::span<const Point> points, std::span<const double> ref) {
  for (const auto& p : points) {
    require_same_length(p, ref);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!(p[i] <= ref[i]))
        throw ContractViolation("point " + point_str(p) + " does not dominate the reference point " + point_str(ref));
  }
}

}  // namespace

bool dominates(std::span<const double> a, std::span<const double> b, Sense sense) {
  require_same_length(a, b);
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = sense == Sense::minimize ? a[i] : -a[i];
    const double y = sense == Sense::minimize ? b[i] : -b[i];
    if (x > y) return false;
    if (x < y) strict = true;
  }
  return strict;
}

bool weakly_dominates(std::span<const double> a, std::span<const double> b, Sense sense) {
  require_same_length(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = sense == Sense::minimize ? a[i] : -a[i];
    const double y = sense == Sense::minimize ? b[i] : -b[i];
    if (x > y) return false;
  }
  return true;
}

bool eps_dominates(std::span<const double> a, std::span<const double> b, double eps) {
  require_same_length(a, b);
  if (eps < 0.0) throw DomainError("eps-dominance needs eps >= 0");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0 || b[i] < 0.0) throw DomainError("multiplicative eps-dominance needs nonnegative objectives");
    if (a[i] > (1.0 + eps) * b[i]) return false;
  }
  return true;
}

EpsApproxResult is_eps_approx_set(std::span<const Point> candidate, std::span<const Point> reference, double eps) {
  for (std::size_t x = 0; x < reference.size(); ++x) {
    const bool covered = std::any_of(candidate.begin(), candidate.end(),
                                     [&](const Point& c) { return eps_dominates(c, reference[x], eps); });
    if (!covered) return {false, x};
  }
  return {true, std::nullopt};
}

double minimal_eps(std::span<const Point> candidate, std::span<const Point> reference) {
  if (reference.empty()) return 0.0;
  if (candidate.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& x : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidate) {
      require_same_length(c, x);
      double need = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (c[i] < 0.0 || x[i] < 0.0) throw DomainError("minimal_eps needs nonnegative objectives");
        if (c[i] <= x[i]) continue;
        need = x[i] > 0.0 ? std::max(need, c[i] / x[i] - 1.0) : std::numeric_limits<double>::infinity();
      }
      best = std::min(best, need);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<std::size_t> nondominated_indices(std::span<const Point> points, Sense sense) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  const double sign = sense == Sense::minimize ? 1.0 : -1.0;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = points[a];
    const auto& pb = points[b];
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (sign * pa[i] < sign * pb[i]) return true;
      if (sign * pa[i] > sign * pb[i]) return false;
    }
    return false;
  });
  // Only lexicographically earlier points can dominate later ones, and any
  // dominated point is dominated by a front member.
  std::vector<std::size_t> front;
  for (std::size_t idx : order) {
    const bool covered = std::any_of(front.begin(), front.end(),
                                     [&](std::size_t f) { return weakly_dominates(points[f], points[idx], sense); });
    if (!covered) front.push_back(idx);
  }
  std::sort(front.begin(), front.end());
  return front;
}

std::vector<Point> nondominated_filter(std::span<const Point> points, Sense sense) {
  std::vector<Point> out;
  for (std::size_t i : nondominated_indices(points, sense)) out.push_back(points[i]);
  return out;
}

std::vector<Point> to_minimization(std::span<const Point> points, Sense sense) {
  std::vector<Point> out(points.begin(), points.end());
  if (sense == Sense::maximize)
    for (auto& p : out)
      for (auto& x : p) x = -x;
  return out;
}

double hypervolume_2d(std::span<const Point> points, std::span<const double> ref) {
  require_inside(points, ref);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.emplace_back(p[0], p[1]);
  std::sort(pts.begin(), pts.end());
  double hv = 0.0, y_prev = ref[1];
  for (const auto& [x, y] : pts) {
    if (y < y_prev) {
      hv += (ref[0] - x) * (y_prev - y);
      y_prev = y;
    }
  }
  return hv;
}

namespace {

// 2-D staircase kept as x -> y with x increasing, y strictly decreasing.
class Front2d {
 public:
  explicit Front2d(double rx, double ry) : rx_(rx), ry_(ry) {}

  void insert(double x, double y) {
    auto it = front_.upper_bound(x);
    if (it != front_.begin() && std::prev(it)->second <= y) return;  // weakly dominated
    // Remove points the new one dominates: x' >= x and y' >= y.
    auto lo = front_.lower_bound(x);
    auto hi = lo;
    while (hi != front_.end() && hi->second >= y) ++hi;
    front_.erase(lo, hi);
    front_.emplace(x, y);
    area_ = 0.0;
    double y_prev = ry_;
    for (const auto& [fx, fy] : front_) {
      area_ += (rx_ - fx) * (y_prev - fy);
      y_prev = fy;
    }
  }

  double area() const { return area_; }

 private:
  double rx_, ry_;
  double area_ = 0.0;
  std::map<double, double> front_;
};

}  // namespace

double hypervolume_3d(std::span<const Point> points, std::span<const double> ref) {
  require_inside(points, ref);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a][2] < points[b][2]; });
  Front2d front(ref[0], ref[1]);
  double hv = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = points[order[k]];
    front.insert(p[0], p[1]);
    const double z_next = k + 1 < order.size() ? points[order[k + 1]][2] : ref[2];
    hv += front.area() * (z_next - p[2]);
  }
  return hv;
}

HypervolumeResult hypervolume_mc(std::span<const Point> points, std::span<const double> ref, std::size_t samples,
                                 std::uint64_t seed) {
  require_inside(points, ref);
  if (points.empty()) return {0.0, 0.0, false};
  const std::size_t m = ref.size();
  std::vector<double> lo(ref.begin(), ref.end());
  for (const auto& p : points)
    for (std::size_t i = 0; i < m; ++i) lo[i] = std::min(lo[i], p[i]);
  double box = 1.0;
  for (std::size_t i = 0; i < m; ++i) box *= ref[i] - lo[i];
  if (box <= 0.0) return {0.0, 0.0, false};
  Rng rng(seed);
  std::vector<double> s(m);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    for (std::size_t i = 0; i < m; ++i) s[i] = lo[i] + (ref[i] - lo[i]) * uniform01(rng);
    for (const auto& p : points) {
      bool in = true;
      for (std::size_t i = 0; i < m && in; ++i) in = p[i] <= s[i];
      if (in) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / samples;
  return {box * frac, box * std::sqrt(frac * (1.0 - frac) / samples), false};
}

HypervolumeResult hypervolume(std::span<const Point> points, std::span<const double> ref, std::size_t mc_samples,
                              std::uint64_t mc_seed) {
  switch (ref.size()) {
    case 1: {
      require_inside(points, ref);
      double best = ref[0];
      for (const auto& p : points) best = std::min(best, p[0]);
      return {ref[0] - best, 0.0, true};
    }
    case 2:
      return {hypervolume_2d(points, ref), 0.0, true};
    case 3:
      return {hypervolume_3d(points, ref), 0.0, true};
    default:
      return hypervolume_mc(points, ref, mc_samples, mc_seed);
  }
}

double clipped_hypervolume(std::span<const Point> points, std::span<const double> ref) {
  std::vector<Point> inside;
  for (const auto& p : points) {
    require_same_length(p, ref);
    bool ok = true;
    for (std::size_t i = 0; i < p.size() && ok; ++i) ok = p[i] < ref[i];
    if (ok) inside.push_back(p);
  }
  return hypervolume(inside, ref).value;
}

double normalized_hv(std::span<const Point> points, std::span<const double> ref) {
  double prod = 1.0;
  for (double r : ref) {
    if (!(r > 0.0)) throw DomainError("normalized hypervolume needs a positive reference point");
    prod *= r;
  }
  for (const auto& p : points)
    for (double x : p)
      if (x < 0.0) throw DomainError("normalized hypervolume needs nonnegative objectives");
  return hypervolume(points, ref).value / prod;
}

double igd(std::span<const Point> approx, std::span<const Point> exact_front) {
  if (exact_front.empty()) throw ContractViolation("igd needs a nonempty exact front");
  if (approx.empty()) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& e : exact_front) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : approx) {
      require_same_length(a, e);
      double d = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) d += (a[i] - e[i]) * (a[i] - e[i]);
      best = std::min(best, d);
    }
    total += std::sqrt(best);
  }
  return total / exact_front.size();
}

Point reference_point(std::span<const std::vector<Point>> sets) {
  Point r;
  for (const auto& set : sets)
    for (const auto& p : set) {
      if (r.empty()) {
        r = p;
        continue;
      }
      require_same_length(p, r);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(r[i], p[i]);
    }
  if (r.empty()) throw ContractViolation("reference_point needs at least one nonempty set");
  return r;
}

bool ParetoArchive::offer(Point objectives, std::vector<double> preference, Solution solution) {
  for (const auto& e : entries_)
    if (weakly_dominates(e.objectives, objectives, sense_)) return false;
  std::erase_if(entries_, [&](const Entry& e) { return dominates(objectives, e.objectives, sense_); });
  entries_.push_back({std::move(objectives), std::move(preference), std::move(solution)});
  return true;
}

std::vector<Point> ParetoArchive::points() const {
  std::vector<Point> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.objectives);
  return out;
}

std::vector<Point> ParetoArchive::minimization_points() const { return to_minimization(points(), sense_); }

}  // namespace moco
